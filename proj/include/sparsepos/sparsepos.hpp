#pragma once

#include "sparsepos/errors.hpp"
#include "sparsepos/chebyshev.hpp"
#include "sparsepos/poly.hpp"
#include "sparsepos/sparsity.hpp"
#include "sparsepos/jackson.hpp"
#include "sparsepos/univariate.hpp"
#include "sparsepos/sos.hpp"
#include "sparsepos/certificate.hpp"
#include "sparsepos/approx.hpp"
#include "sparsepos/pipeline.hpp"
#include "sparsepos/bounds.hpp"
#include "sparsepos/io.hpp"
