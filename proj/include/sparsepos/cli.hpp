#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sparsepos::cli {

// Exit codes: 0 ok, 1 malformed input, 2 precondition failure, 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace sparsepos::cli
