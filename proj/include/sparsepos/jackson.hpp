#pragma once

#include "sparsepos/chebyshev.hpp"
#include "sparsepos/errors.hpp"
#include "sparsepos/poly.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace sparsepos {

// lambda_k^r in closed form.
inline double lambda_1d(int k, int r) {
    if (r < 0 || k < 0 || k > r)
        throw InputError("lambda_1d needs 0 <= k <= r, got k=" + std::to_string(k) + " r=" + std::to_string(r));
    if (k == 0) return 1.0;
    const double a = cheb::pi / (r + 2);
    return ((r + 2 - k) * std::cos(k * a) + std::sin(k * a) * std::cos(a) / std::sin(a)) / (r + 2);
}

class JacksonSpec {
  public:
    JacksonSpec() = default;
    explicit JacksonSpec(MultiIndex r) : r_(std::move(r)) {
        for (int v : r_)
            if (v < 0) throw InputError("negative Jackson degree");
        lam_.resize(r_.size());
        for (std::size_t k = 0; k < r_.size(); ++k) {
            for (int i = 0; i <= r_[k]; ++i) lam_[k].push_back(lambda_1d(i, r_[k]));
            if (r_[k] > 0) active_.push_back(static_cast<int>(k));
        }
    }
    // r on the listed variables, 0 elsewhere
    static JacksonSpec on(int dim, const std::vector<int>& vars, const std::vector<int>& r) {
        MultiIndex R(static_cast<std::size_t>(dim), 0);
        for (std::size_t k = 0; k < vars.size(); ++k) R.at(static_cast<std::size_t>(vars[k])) = r.at(k);
        return JacksonSpec(R);
    }

    int dim() const { return static_cast<int>(r_.size()); }
    const MultiIndex& r() const { return r_; }
    const std::vector<int>& active_vars() const { return active_; }
    double lambda(int var, int k) const { return lam_.at(static_cast<std::size_t>(var)).at(static_cast<std::size_t>(k)); }
    const std::vector<double>& lambdas(int var) const { return lam_.at(static_cast<std::size_t>(var)); }

    double lambda_multi(const MultiIndex& I) const {
        if (static_cast<int>(I.size()) != dim()) throw DimensionMismatch("index length differs from the kernel degrees");
        if (!index_leq(I, r_)) throw DegreeExceedsSpec("index " + index_str(I) + " exceeds r = " + index_str(r_));
        double s = 1.0;
        for (std::size_t k = 0; k < I.size(); ++k) s *= lam_[k][static_cast<std::size_t>(I[k])];
        return s;
    }

  private:
    MultiIndex r_;
    std::vector<int> active_;
    std::vector<std::vector<double>> lam_;
};

namespace detail {

inline void check_in_spec(const JacksonSpec& spec, const SparsePoly& c) {
    if (c.dim() != spec.dim()) throw DimensionMismatch("polynomial dimension differs from the kernel degrees");
    std::string bad;
    int count = 0;
    for (const auto& [I, a] : c.terms())
        if (!index_leq(I, spec.r())) {
            if (count++ < 5) bad += index_str(I) + " ";
        }
    if (count) throw DegreeExceedsSpec(std::to_string(count) + " term(s) outside Poly(J, r=" + index_str(spec.r()) + "): " + bad);
}

} // namespace detail

inline SparsePoly jackson_apply(const JacksonSpec& spec, const SparsePoly& p) {
    const SparsePoly c = to_chebyshev(p);
    detail::check_in_spec(spec, c);
    SparsePoly out(c.dim(), Basis::Chebyshev);
    for (const auto& [I, a] : c.terms()) out.add_term(I, a * spec.lambda_multi(I));
    return out;
}

inline constexpr double kMinLambda = 1e-13;

inline SparsePoly jackson_apply_inverse(const JacksonSpec& spec, const SparsePoly& p) {
    const SparsePoly c = to_chebyshev(p);
    detail::check_in_spec(spec, c);
    SparsePoly out(c.dim(), Basis::Chebyshev);
    for (const auto& [I, a] : c.terms()) {
        double l = spec.lambda_multi(I);
        if (l < kMinLambda) throw NumericalFailure("eigenvalue of " + index_str(I) + " below 1e-13");
        out.add_term(I, a / l);
    }
    return out;
}

// Univariate kernel J_r(z, .) in Chebyshev coefficients: 1 + 2 sum lambda_k T_k(z) T_k.
inline std::vector<double> kernel_1d(const std::vector<double>& lam, double z) {
    const int r = static_cast<int>(lam.size()) - 1;
    auto t = cheb::values(z, r);
    std::vector<double> c(lam.size());
    c[0] = 1.0;
    for (int k = 1; k <= r; ++k) c[k] = 2.0 * lam[k] * t[k];
    return c;
}

inline double kernel_eval(const JacksonSpec& spec, const std::vector<double>& x, const std::vector<double>& y) {
    if (static_cast<int>(x.size()) != spec.dim() || static_cast<int>(y.size()) != spec.dim())
        throw DimensionMismatch("kernel points must have length " + std::to_string(spec.dim()));
    for (std::size_t k = 0; k < x.size(); ++k)
        if (std::abs(x[k]) > 1.0 || std::abs(y[k]) > 1.0) throw InputError("kernel points must lie in [-1,1]^n");
    double v = 1.0;
    for (int k = 0; k < spec.dim(); ++k) {
        const auto& lam = spec.lambdas(k);
        const int r = spec.r()[k];
        auto tx = cheb::values(x[k], r), ty = cheb::values(y[k], r);
        double s = 1.0;
        for (int i = 1; i <= r; ++i) s += 2.0 * lam[i] * tx[i] * ty[i];
        v *= s;
    }
    return v;
}

// The same kernel as a direct sum over I <= r (used as a cross-check).
inline double kernel_eval_direct(const JacksonSpec& spec, const std::vector<double>& x, const std::vector<double>& y) {
    const int n = spec.dim();
    MultiIndex I(static_cast<std::size_t>(n), 0);
    double s = 0.0;
    while (true) {
        double term = std::ldexp(spec.lambda_multi(I), hamming(I));
        for (int k = 0; k < n; ++k) term *= std::cos(I[k] * std::acos(x[k])) * std::cos(I[k] * std::acos(y[k]));
        s += term;
        int k = 0;
        while (k < n && I[k] == spec.r()[k]) I[k++] = 0;
        if (k == n) break;
        ++I[k];
    }
    return s;
}

struct PerturbationBound {
    double bound = 0.0;
    double effcond_threshold = 0.0;  // 1/(2 pi^2 n)
};

// Bound on ||K^{-1} p - p||_inf for 0 <= p <= 1 on the box.
inline PerturbationBound inverse_perturbation_bound(const JacksonSpec& spec, const SparsePoly& p, int grid = 30,
                                                     double tol = 1e-9) {
    const SparsePoly c = to_chebyshev(p);
    detail::check_in_spec(spec, c);
    const int n = c.dim();
    PerturbationBound out;
    out.effcond_threshold = 1.0 / (2.0 * cheb::pi * cheb::pi * n);

    const auto dd = degree_data(c);
    if (!dd.support_vars.empty()) {
        auto g = grid_values(c, dd.support_vars, grid);
        for (double v : g.values.data)
            if (v < -tol || v > 1.0 + tol)
                throw PreconditionError("RangeViolated", "p must satisfy 0 <= p <= 1 on the box (grid value " +
                                                              std::to_string(v) + ")");
    } else {
        double v = c.coeff(MultiIndex(static_cast<std::size_t>(n), 0));
        if (v < -tol || v > 1.0 + tol) throw PreconditionError("RangeViolated", "constant outside [0,1]");
    }

    double mx = 0.0;
    for (const auto& [I, a] : c.terms()) {
        double m = 0.0;
        for (int j = 0; j < n; ++j) {
            if (!I[j]) continue;
            double q = static_cast<double>(I[j]) * I[j] / ((spec.r()[j] + 2.0) * (spec.r()[j] + 2.0));
            if (q > out.effcond_threshold)
                throw EffcondViolated("index " + index_str(I) + ", variable " + std::to_string(j + 1) + ": " +
                                      std::to_string(q) + " > " + std::to_string(out.effcond_threshold));
            m = std::max(m, q);
        }
        mx = std::max(mx, std::pow(2.0, hamming(I) / 2.0) * m);
    }
    double prod = 1.0;
    for (int v : dd.fulldeg) prod *= v + 1;
    out.bound = 2.0 * n * cheb::pi * cheb::pi * prod * mx;
    return out;
}

} // namespace sparsepos
