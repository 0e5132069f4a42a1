#pragma once

// Univariate positivity: root finding, the Karlin-Shapley splitting of a
// nonnegative polynomial on an interval and the closed-form splitting of the
// Jackson kernel.

#include "sparsepos/chebyshev.hpp"
#include "sparsepos/errors.hpp"
#include "sparsepos/jackson.hpp"
#include "sparsepos/poly.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

namespace sparsepos {

namespace uni {

using Coeffs = std::vector<double>;  // Chebyshev coefficients on [-1,1]

inline Coeffs trim(Coeffs c, double rel = 1e-14) {
    double mx = 0.0;
    for (double v : c) mx = std::max(mx, std::abs(v));
    while (c.size() > 1 && std::abs(c.back()) <= rel * mx) c.pop_back();
    if (c.empty()) c.push_back(0.0);
    return c;
}

inline Coeffs add(Coeffs a, const Coeffs& b, double s = 1.0) {
    if (a.size() < b.size()) a.resize(b.size(), 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] += s * b[i];
    return a;
}

inline Coeffs scale(Coeffs a, double s) {
    for (double& v : a) v *= s;
    return a;
}

// multiplication by 1 - t^2 = (T_0 - T_2)/2
inline const Coeffs& g_box() {
    static const Coeffs g{0.5, 0.0, -0.5};
    return g;
}

inline double eval(const Coeffs& c, double t) { return cheb::clenshaw(c, t); }

// Roots of a Chebyshev series via the colleague matrix, Newton-polished.
inline std::vector<std::complex<double>> roots(const Coeffs& in) {
    const Coeffs c = trim(in);
    const int d = static_cast<int>(c.size()) - 1;
    std::vector<std::complex<double>> out;
    if (d <= 0) return out;
    if (d == 1) {
        out.emplace_back(-c[0] / c[1], 0.0);
        return out;
    }
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
    M(0, 1) = 1.0;
    for (int k = 1; k < d; ++k) {
        M(k, k - 1) = 0.5;
        if (k + 1 < d) M(k, k + 1) = 0.5;
    }
    for (int j = 0; j < d; ++j) M(d - 1, j) -= c[j] / (2.0 * c[d]);
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
    if (es.info() != Eigen::Success) throw NumericalFailure("colleague eigenvalue solve failed");
    const Coeffs dc = cheb::derivative(c);
    std::vector<long double> cl(c.begin(), c.end()), dl(dc.begin(), dc.end());
    for (int i = 0; i < d; ++i) {
        std::complex<long double> z(es.eigenvalues()[i].real(), es.eigenvalues()[i].imag());
        auto f = [&](std::complex<long double> x) { return cheb::clenshaw(cl, x); };
        long double best = std::abs(f(z));
        for (int it = 0; it < 8; ++it) {
            auto fp = cheb::clenshaw(dl, z);
            if (std::abs(fp) == 0.0L) break;
            auto zn = z - f(z) / fp;
            long double v = std::abs(f(zn));
            if (!(v < best)) break;
            best = v;
            z = zn;
        }
        out.emplace_back(static_cast<double>(z.real()), static_cast<double>(z.imag()));
    }
    return out;
}

// p = sum s0_i^2 + (1-t^2) sum s1_i^2 (even) or
// p = (1+t) sum s0_i^2 + (1-t) sum s1_i^2 (odd).
struct LukacsForm {
    bool odd = false;
    std::vector<Coeffs> s0, s1;
};

inline Coeffs sum_squares(const std::vector<Coeffs>& sq) {
    Coeffs out{0.0};
    for (const auto& q : sq) out = add(out, cheb::mul(q, q));
    return out;
}

inline Coeffs reconstruct(const LukacsForm& f) {
    if (!f.odd) return add(sum_squares(f.s0), cheb::mul(g_box(), sum_squares(f.s1)));
    return add(cheb::mul({1.0, 1.0}, sum_squares(f.s0)), cheb::mul({1.0, -1.0}, sum_squares(f.s1)));
}

// Box form: p = sum a_i^2 + (1-t^2) sum b_i^2. Odd forms gain one degree via
// 1 +- t = ((1 +- t)^2 + (1 - t^2)) / 2.
inline LukacsForm to_box(const LukacsForm& f) {
    if (!f.odd) return f;
    LukacsForm b;
    const double h = std::sqrt(0.5);
    for (const auto& q : f.s0) {
        b.s0.push_back(scale(cheb::mul({1.0, 1.0}, q), h));
        b.s1.push_back(scale(q, h));
    }
    for (const auto& q : f.s1) {
        b.s0.push_back(scale(cheb::mul({1.0, -1.0}, q), h));
        b.s1.push_back(scale(q, h));
    }
    return b;
}

struct SplitTolerances {
    double imag;      // |Im| below this counts as real
    double boundary;  // distance to +-1 snapped onto the endpoint
    double pair;      // max gap between two interior roots merged into a double root
};

// Lukacs split of a polynomial nonnegative on [-1,1].
inline LukacsForm lukacs_split(const Coeffs& in, const SplitTolerances& tol) {
    const Coeffs c = trim(in);
    const int d = static_cast<int>(c.size()) - 1;
    LukacsForm out;
    out.odd = d % 2 == 1;
    if (d == 0) {
        if (c[0] < 0) throw NumericalFailure("negative constant");
        out.s0.push_back({std::sqrt(c[0])});
        return out;
    }
    auto rts = roots(c);
    std::vector<Coeffs> quads;  // each nonnegative on [-1,1]
    std::vector<Coeffs> lins;   // each nonnegative on [-1,1]
    std::vector<double> interior;
    int pos = 0, neg = 0;
    for (const auto& z : rts) {
        const double scl = std::max(1.0, std::abs(z));
        if (z.imag() > tol.imag * scl) {
            ++pos;
            // (t - z)(t - conj z) = t^2 - 2 Re z t + |z|^2
            const double s = z.real(), n2 = std::norm(z);
            quads.push_back({n2 + 0.5, -2.0 * s, 0.5});
        } else if (z.imag() < -tol.imag * scl) {
            ++neg;
        } else {
            const double t = z.real();
            if (t > 1.0 + tol.boundary) lins.push_back({t, -1.0});
            else if (t < -1.0 - tol.boundary) lins.push_back({-t, 1.0});
            else if (t >= 1.0 - tol.boundary) lins.push_back({1.0, -1.0});
            else if (t <= -1.0 + tol.boundary) lins.push_back({1.0, 1.0});
            else interior.push_back(t);
        }
    }
    if (pos != neg) throw NumericalFailure("unpaired complex roots");
    std::sort(interior.begin(), interior.end());
    if (interior.size() % 2) throw NumericalFailure("odd number of interior roots");
    for (std::size_t i = 0; i < interior.size(); i += 2) {
        if (interior[i + 1] - interior[i] > tol.pair) throw NumericalFailure("simple interior root");
        const double m = 0.5 * (interior[i] + interior[i + 1]);
        quads.push_back({m * m + 0.5, -2.0 * m, 0.5});
    }
    std::sort(lins.begin(), lins.end(), [](const Coeffs& a, const Coeffs& b) {
        return std::abs(a[0] / a[1]) < std::abs(b[0] / b[1]);
    });
    for (std::size_t i = 0; i + 1 < lins.size(); i += 2) quads.push_back(cheb::mul(lins[i], lins[i + 1]));

    // multiply the Lukacs forms (A + i sqrt(g) B)
    Coeffs A{1.0}, B{0.0};
    for (auto q : quads) {
        q.resize(3, 0.0);
        const double q1 = q[0] + q[1] + q[2], qm1 = q[0] - q[1] + q[2], q0 = q[0] - q[2];
        const double nrm = std::max({q1, qm1, std::abs(q0), 1e-300});
        const double r1 = std::sqrt(std::max(q1, 0.0) / nrm), rm1 = std::sqrt(std::max(qm1, 0.0) / nrm);
        const double al = 0.5 * (r1 + rm1), be = 0.5 * (r1 - rm1);
        const double ga2 = q0 / nrm - be * be;
        if (ga2 < -1e-8) throw NumericalFailure("quadratic factor negative on the interval");
        const Coeffs A2{be, al}, B2{std::sqrt(std::max(ga2, 0.0))};
        Coeffs nA = add(cheb::mul(A, A2), cheb::mul(g_box(), cheb::mul(B, B2)), -1.0);
        Coeffs nB = add(cheb::mul(A, B2), cheb::mul(A2, B));
        A = std::move(nA);
        B = std::move(nB);
    }
    Coeffs F = add(cheb::mul(A, A), cheb::mul(g_box(), cheb::mul(B, B)));
    if (out.odd) {
        if (lins.size() % 2 != 1) throw NumericalFailure("odd degree without a linear factor");
        const Coeffs& l = lins.back();
        F = cheb::mul(F, l);
        F.resize(static_cast<std::size_t>(d) + 1, 0.0);
        const double s = c[d] / F[d];
        if (!(s > 0)) throw NumericalFailure("leading coefficient sign");
        const double ap = s * (l[0] + l[1]) / 2.0, bp = s * (l[0] - l[1]) / 2.0;  // l = ap(1+t) + bp(1-t)
        // l (A^2 + g B^2) = (1+t)[ap A^2 + bp ((1-t)B)^2] + (1-t)[bp A^2 + ap ((1+t)B)^2]
        const Coeffs Bm = cheb::mul({1.0, -1.0}, B), Bp = cheb::mul({1.0, 1.0}, B);
        out.s0 = {scale(A, std::sqrt(std::max(ap, 0.0))), scale(Bm, std::sqrt(std::max(bp, 0.0)))};
        out.s1 = {scale(A, std::sqrt(std::max(bp, 0.0))), scale(Bp, std::sqrt(std::max(ap, 0.0)))};
    } else {
        if (!lins.empty() && lins.size() % 2) throw NumericalFailure("even degree with an unpaired linear factor");
        F.resize(static_cast<std::size_t>(d) + 1, 0.0);
        const double s = c[d] / F[d];
        if (!(s > 0)) throw NumericalFailure("leading coefficient sign");
        out.s0 = {scale(A, std::sqrt(s))};
        out.s1 = {scale(B, std::sqrt(s))};
    }
    return out;
}

inline double relative_residual(const Coeffs& p, const Coeffs& q) {
    double mx = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < std::max(p.size(), q.size()); ++i) {
        double a = i < p.size() ? p[i] : 0.0, b = i < q.size() ? q[i] : 0.0;
        mx = std::max(mx, std::abs(a));
        diff = std::max(diff, std::abs(a - b));
    }
    return mx > 0 ? diff / mx : diff;
}

// Tries successively looser root classifications and keeps the best split.
inline LukacsForm lukacs_split_robust(const Coeffs& c, double* residual = nullptr) {
    static const SplitTolerances levels[] = {{1e-9, 1e-10, 1e-6}, {1e-6, 1e-7, 1e-3}, {1e-4, 1e-5, 3e-2}};
    LukacsForm best;
    double best_res = INFINITY;
    std::string last_err = "no attempt";
    for (const auto& t : levels) {
        try {
            LukacsForm f = lukacs_split(c, t);
            double r = relative_residual(c, reconstruct(f));
            if (r < best_res) {
                best_res = r;
                best = std::move(f);
            }
            if (r <= 1e-12) break;
        } catch (const NumericalFailure& e) {
            last_err = e.what();
        }
    }
    if (!(best_res <= 1e-6)) throw NumericalFailure("root pairing ill-conditioned (" + last_err + ")");
    if (residual) *residual = best_res;
    return best;
}

// Chebyshev-T coefficients of U_k.
inline Coeffs u_coeffs(int k) {
    Coeffs c(static_cast<std::size_t>(std::max(k, 0)) + 1, 0.0);
    if (k < 0) return {0.0};
    for (int j = k % 2; j <= k; j += 2) c[j] = j == 0 ? 1.0 : 2.0;
    return c;
}

inline std::vector<double> u_values(double z, int k) {
    std::vector<double> u(static_cast<std::size_t>(std::max(k, 0)) + 1);
    u[0] = 1.0;
    if (k >= 1) u[1] = 2.0 * z;
    for (int i = 2; i <= k; ++i) u[i] = 2.0 * z * u[i - 1] - u[i - 2];
    return u;
}

} // namespace uni

// Closed-form Lukacs split of the Jackson kernel J_r(z, .):
// even r gives A^2 + (1-y^2) B^2, odd r gives (1+y) P^2 + (1-y) Q^2.
inline uni::LukacsForm jackson_kernel_split(int r, double z) {
    using uni::Coeffs;
    uni::LukacsForm f;
    f.odd = r % 2 == 1;
    std::vector<double> a(static_cast<std::size_t>(r) + 1);
    double ss = 0.0;
    for (int j = 0; j <= r; ++j) {
        a[j] = std::sin(cheb::pi * (j + 1) / (r + 2));
        ss += a[j] * a[j];
    }
    const double c = 1.0 / std::sqrt(ss);
    if (!f.odd) {
        const int h = r / 2;
        const auto tz = cheb::values(z, h);
        const auto uz = uni::u_values(z, h);
        Coeffs A(static_cast<std::size_t>(h) + 1, 0.0), B{0.0};
        A[0] = c * a[h];
        const double sz = std::sqrt(std::max(0.0, 1.0 - z * z));
        for (int k = 1; k <= h; ++k) {
            A[k] = 2.0 * c * a[h + k] * tz[k];
            B = uni::add(B, uni::u_coeffs(k - 1), 2.0 * c * sz * a[h + k] * uz[k - 1]);
        }
        f.s0 = {A};
        f.s1 = {B};
    } else {
        const int h = (r - 1) / 2;
        const auto uz = uni::u_values(z, h);
        Coeffs P{0.0}, Q{0.0};
        for (int k = 0; k <= h; ++k) {
            const double vz = uz[k] - (k ? uz[k - 1] : 0.0);
            const double wz = uz[k] + (k ? uz[k - 1] : 0.0);
            const Coeffs vk = uni::add(uni::u_coeffs(k), uni::u_coeffs(k - 1), -1.0);
            const Coeffs wk = uni::add(uni::u_coeffs(k), uni::u_coeffs(k - 1));
            const double w = 2.0 * a[(r + 1) / 2 + k];
            P = uni::add(P, vk, w * vz);
            Q = uni::add(Q, wk, w * wz);
        }
        const double h2 = std::sqrt(0.5);
        f.s0 = {uni::scale(P, c * std::sqrt(std::max(0.0, (1.0 + z) / 2.0)) * h2)};
        f.s1 = {uni::scale(Q, c * std::sqrt(std::max(0.0, (1.0 - z) / 2.0)) * h2)};
    }
    return f;
}

// ---------- Karlin-Shapley on [a,b] ----------

struct KarlinShapley {
    bool odd = false;
    // even: p = sum s0^2 + (b-y)(y-a) sum s1^2; odd: p = (y-a) sum s0^2 + (b-y) sum s1^2
    std::vector<SparsePoly> sigma0, sigma1;  // squares, monomial basis in y
    double residual = 0.0;
};

namespace detail {

// Monomial coefficients of a univariate polynomial.
inline std::vector<double> mono_coeffs(const SparsePoly& p) {
    const SparsePoly m = to_monomial(p);
    std::vector<double> c(1, 0.0);
    for (const auto& [I, v] : m.terms()) {
        if (static_cast<std::size_t>(I[0]) >= c.size()) c.resize(static_cast<std::size_t>(I[0]) + 1, 0.0);
        c[I[0]] = v;
    }
    return c;
}

// Chebyshev coefficients in t of sum m_k (al t + be)^k.
inline uni::Coeffs compose_affine(const std::vector<double>& m, double al, double be) {
    uni::Coeffs r{m.back()};
    for (int k = static_cast<int>(m.size()) - 2; k >= 0; --k) {
        r = cheb::mul(r, {be, al});
        r[0] += m[k];
    }
    return r;
}

inline SparsePoly coeffs_to_poly(const uni::Coeffs& c, double al, double be, double s) {
    // t = (y - be)/al
    SparsePoly q(1, Basis::Chebyshev);
    for (std::size_t k = 0; k < c.size(); ++k) q.add_term({static_cast<int>(k)}, c[k]);
    auto mt = mono_coeffs(q);
    SparsePoly out(1, Basis::Monomial);
    std::vector<double> acc{0.0};
    for (int k = static_cast<int>(mt.size()) - 1; k >= 0; --k) {
        // acc = acc * (y - be)/al + mt[k]
        std::vector<double> nx(acc.size() + 1, 0.0);
        for (std::size_t i = 0; i < acc.size(); ++i) {
            nx[i + 1] += acc[i] / al;
            nx[i] -= acc[i] * be / al;
        }
        nx[0] += mt[k];
        acc.swap(nx);
    }
    for (std::size_t i = 0; i < acc.size(); ++i) out.add_term({static_cast<int>(i)}, s * acc[i]);
    return out.prune();
}

} // namespace detail

inline KarlinShapley karlin_shapley(const SparsePoly& p, double a, double b, double tol = 1e-10) {
    if (p.dim() != 1) throw DimensionMismatch("karlin_shapley expects a univariate polynomial");
    if (!(a < b)) throw InputError("karlin_shapley needs a < b");
    const double al = (b - a) / 2.0, be = (a + b) / 2.0;
    const uni::Coeffs c = uni::trim(detail::compose_affine(detail::mono_coeffs(p), al, be));
    double scale = 0.0;
    for (double v : c) scale += std::abs(v);
    const int d = static_cast<int>(c.size()) - 1;
    const auto pts = cheb::lobatto_points(std::max(200, 20 * (d + 1)));
    for (double t : pts) {
        const double v = uni::eval(c, t);
        if (v < -tol * std::max(scale, 1e-300))
            throw NegativeOnInterval("p(" + std::to_string(al * t + be) + ") = " + std::to_string(v));
    }
    KarlinShapley ks;
    uni::LukacsForm f = uni::lukacs_split_robust(c, &ks.residual);
    ks.odd = f.odd;
    // even: (1-t^2) = (b-y)(y-a)/al^2; odd: (1+t) = (y-a)/al, (1-t) = (b-y)/al
    const double s0 = 1.0, s1 = f.odd ? 1.0 / std::sqrt(al) : 1.0 / al;
    const double s0o = f.odd ? 1.0 / std::sqrt(al) : s0;
    for (const auto& q : f.s0) {
        auto sp = detail::coeffs_to_poly(q, al, be, s0o);
        if (!sp.is_zero()) ks.sigma0.push_back(sp);
    }
    for (const auto& q : f.s1) {
        auto sp = detail::coeffs_to_poly(q, al, be, s1);
        if (!sp.is_zero()) ks.sigma1.push_back(sp);
    }
    // residual in the original variable
    SparsePoly rec(1, Basis::Monomial);
    const SparsePoly y = SparsePoly::variable(1, 0);
    SparsePoly g0 = ks.odd ? y + (-a) : SparsePoly::constant(1, 1.0);
    SparsePoly g1 = ks.odd ? (-1.0) * y + b : ((-1.0) * y + b) * (y + (-a));
    for (const auto& q : ks.sigma0) rec = rec + g0 * (q * q);
    for (const auto& q : ks.sigma1) rec = rec + g1 * (q * q);
    const SparsePoly pm = to_monomial(p);
    double mx = pm.max_abs_coeff(), diff = (rec - pm).max_abs_coeff();
    ks.residual = mx > 0 ? diff / mx : diff;
    return ks;
}

} // namespace sparsepos
