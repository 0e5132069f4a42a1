#pragma once

// Univariate Chebyshev helpers and dense tensor kernels shared by the
// polynomial, approximation and certificate code.

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace sparsepos::cheb {

inline constexpr double pi = std::numbers::pi;

// T_0(x) .. T_d(x) by the three-term recurrence.
inline std::vector<double> values(double x, int d) {
    std::vector<double> t(static_cast<std::size_t>(d) + 1);
    t[0] = 1.0;
    if (d >= 1) t[1] = x;
    for (int k = 2; k <= d; ++k) t[k] = 2.0 * x * t[k - 1] - t[k - 2];
    return t;
}

// Clenshaw evaluation of sum c_k T_k(x).
template <class T, class C>
T clenshaw(const std::vector<C>& c, T x) {
    T b1 = 0, b2 = 0;
    for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k) {
        T b0 = T(c[k]) + T(2) * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return (c.empty() ? T(0) : T(c[0])) + x * b1 - b2;
}

// Chebyshev-Lobatto points (extrema of T_{m-1}), ascending, endpoints included.
inline std::vector<double> lobatto_points(int m) {
    std::vector<double> x(static_cast<std::size_t>(m));
    if (m == 1) {
        x[0] = 0.0;
        return x;
    }
    for (int j = 0; j < m; ++j) x[j] = -std::cos(pi * j / (m - 1));
    // exact symmetry keeps grids reproducible
    for (int j = 0; j < m / 2; ++j) x[m - 1 - j] = -x[j];
    if (m % 2 == 1) x[m / 2] = 0.0;
    return x;
}

// Gauss-Chebyshev nodes (zeros of T_m), ascending.
inline std::vector<double> gauss_points(int m) {
    std::vector<double> x(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) x[j] = -std::cos((2.0 * j + 1.0) * pi / (2.0 * m));
    for (int j = 0; j < m / 2; ++j) x[m - 1 - j] = -x[j];
    if (m % 2 == 1) x[m / 2] = 0.0;
    return x;
}

// Vandermonde-type matrix V(i, k) = T_k(x_i).
inline Eigen::MatrixXd eval_matrix(const std::vector<double>& x, int d) {
    Eigen::MatrixXd V(static_cast<Eigen::Index>(x.size()), d + 1);
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto t = values(x[i], d);
        for (int k = 0; k <= d; ++k) V(static_cast<Eigen::Index>(i), k) = t[k];
    }
    return V;
}

// Maps samples at the m Lobatto points to the coefficients of the
// degree m-1 interpolant (DCT-I).
inline Eigen::MatrixXd lobatto_interp_matrix(int m) {
    Eigen::MatrixXd A(m, m);
    if (m == 1) {
        A(0, 0) = 1.0;
        return A;
    }
    const int N = m - 1;
    auto x = lobatto_points(m);
    for (int k = 0; k <= N; ++k) {
        for (int j = 0; j <= N; ++j) {
            double w = (j == 0 || j == N) ? 0.5 : 1.0;
            double t = std::cos(k * std::acos(std::clamp(x[j], -1.0, 1.0)));
            A(k, j) = 2.0 / N * w * t;
        }
        if (k == 0 || k == N) A.row(k) *= 0.5;
    }
    return A;
}

// Product of two univariate Chebyshev series.
inline std::vector<double> mul(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> c(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) {
            double h = 0.5 * a[i] * b[j];
            c[i + j] += h;
            c[i > j ? i - j : j - i] += h;
        }
    }
    return c;
}

// Derivative of a univariate Chebyshev series.
inline std::vector<double> derivative(const std::vector<double>& c) {
    int n = static_cast<int>(c.size()) - 1;
    if (n <= 0) return {0.0};
    std::vector<double> d(static_cast<std::size_t>(n) + 2, 0.0);
    for (int k = n - 1; k >= 0; --k) d[k] = d[k + 2] + 2.0 * (k + 1) * c[k + 1];
    d[0] *= 0.5;
    d.resize(static_cast<std::size_t>(n));
    return d;
}

// ----- dense tensors (row-major, last mode fastest) -----

struct Tensor {
    std::vector<int> ext;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> e) : ext(std::move(e)) { data.assign(count(ext), 0.0); }

    static std::size_t count(const std::vector<int>& e) {
        std::size_t n = 1;
        for (int v : e) n *= static_cast<std::size_t>(v);
        return n;
    }
    std::size_t size() const { return data.size(); }
    int rank() const { return static_cast<int>(ext.size()); }

    std::size_t offset(const std::vector<int>& idx) const {
        std::size_t o = 0;
        for (std::size_t k = 0; k < ext.size(); ++k) o = o * static_cast<std::size_t>(ext[k]) + static_cast<std::size_t>(idx[k]);
        return o;
    }
    void unravel(std::size_t o, std::vector<int>& idx) const {
        idx.resize(ext.size());
        for (std::size_t k = ext.size(); k-- > 0;) {
            idx[k] = static_cast<int>(o % static_cast<std::size_t>(ext[k]));
            o /= static_cast<std::size_t>(ext[k]);
        }
    }
};

// out = in x_mode M, where M maps extent ext[mode] to M.rows().
inline Tensor mode_product(const Tensor& in, int mode, const Eigen::MatrixXd& M) {
    assert(M.cols() == in.ext[mode]);
    std::size_t pre = 1, post = 1;
    for (int k = 0; k < mode; ++k) pre *= static_cast<std::size_t>(in.ext[k]);
    for (int k = mode + 1; k < in.rank(); ++k) post *= static_cast<std::size_t>(in.ext[k]);
    const std::size_t nin = static_cast<std::size_t>(in.ext[mode]);
    const std::size_t nout = static_cast<std::size_t>(M.rows());
    std::vector<int> e = in.ext;
    e[mode] = static_cast<int>(nout);
    Tensor out(e);
    for (std::size_t p = 0; p < pre; ++p) {
        const double* src = in.data.data() + p * nin * post;
        double* dst = out.data.data() + p * nout * post;
        for (std::size_t i = 0; i < nout; ++i) {
            double* drow = dst + i * post;
            for (std::size_t j = 0; j < nin; ++j) {
                double m = M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (m == 0.0) continue;
                const double* srow = src + j * post;
                for (std::size_t q = 0; q < post; ++q) drow[q] += m * srow[q];
            }
        }
    }
    return out;
}

// Values of a dense coefficient tensor on a tensor grid (one point list per mode).
inline Tensor evaluate_on_grid(const Tensor& coeffs, const std::vector<std::vector<double>>& pts) {
    Tensor t = coeffs;
    for (int k = 0; k < coeffs.rank(); ++k) t = mode_product(t, k, eval_matrix(pts[k], coeffs.ext[k] - 1));
    return t;
}

// Ehlich-Zeller factor: sup over [-1,1] of a degree-d polynomial is at most
// this times its max over m >= d+1 Gauss-Chebyshev nodes.
inline double ez_factor(int d, int m) {
    if (d <= 0) return 1.0;
    return 1.0 / std::cos(pi * d / (2.0 * m));
}

} // namespace sparsepos::cheb
