#pragma once

#include "sparsepos/chebyshev.hpp"
#include "sparsepos/errors.hpp"
#include "sparsepos/poly.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace sparsepos {

// Sum of squares stored densely: row i of Q holds the Chebyshev coefficients
// of q_i over the tensor basis T_a(x_vars), a <= deg.
struct SosPoly {
    int dim = 0;
    std::vector<int> vars;  // sorted global variable indices
    std::vector<int> deg;   // per-variable degree bound of each q_i
    Eigen::MatrixXd Q;

    SosPoly() = default;
    SosPoly(int n, std::vector<int> v, std::vector<int> d) : dim(n), vars(std::move(v)), deg(std::move(d)) {
        Q.resize(0, static_cast<Eigen::Index>(columns()));
    }

    std::vector<int> extents() const {
        std::vector<int> e;
        for (int d : deg) e.push_back(d + 1);
        return e;
    }
    std::size_t columns() const { return cheb::Tensor::count(extents()); }
    std::size_t count() const { return static_cast<std::size_t>(Q.rows()); }

    SparsePoly square(std::size_t i) const {
        cheb::Tensor t(extents());
        for (std::size_t o = 0; o < t.size(); ++o) t.data[o] = Q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(o));
        return from_dense(dim, vars, t);
    }
    std::vector<SparsePoly> squares() const {
        std::vector<SparsePoly> out;
        for (std::size_t i = 0; i < count(); ++i) out.push_back(square(i));
        return out;
    }

    void append_rows(const Eigen::MatrixXd& rows) {
        if (rows.cols() != Q.cols()) throw InputError("SosPoly row width mismatch");
        Eigen::MatrixXd n(Q.rows() + rows.rows(), Q.cols());
        n << Q, rows;
        Q.swap(n);
    }

    static SosPoly from_polys(int n, const std::vector<SparsePoly>& qs) {
        std::vector<int> vars;
        std::vector<int> fd(static_cast<std::size_t>(n), 0);
        for (const auto& q : qs) {
            if (q.dim() != n) throw DimensionMismatch("square dimension");
            auto d = fulldeg(to_chebyshev(q));
            for (int k = 0; k < n; ++k) fd[k] = std::max(fd[k], d[k]);
        }
        for (int k = 0; k < n; ++k)
            if (fd[k] > 0) vars.push_back(k);
        std::vector<int> deg;
        for (int v : vars) deg.push_back(fd[v]);
        SosPoly s(n, vars, deg);
        s.Q.resize(static_cast<Eigen::Index>(qs.size()), static_cast<Eigen::Index>(s.columns()));
        for (std::size_t i = 0; i < qs.size(); ++i) {
            auto t = to_dense(qs[i], vars, s.extents());
            for (std::size_t o = 0; o < t.size(); ++o) s.Q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(o)) = t.data[o];
        }
        return s;
    }
};

namespace detail {

// Q^T Q via a symmetric rank update; only the lower triangle is filled
inline Eigen::MatrixXd gram_lower(const Eigen::MatrixXd& Q) {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(Q.cols(), Q.cols());
    G.selfadjointView<Eigen::Lower>().rankUpdate(Q.transpose());
    return G;
}

// Expansion of sum q_i^2 as a dense Chebyshev tensor with extents 2*deg+1.
inline cheb::Tensor expand_dense(const SosPoly& s) {
    std::vector<int> oext;
    for (int d : s.deg) oext.push_back(2 * d + 1);
    cheb::Tensor out(oext);
    if (s.Q.rows() == 0) return out;
    const Eigen::MatrixXd G = gram_lower(s.Q);
    const std::size_t N = s.columns();
    const std::size_t nv = s.vars.size();
    std::vector<std::vector<int>> dig(N);
    cheb::Tensor shape(s.extents());
    for (std::size_t o = 0; o < N; ++o) shape.unravel(o, dig[o]);
    std::vector<std::size_t> stride(nv, 1);
    for (std::size_t k = nv; k-- > 1;) stride[k - 1] = stride[k] * static_cast<std::size_t>(oext[k]);
    std::vector<std::size_t> hi(nv), lo(nv);
    for (std::size_t a = 0; a < N; ++a) {
        const auto& da = dig[a];
        for (std::size_t b = a; b < N; ++b) {
            // G is symmetric: visit each unordered pair once
            double w = G(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
            if (w == 0.0) continue;
            if (b != a) w *= 2.0;
            const auto& db = dig[b];
            // T_a T_b = prod_k (T_{a+b} + T_{|a-b|}) / 2, with T_0 T_b = T_b
            std::size_t base = 0, ns = 0;
            for (std::size_t k = 0; k < nv; ++k) {
                if (da[k] && db[k]) {
                    hi[ns] = static_cast<std::size_t>(da[k] + db[k]) * stride[k];
                    lo[ns] = static_cast<std::size_t>(std::abs(da[k] - db[k])) * stride[k];
                    ++ns;
                    w *= 0.5;
                } else {
                    base += static_cast<std::size_t>(da[k] + db[k]) * stride[k];
                }
            }
            for (std::uint32_t m = 0; m < (1u << ns); ++m) {
                std::size_t o = base;
                for (std::size_t t = 0; t < ns; ++t) o += (m >> t & 1u) ? lo[t] : hi[t];
                out.data[o] += w;
            }
        }
    }
    return out;
}

// (1 - x^2) along one mode: extent grows by 2.
inline cheb::Tensor mul_box_mode(const cheb::Tensor& t, int mode) {
    const int e = t.ext[mode];
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(e + 2, e);
    for (int j = 0; j < e; ++j) {
        std::vector<double> u(static_cast<std::size_t>(j) + 1, 0.0);
        u[j] = 1.0;
        auto r = cheb::mul({0.5, 0.0, -0.5}, u);
        for (std::size_t i = 0; i < r.size(); ++i) M(static_cast<Eigen::Index>(i), j) = r[i];
    }
    return cheb::mode_product(t, mode, M);
}

// multiply by x^b along one mode
inline Eigen::MatrixXd xpow_matrix(int in_ext, int b) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(in_ext + b, in_ext);
    for (int j = 0; j < in_ext; ++j) {
        std::vector<double> u(static_cast<std::size_t>(j) + 1, 0.0);
        u[j] = 1.0;
        for (int s = 0; s < b; ++s) u = cheb::mul({0.0, 1.0}, u);
        for (std::size_t i = 0; i < u.size(); ++i) M(static_cast<Eigen::Index>(i), j) = u[i];
    }
    return M;
}

inline cheb::Tensor pad(const cheb::Tensor& t, const std::vector<int>& ext) {
    cheb::Tensor out(ext);
    std::vector<int> idx;
    for (std::size_t o = 0; o < t.size(); ++o) {
        if (t.data[o] == 0.0) continue;
        t.unravel(o, idx);
        out.data[out.offset(idx)] += t.data[o];
    }
    return out;
}

} // namespace detail

enum class Generator { Box, Ball };

// sigma * g where g is prod_{k in K}(1 - x_k^2) (Box) or 1 - sum_{v in ball_vars} x_v^2 (Ball).
// Returns a dense tensor over `vars` (the union of the SOS variables and the generator variables).
struct DenseProduct {
    std::vector<int> vars;
    cheb::Tensor t;
};

inline DenseProduct sos_times_generator(const SosPoly& s, Generator gen, const std::vector<int>& K) {
    std::vector<int> vars = s.vars;
    for (int k : K)
        if (!std::binary_search(s.vars.begin(), s.vars.end(), k)) vars.push_back(k);
    std::sort(vars.begin(), vars.end());
    cheb::Tensor e = detail::expand_dense(s);
    // re-embed over the enlarged variable list
    std::vector<int> ext;
    for (int v : vars) {
        auto it = std::find(s.vars.begin(), s.vars.end(), v);
        ext.push_back(it == s.vars.end() ? 1 : e.ext[static_cast<std::size_t>(it - s.vars.begin())]);
    }
    cheb::Tensor E(ext);
    E.data = e.data;  // same row-major layout; inserted modes have extent 1
    if (E.data.empty()) E.data.assign(cheb::Tensor::count(ext), 0.0);
    auto mode_of = [&](int v) { return static_cast<int>(std::find(vars.begin(), vars.end(), v) - vars.begin()); };
    if (gen == Generator::Box) {
        for (int k : K) E = detail::mul_box_mode(E, mode_of(k));
        return {vars, E};
    }
    // ball: (1 - |K|/2) E - 1/2 sum_k T_2(x_k) E
    std::vector<int> big = E.ext;
    for (int k : K) big[mode_of(k)] += 2;
    cheb::Tensor out = detail::pad(E, big);
    for (double& v : out.data) v *= 1.0 - 0.5 * static_cast<double>(K.size());
    for (int k : K) {
        const int m = mode_of(k);
        const int e0 = E.ext[m];
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(e0 + 2, e0);
        for (int j = 0; j < e0; ++j) {
            std::vector<double> u(static_cast<std::size_t>(j) + 1, 0.0);
            u[j] = 1.0;
            auto r = cheb::mul({0.0, 0.0, -0.5}, u);
            for (std::size_t i = 0; i < r.size(); ++i) M(static_cast<Eigen::Index>(i), j) = r[i];
        }
        cheb::Tensor part = cheb::mode_product(E, m, M);
        cheb::Tensor pp = detail::pad(part, big);
        for (std::size_t o = 0; o < pp.size(); ++o) out.data[o] += pp.data[o];
    }
    return {vars, out};
}

inline SparsePoly expand(const SosPoly& s) {
    return from_dense(s.dim, s.vars, detail::expand_dense(s));
}

} // namespace sparsepos
