#pragma once

#include "sparsepos/chebyshev.hpp"
#include "sparsepos/errors.hpp"
#include "sparsepos/jackson.hpp"
#include "sparsepos/poly.hpp"
#include "sparsepos/sos.hpp"
#include "sparsepos/sparsity.hpp"
#include "sparsepos/univariate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <cmath>
#include <string>
#include <vector>

namespace sparsepos {

struct CertEntry {
    int clique = 0;
    std::vector<int> K;  // box generators (sorted); for Ball the clique variables
    Generator gen = Generator::Box;
    SosPoly sigma;
};

struct Certificate {
    int n = 0;
    std::vector<Clique> cliques;
    std::vector<MultiIndex> r_used;  // per clique, length n
    std::vector<CertEntry> entries;
    SparsePoly target;
    double residual = 0.0;
    double clamp_mass = 0.0;
    Generator generators = Generator::Box;

    std::size_t square_count() const {
        std::size_t s = 0;
        for (const auto& e : entries) s += e.sigma.count();
        return s;
    }
};

struct VerifyReport {
    bool pass = false;
    double residual = 0.0;
    bool support_ok = true;
    bool degree_ok = true;
    std::size_t entries = 0;
    std::size_t squares = 0;
    std::vector<std::string> issues;
};

inline SparsePoly entry_polynomial(const CertEntry& e, int n) {
    auto dp = sos_times_generator(e.sigma, e.gen, e.K);
    return from_dense(n, dp.vars, dp.t);
}

inline VerifyReport verify(const Certificate& c, double tol = 1e-6) {
    VerifyReport r;
    r.entries = c.entries.size();
    std::map<MultiIndex, long double> acc;
    for (std::size_t i = 0; i < c.entries.size(); ++i) {
        const auto& e = c.entries[i];
        r.squares += e.sigma.count();
        if (e.clique < 0 || e.clique >= static_cast<int>(c.cliques.size())) {
            r.support_ok = false;
            r.issues.push_back("entry " + std::to_string(i) + ": clique index out of range");
            continue;
        }
        const Clique& J = c.cliques[e.clique];
        if (e.sigma.dim != c.n) {
            r.support_ok = false;
            r.issues.push_back("entry " + std::to_string(i) + ": dimension mismatch");
            continue;
        }
        const SparsePoly p = entry_polynomial(e, c.n);
        if (!is_subset(e.K, J) || !support_within(p, J)) {
            r.support_ok = false;
            r.issues.push_back("entry " + std::to_string(i) + ": support leaves clique " + clique_str(J));
        }
        const auto fd = fulldeg(p);
        if (e.clique < static_cast<int>(c.r_used.size()) && !index_leq(fd, c.r_used[e.clique])) {
            r.degree_ok = false;
            r.issues.push_back("entry " + std::to_string(i) + ": fulldeg " + index_str(fd) + " exceeds r_used " +
                               index_str(c.r_used[e.clique]));
        }
        for (const auto& [I, v] : p.terms()) acc[I] += v;
    }
    const SparsePoly t = to_chebyshev(c.target);
    double tmax = t.max_abs_coeff(), diff = 0.0;
    for (const auto& [I, v] : t.terms()) acc[I] -= v;
    for (const auto& [I, v] : acc) diff = std::max(diff, static_cast<double>(std::abs(v)));
    r.residual = tmax > 0 ? diff / tmax : diff;
    r.pass = r.support_ok && r.degree_ok && r.residual <= tol;
    return r;
}

namespace detail {

// Gram matrix over the tensor basis from a node-indexed tensor of weights and
// per-mode node->pair-index matrices (rows (d+1)^2, column per node).
inline Eigen::MatrixXd tensor_gram(const cheb::Tensor& weights, const std::vector<Eigen::MatrixXd>& M,
                                   const std::vector<int>& ext) {
    cheb::Tensor t = weights;
    for (int k = 0; k < t.rank(); ++k) t = cheb::mode_product(t, k, M[k]);
    std::size_t N = cheb::Tensor::count(ext);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    std::vector<int> idx, a(ext.size()), b(ext.size());
    cheb::Tensor shape(ext);
    for (std::size_t o = 0; o < t.size(); ++o) {
        if (t.data[o] == 0.0) continue;
        t.unravel(o, idx);
        for (std::size_t k = 0; k < ext.size(); ++k) {
            a[k] = idx[k] / ext[k];
            b[k] = idx[k] % ext[k];
        }
        G(static_cast<Eigen::Index>(shape.offset(a)), static_cast<Eigen::Index>(shape.offset(b))) = t.data[o];
    }
    return G;
}

// Rows of an explicit square root of a PSD Gram matrix (pivoted LDL^T).
inline Eigen::MatrixXd gram_rows(const Eigen::MatrixXd& G) {
    const Eigen::MatrixXd S = 0.5 * (G + G.transpose());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    Eigen::VectorXd D = ldlt.vectorD();
    const double dmax = D.cwiseAbs().maxCoeff();
    // exactly dependent columns leave pivots that are negative only at rounding level
    if (ldlt.info() != Eigen::Success && D.minCoeff() < -1e-12 * dmax) throw NumericalFailure("Gram factorization failed");
    Eigen::MatrixXd L = ldlt.matrixL();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < D.size(); ++i)
        if (D(i) > 1e-18 * dmax) keep.push_back(i);
    Eigen::MatrixXd X(S.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) X.col(static_cast<Eigen::Index>(j)) = L.col(keep[j]) * std::sqrt(D(keep[j]));
    X = ldlt.transpositionsP().transpose() * X;
    return X.transpose();
}

inline MultiIndex even_up(const JacksonSpec& spec) {
    MultiIndex r = spec.r();
    for (int& v : r) v += v % 2;
    return r;
}

} // namespace detail

// Certificate that K_r(q) lies in the box preordering truncated at r (odd
// entries of r are rounded up to the next even degree).
inline Certificate kernel_certificate(const SparsePoly& q, const JacksonSpec& spec, double tol = 1e-10) {
    const int n = q.dim();
    if (spec.dim() != n) throw DimensionMismatch("spec dimension differs from polynomial");
    const SparsePoly qc = to_chebyshev(q);
    const std::vector<int> vars = spec.active_vars();
    Certificate cert;
    cert.n = n;
    cert.r_used = {detail::even_up(spec)};
    const auto dd = degree_data(qc);
    cert.cliques = {vars.empty() ? (dd.support_vars.empty() ? Clique{0} : Clique(dd.support_vars)) : Clique(vars)};
    cert.target = jackson_apply(spec, qc);  // also checks q in Poly(J, r)

    if (dd.support_vars.empty()) {
        const double c0 = qc.coeff(MultiIndex(static_cast<std::size_t>(n), 0));
        if (c0 < -tol) throw NegativeNodeValue("constant q = " + std::to_string(c0));
        CertEntry e;
        e.sigma = SosPoly(n, {}, {});
        if (c0 > 0) {
            e.sigma.Q.resize(1, 1);
            e.sigma.Q(0, 0) = std::sqrt(c0);
        } else {
            cert.clamp_mass = std::abs(c0);
        }
        cert.entries.push_back(std::move(e));
        cert.residual = verify(cert).residual;
        return cert;
    }

    const std::size_t J = vars.size();
    std::vector<std::vector<double>> nodes(J);
    std::vector<int> dA(J, 0), dB(J, 0), qext(J);
    std::vector<std::vector<uni::LukacsForm>> split(J);
    for (std::size_t k = 0; k < J; ++k) {
        const int r = spec.r()[vars[k]];
        nodes[k] = cheb::gauss_points(r + 1);
        for (double z : nodes[k]) {
            auto f = uni::to_box(jackson_kernel_split(r, z));
            for (const auto& s : f.s0) dA[k] = std::max(dA[k], static_cast<int>(s.size()) - 1);
            for (const auto& s : f.s1) dB[k] = std::max(dB[k], static_cast<int>(s.size()) - 1);
            split[k].push_back(std::move(f));
        }
        qext[k] = dd.fulldeg[vars[k]] + 1;
    }

    // node weights c_i = w_i q(z_i)
    cheb::Tensor cw = cheb::evaluate_on_grid(to_dense(qc, vars, qext), nodes);
    double wsum = 1.0;
    for (const auto& z : nodes) wsum /= static_cast<double>(z.size());
    const double scale = std::max(qc.sum_abs_coeff(), 1e-300);
    std::vector<int> idx;
    for (std::size_t o = 0; o < cw.size(); ++o) {
        double v = cw.data[o];
        if (v < -tol * scale) {
            cw.unravel(o, idx);
            std::string at = "(";
            for (std::size_t k = 0; k < J; ++k) at += (k ? "," : "") + std::to_string(nodes[k][idx[k]]);
            throw NegativeNodeValue("q" + at + ") = " + std::to_string(v));
        }
        if (v < 0) {
            cert.clamp_mass += -v * wsum;
            v = 0.0;
        }
        cw.data[o] = v * wsum;
    }

    // per-mode node -> flattened outer products
    auto outer = [](const std::vector<uni::Coeffs>& sq, int d) {
        Eigen::VectorXd m = Eigen::VectorXd::Zero((d + 1) * (d + 1));
        for (const auto& s : sq)
            for (std::size_t a = 0; a < s.size(); ++a)
                for (std::size_t b = 0; b < s.size(); ++b) m(static_cast<Eigen::Index>(a * (d + 1) + b)) += s[a] * s[b];
        return m;
    };
    std::vector<Eigen::MatrixXd> MA(J), MB(J);
    for (std::size_t k = 0; k < J; ++k) {
        const Eigen::Index nk = static_cast<Eigen::Index>(nodes[k].size());
        MA[k].resize((dA[k] + 1) * (dA[k] + 1), nk);
        MB[k].resize((dB[k] + 1) * (dB[k] + 1), nk);
        for (Eigen::Index i = 0; i < nk; ++i) {
            MA[k].col(i) = outer(split[k][i].s0, dA[k]);
            MB[k].col(i) = outer(split[k][i].s1, dB[k]);
        }
    }

    for (std::uint32_t mask = 0; mask < (1u << J); ++mask) {
        std::vector<Eigen::MatrixXd> M(J);
        std::vector<int> ext(J), deg(J);
        std::vector<int> K;
        for (std::size_t k = 0; k < J; ++k) {
            const bool inK = mask >> k & 1u;
            M[k] = inK ? MB[k] : MA[k];
            deg[k] = inK ? dB[k] : dA[k];
            ext[k] = deg[k] + 1;
            if (inK) K.push_back(vars[k]);
        }
        Eigen::MatrixXd G = detail::tensor_gram(cw, M, ext);
        if (G.cwiseAbs().maxCoeff() == 0.0) continue;
        CertEntry e;
        e.clique = 0;
        e.K = K;
        e.gen = Generator::Box;
        e.sigma = SosPoly(n, vars, deg);
        e.sigma.Q = detail::gram_rows(G);
        if (e.sigma.Q.rows() == 0) continue;
        cert.entries.push_back(std::move(e));
    }
    cert.residual = verify(cert).residual;
    return cert;
}

namespace detail {

// Rows of sigma multiplied by sqrt(c) x^beta, laid out over `vars` with degrees `deg`.
inline Eigen::MatrixXd shifted_rows(const SosPoly& s, const std::vector<int>& vars, const std::vector<int>& beta,
                                    const std::vector<int>& deg, double c) {
    std::vector<int> ext{static_cast<int>(s.Q.rows())};
    std::vector<int> sd;
    for (int v : vars) {
        auto it = std::find(s.vars.begin(), s.vars.end(), v);
        sd.push_back(it == s.vars.end() ? 0 : s.deg[static_cast<std::size_t>(it - s.vars.begin())]);
        ext.push_back(sd.back() + 1);
    }
    cheb::Tensor t(ext);
    // Q is column-major in Eigen; copy row by row into the row-major tensor
    const std::size_t N = s.columns();
    for (Eigen::Index i = 0; i < s.Q.rows(); ++i)
        for (std::size_t o = 0; o < N; ++o) t.data[static_cast<std::size_t>(i) * N + o] = s.Q(i, static_cast<Eigen::Index>(o));
    for (std::size_t k = 0; k < vars.size(); ++k) {
        Eigen::MatrixXd M = xpow_matrix(sd[k] + 1, beta[k]);
        Eigen::MatrixXd P = Eigen::MatrixXd::Zero(deg[k] + 1, sd[k] + 1);
        P.topRows(M.rows()) = M;
        t = cheb::mode_product(t, static_cast<int>(k) + 1, P);
    }
    const std::size_t No = t.size() / static_cast<std::size_t>(std::max<Eigen::Index>(s.Q.rows(), 1));
    Eigen::MatrixXd out(s.Q.rows(), static_cast<Eigen::Index>(No));
    for (Eigen::Index i = 0; i < s.Q.rows(); ++i)
        for (std::size_t o = 0; o < No; ++o) out(i, static_cast<Eigen::Index>(o)) = std::sqrt(c) * t.data[static_cast<std::size_t>(i) * No + o];
    return out;
}

struct Multiplier {
    std::vector<int> beta;  // over the clique variables
    double c;
};

// prod_{k in K}(1 - a_k) = g tau_K + rho_K with a_k = x_k^2 and g = 1 - sum_J a_v;
// both sides returned as lists of weighted squared monomials x^beta.
inline void ball_identity(const Clique& J, const std::vector<int>& K, std::vector<Multiplier>& tau,
                          std::vector<Multiplier>& rho) {
    const std::size_t nk = K.size();
    auto pos = [&](int v) { return static_cast<std::size_t>(std::find(J.begin(), J.end(), v) - J.begin()); };
    for (std::uint32_t S = 0; S < (1u << nk); ++S) {
        const int sz = std::popcount(S);
        std::vector<int> b(J.size(), 0);
        for (std::size_t t = 0; t < nk; ++t)
            if (S >> t & 1u) b[pos(K[t])] = 1;
        if (sz % 2 == 0) {
            tau.push_back({b, 1.0});
            for (int v : J)
                if (!std::binary_search(K.begin(), K.end(), v)) {
                    auto bv = b;
                    bv[pos(v)] += 1;
                    rho.push_back({bv, 1.0});
                }
            if (sz > 0)
                for (std::size_t t = 0; t < nk; ++t)
                    if (S >> t & 1u) {
                        auto bk = b;
                        bk[pos(K[t])] = 2;
                        rho.push_back({bk, 1.0});
                    }
        } else if (sz >= 3) {
            rho.push_back({b, static_cast<double>(sz - 1)});
        }
    }
}

} // namespace detail

// Rewrites box-generator products into squares plus multiples of the ball
// generator 1 - sum_{i in J} x_i^2; declared degrees grow by 2.
inline Certificate preordering_to_qm(const Certificate& cert) {
    if (cert.generators != Generator::Box) throw InputError("certificate already uses the ball generator");
    Certificate out;
    out.n = cert.n;
    out.cliques = cert.cliques;
    out.r_used = cert.r_used;
    out.target = cert.target;
    out.clamp_mass = cert.clamp_mass;
    out.generators = Generator::Ball;
    const int n = cert.n;
    for (std::size_t j = 0; j < cert.cliques.size(); ++j) {
        const Clique& J = cert.cliques[j];
        std::vector<std::pair<const SosPoly*, detail::Multiplier>> ball, plain;
        bool rewritten = false;
        for (const auto& e : cert.entries) {
            if (e.clique != static_cast<int>(j)) continue;
            if (e.K.empty()) {
                out.entries.push_back(e);
                continue;
            }
            if (J.size() == 1) {
                CertEntry b = e;
                b.gen = Generator::Ball;
                b.K = J;
                out.entries.push_back(std::move(b));
                continue;
            }
            rewritten = true;
            std::vector<detail::Multiplier> tau, rho;
            detail::ball_identity(J, e.K, tau, rho);
            for (auto& m : tau) ball.emplace_back(&e.sigma, m);
            for (auto& m : rho) plain.emplace_back(&e.sigma, m);
        }
        auto build = [&](const std::vector<std::pair<const SosPoly*, detail::Multiplier>>& parts, Generator gen) {
            std::vector<int> deg(J.size(), 0);
            std::size_t rows = 0;
            for (const auto& [s, m] : parts) {
                rows += s->count();
                for (std::size_t k = 0; k < J.size(); ++k) {
                    auto it = std::find(s->vars.begin(), s->vars.end(), J[k]);
                    int d = it == s->vars.end() ? 0 : s->deg[static_cast<std::size_t>(it - s->vars.begin())];
                    deg[k] = std::max(deg[k], d + m.beta[k]);
                }
            }
            CertEntry e;
            e.clique = static_cast<int>(j);
            e.gen = gen;
            e.K = gen == Generator::Ball ? J : std::vector<int>{};
            e.sigma = SosPoly(n, J, deg);
            e.sigma.Q.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(e.sigma.columns()));
            Eigen::Index at = 0;
            for (const auto& [s, m] : parts) {
                if (s->count() == 0) continue;
                Eigen::MatrixXd r = detail::shifted_rows(*s, J, m.beta, deg, m.c);
                e.sigma.Q.middleRows(at, r.rows()) = r;
                at += r.rows();
            }
            // stacking multipliers can leave far more rows than basis columns
            if (e.sigma.Q.rows() > e.sigma.Q.cols()) {
                Eigen::MatrixXd G = detail::gram_lower(e.sigma.Q);
                G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
                e.sigma.Q = detail::gram_rows(G);
            }
            out.entries.push_back(std::move(e));
        };
        if (!ball.empty()) build(ball, Generator::Ball);
        if (!plain.empty()) build(plain, Generator::Box);
        if (rewritten)
            for (int v : J) out.r_used[j][v] += 2;
    }
    out.residual = verify(out).residual;
    return out;
}

} // namespace sparsepos
