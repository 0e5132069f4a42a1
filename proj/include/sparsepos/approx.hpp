#pragma once

#include "sparsepos/chebyshev.hpp"
#include "sparsepos/errors.hpp"
#include "sparsepos/jackson.hpp"
#include "sparsepos/poly.hpp"
#include "sparsepos/sparsity.hpp"
#include "sparsepos/univariate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace sparsepos {

inline constexpr double kDefaultCjac = 4.0;
inline constexpr double kLipSlack = 0.05;

// Values of a function on the tensor Lobatto grid over `vars`.
struct SampledFunction {
    int dim = 0;
    std::vector<int> vars;
    int nodes_per_dim = 1;
    cheb::Tensor values;
    std::vector<double> lip_per_var;  // aligned with vars
    double lip_estimate = 0.0;        // sum of lip_per_var
    double shift = 0.0;
    double slack = 0.0;  // certified bound on (computed min) - (true min)
};

namespace detail {

// Global minimum of a univariate Chebyshev series on [-1,1].
inline std::pair<double, double> min_1d(const uni::Coeffs& c) {
    auto f = [&](double t) { return cheb::clenshaw(c, t); };
    double bx = -1.0, bv = f(-1.0);
    auto consider = [&](double t) {
        double v = f(t);
        if (v < bv) {
            bv = v;
            bx = t;
        }
    };
    consider(1.0);
    if (c.size() >= 3) {
        for (const auto& z : uni::roots(cheb::derivative(c)))
            if (std::abs(z.imag()) < 1e-9 && std::abs(z.real()) <= 1.0) consider(z.real());
    }
    return {bx, bv};
}

// Coordinate descent with exact 1-D minimization on each slice of a dense
// Chebyshev coefficient tensor c; y holds the start point and the result.
inline double coordinate_descent(const cheb::Tensor& c, std::vector<double>& y, int sweeps = 50) {
    const int r = c.rank();
    auto value_at = [&](const std::vector<double>& pt) {
        std::vector<std::vector<double>> pts;
        for (double v : pt) pts.push_back({v});
        return cheb::evaluate_on_grid(c, pts).data[0];
    };
    double cur = value_at(y);
    for (int s = 0; s < sweeps; ++s) {
        double before = cur;
        for (int k = 0; k < r; ++k) {
            cheb::Tensor t = c;
            for (int j = 0; j < r; ++j)
                if (j != k) t = cheb::mode_product(t, j, cheb::eval_matrix({y[j]}, t.ext[j] - 1));
            auto [x, v] = min_1d(t.data);
            if (v < cur) {
                cur = v;
                y[k] = x;
            }
        }
        if (before - cur <= 1e-15 * (1.0 + std::abs(cur))) break;
    }
    return cur;
}

} // namespace detail

// g(x) = min_y f(x, y) - shift over the drop variables, sampled at m Lobatto
// points per keep variable.
inline SampledFunction partial_min(const SparsePoly& f, const std::vector<int>& keep, const std::vector<int>& drop,
                                   int m, double shift, int drop_grid = 20) {
    const SparsePoly c = to_chebyshev(f);
    Clique kv = normalize_clique(keep), dv = normalize_clique(drop);
    if (!set_intersection(kv, dv).empty()) throw InputError("keep and drop variables overlap");
    if (!support_within(c, set_union(kv, dv))) throw InputError("partial_min: support outside keep and drop variables");
    if (m < 1) throw InputError("partial_min: grid size must be positive");

    SampledFunction g;
    g.dim = c.dim();
    g.shift = shift;
    const auto lips = lip_bounds(c);
    // only variables f depends on matter
    const auto fd = fulldeg(c);
    Clique dact;
    for (int v : dv)
        if (fd[v] > 0) dact.push_back(v);
    for (int v : kv) {
        g.vars.push_back(v);
        g.lip_per_var.push_back(lips[v]);
        g.lip_estimate += lips[v];
    }
    g.nodes_per_dim = kv.empty() ? 1 : m;

    const Clique all = set_union(kv, dact);
    std::vector<int> ext;
    for (int v : all) ext.push_back(fd[v] + 1);
    const cheb::Tensor T = to_dense(c, all, ext);
    std::vector<bool> is_keep;
    for (int v : all) is_keep.push_back(std::binary_search(kv.begin(), kv.end(), v));

    const auto kx = cheb::lobatto_points(m);
    const int dg = std::max(drop_grid, 2);
    const auto dx = cheb::lobatto_points(dg);

    // keep modes evaluated on the grid, drop modes left as coefficients
    cheb::Tensor K = T;
    for (std::size_t k = 0; k < all.size(); ++k)
        if (is_keep[k]) K = cheb::mode_product(K, static_cast<int>(k), cheb::eval_matrix(kx, K.ext[k] - 1));

    std::vector<int> kext(kv.size(), m), dext;
    for (std::size_t k = 0; k < all.size(); ++k)
        if (!is_keep[k]) dext.push_back(K.ext[k]);
    g.values = cheb::Tensor(kext);
    const std::size_t nk = g.values.size(), nd = cheb::Tensor::count(dext);
    std::vector<double> rows(nk * nd);
    {
        std::vector<int> idx, ki(kv.size()), di(dext.size());
        cheb::Tensor kshape(kext), dshape(dext);
        for (std::size_t o = 0; o < K.size(); ++o) {
            K.unravel(o, idx);
            std::size_t a = 0, b = 0;
            for (std::size_t k = 0; k < all.size(); ++k) (is_keep[k] ? ki[a++] : di[b++]) = idx[k];
            rows[kshape.offset(ki) * nd + dshape.offset(di)] = K.data[o];
        }
    }

    if (dext.empty()) {
        for (std::size_t i = 0; i < nk; ++i) g.values.data[i] = rows[i] - shift;
        return g;
    }

    // drop-grid slack: true min >= computed min - sum lip_k * (max gap)/2
    double gap = 0.0;
    for (int j = 0; j + 1 < dg; ++j) gap = std::max(gap, dx[j + 1] - dx[j]);
    for (int v : dact) g.slack += lips[v] * gap / 2.0;

    std::vector<Eigen::MatrixXd> E;
    for (int e : dext) E.push_back(cheb::eval_matrix(dx, e - 1));
    std::vector<int> widx;
    for (std::size_t i = 0; i < nk; ++i) {
        cheb::Tensor cd(dext);
        std::copy(rows.begin() + static_cast<std::ptrdiff_t>(i * nd), rows.begin() + static_cast<std::ptrdiff_t>((i + 1) * nd),
                  cd.data.begin());
        cheb::Tensor vals = cd;
        for (std::size_t k = 0; k < dext.size(); ++k) vals = cheb::mode_product(vals, static_cast<int>(k), E[k]);
        const auto it = std::min_element(vals.data.begin(), vals.data.end());
        vals.unravel(static_cast<std::size_t>(it - vals.data.begin()), widx);
        std::vector<double> y;
        for (int w : widx) y.push_back(dx[w]);
        const double v = std::min(*it, detail::coordinate_descent(cd, y));
        g.values.data[i] = v - shift;
    }
    return g;
}

struct JacksonApprox {
    SparsePoly p;
    double error = 0.0;     // max error at the samples
    double demanded = 0.0;  // cjac * sum lip_k / m_k
    std::vector<double> lip_p;
};

// Interpolates g at its Lobatto samples, truncates to degree m and damps with
// the Jackson operator; the error and Lipschitz contract is checked afterwards.
inline JacksonApprox jackson_approx(const SampledFunction& g, const MultiIndex& m, double cjac = kDefaultCjac) {
    if (static_cast<int>(m.size()) != g.dim) throw DimensionMismatch("degree vector length differs from dimension");
    JacksonApprox out;
    out.p = SparsePoly(g.dim, Basis::Chebyshev);
    if (g.vars.empty()) {
        out.p.add_term(MultiIndex(static_cast<std::size_t>(g.dim), 0), g.values.data.at(0));
        out.p.prune();
        return out;
    }
    const int N = g.nodes_per_dim;
    std::vector<int> deg;
    for (int v : g.vars) {
        if (m[v] < 1) throw InputError("jackson_approx needs m_k >= 1 on the sampled variables");
        if (m[v] > N - 1) throw InputError("jackson_approx: degree exceeds what the samples determine");
        deg.push_back(m[v]);
    }
    const Eigen::MatrixXd A = cheb::lobatto_interp_matrix(N);
    cheb::Tensor c = g.values;
    for (std::size_t k = 0; k < g.vars.size(); ++k) {
        Eigen::MatrixXd Ak = A.topRows(deg[k] + 1);
        for (int i = 0; i <= deg[k]; ++i) Ak.row(i) *= lambda_1d(i, deg[k]);
        c = cheb::mode_product(c, static_cast<int>(k), Ak);
    }
    out.p = from_dense(g.dim, g.vars, c);

    const auto x = cheb::lobatto_points(N);
    const cheb::Tensor pv = cheb::evaluate_on_grid(c, std::vector<std::vector<double>>(g.vars.size(), x));
    for (std::size_t o = 0; o < pv.size(); ++o) out.error = std::max(out.error, std::abs(pv.data[o] - g.values.data[o]));
    for (std::size_t k = 0; k < g.vars.size(); ++k) out.demanded += cjac * g.lip_per_var[k] / deg[k];

    const auto lp = lip_bounds(out.p);
    double scale = 0.0;
    for (double v : g.values.data) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < g.vars.size(); ++k) {
        out.lip_p.push_back(lp[g.vars[k]]);
        const double cap = 2.0 * (1.0 + kLipSlack) * g.lip_per_var[k] + 1e-12 * (1.0 + scale);
        if (lp[g.vars[k]] > cap)
            throw ContractUnmet(lp[g.vars[k]], cap,
                                "Lipschitz bound in x" + std::to_string(g.vars[k] + 1) + " is " + std::to_string(lp[g.vars[k]]) +
                                    " > " + std::to_string(cap));
    }
    if (out.error > out.demanded + 1e-12 * (1.0 + scale))
        throw ContractUnmet(out.error, out.demanded,
                            "sample error " + std::to_string(out.error) + " > " + std::to_string(out.demanded));
    return out;
}

// ---------- sparse grid minimum ----------

struct GridMin {
    double value = 0.0;
    std::vector<double> witness;  // length n
};

// Parent of clique L in the clique tree: the largest j < L with inter[L] in J_j.
inline int rip_parent(const CliqueStructure& cs, int L) {
    for (int j = L - 1; j >= 0; --j)
        if (is_subset(cs.inter[L], cs.cliques[j])) return j;
    throw RipViolation("clique " + clique_str(cs.cliques[L]) + " has no parent");
}

// min over a Lobatto grid of sum_j parts[j], by dynamic programming over the clique tree.
inline GridMin sparse_grid_min(const std::vector<SparsePoly>& parts, const CliqueStructure& cs, int m) {
    const int L = cs.size();
    if (static_cast<int>(parts.size()) != L) throw InputError("one part per clique required");
    if (!cs.rip) throw RipViolation("cliques do not satisfy the running intersection property");
    const auto x = cheb::lobatto_points(m);
    std::vector<cheb::Tensor> V(L);
    std::vector<int> parent(L, -1);
    for (int j = 0; j < L; ++j) {
        if (!support_within(parts[j], cs.cliques[j])) throw UnsplittableTerm("part " + std::to_string(j + 1) + " leaves its clique");
        V[j] = grid_values(parts[j], cs.cliques[j], m).values;
        if (j > 0) parent[j] = rip_parent(cs, j);
    }
    auto positions = [](const Clique& sub, const Clique& in) {
        std::vector<int> pos;
        for (int v : sub) pos.push_back(static_cast<int>(std::lower_bound(in.begin(), in.end(), v) - in.begin()));
        return pos;
    };
    std::vector<cheb::Tensor> msg(L);
    std::vector<std::vector<std::size_t>> arg(L);
    std::vector<int> idx, sidx;
    for (int j = L - 1; j >= 1; --j) {
        const Clique& sep = cs.inter[j];
        const auto pos = positions(sep, cs.cliques[j]);
        msg[j] = cheb::Tensor(std::vector<int>(sep.size(), m));
        std::fill(msg[j].data.begin(), msg[j].data.end(), std::numeric_limits<double>::infinity());
        arg[j].assign(msg[j].size(), 0);
        sidx.resize(sep.size());
        for (std::size_t o = 0; o < V[j].size(); ++o) {
            V[j].unravel(o, idx);
            for (std::size_t s = 0; s < sep.size(); ++s) sidx[s] = idx[pos[s]];
            const std::size_t so = msg[j].offset(sidx);
            if (V[j].data[o] < msg[j].data[so]) {
                msg[j].data[so] = V[j].data[o];
                arg[j][so] = o;
            }
        }
        // fold into the parent
        const int p = parent[j];
        const auto ppos = positions(sep, cs.cliques[p]);
        for (std::size_t o = 0; o < V[p].size(); ++o) {
            V[p].unravel(o, idx);
            for (std::size_t s = 0; s < sep.size(); ++s) sidx[s] = idx[ppos[s]];
            V[p].data[o] += msg[j].data[msg[j].offset(sidx)];
        }
    }
    GridMin out;
    out.witness.assign(static_cast<std::size_t>(cs.n), 0.0);
    const auto it = std::min_element(V[0].data.begin(), V[0].data.end());
    out.value = *it;
    std::vector<int> gi(static_cast<std::size_t>(cs.n), -1);
    V[0].unravel(static_cast<std::size_t>(it - V[0].data.begin()), idx);
    for (std::size_t k = 0; k < cs.cliques[0].size(); ++k) gi[cs.cliques[0][k]] = idx[k];
    for (int j = 1; j < L; ++j) {
        const Clique& sep = cs.inter[j];
        sidx.resize(sep.size());
        for (std::size_t s = 0; s < sep.size(); ++s) sidx[s] = gi[sep[s]];
        V[j].unravel(arg[j][msg[j].offset(sidx)], idx);
        for (std::size_t k = 0; k < cs.cliques[j].size(); ++k) gi[cs.cliques[j][k]] = idx[k];
    }
    for (int v = 0; v < cs.n; ++v)
        if (gi[v] >= 0) out.witness[v] = x[gi[v]];
    return out;
}

// ---------- decomposition ----------

struct DecompositionOptions {
    double cjac = kDefaultCjac;
    int grid = 20;            // verification grid per dimension
    double tol = 1e-6;
    double margin = 0.9;      // fraction of eps'/2 - eta granted to the approximation error
};

struct LevelInfo {
    int level = 0;            // 0-based clique index L being split off
    int parent = 0;
    std::vector<int> keep;    // inter[L]
    int m = 0;                // Jackson degree used
    int D = 0;                // cap D_{L,ell}
    double error = 0.0;
    double allowed = 0.0;     // margin * (eps'/2 - eta)
    double envelope_slack = 0.0;
    std::vector<int> tried;
};

struct CliqueInfo {
    double grid_min = 0.0;
    MultiIndex fulldeg;
    MultiIndex degree_bound;
    double sup_norm = 0.0;
    double norm_bound = 0.0;
    double lip = 0.0;
    double lip_bound = 0.0;
    bool degree_ok = false, norm_ok = false, lip_ok = false, positive_ok = false;
};

struct DecompositionResult {
    std::vector<SparsePoly> h;
    double epsilon = 0.0;
    double eta = 0.0;
    double eps_prime = 0.0;
    double eps_prime_alt = 0.0;  // (eps + (ell-2) eta)/ell, the variant behind the degree bounds
    std::vector<std::vector<int>> D;  // D[l][m], 0-based, zero for m < l
    std::vector<LevelInfo> levels;
    std::vector<CliqueInfo> cliques;
    double f_grid_min = 0.0;
    double sum_residual = 0.0;
};

inline std::vector<int> degree_schedule(int cap) {
    std::vector<int> s;
    for (int v : {2, 3, 5, 8, 12, 18, 27, 40, 60, 90, 135, 200, 300})
        if (v < cap) s.push_back(v);
    s.push_back(std::max(cap, 1));
    return s;
}

inline DecompositionResult sparse_decompose(const std::vector<SparsePoly>& parts_in, const CliqueStructure& cs,
                                            double epsilon, const DecompositionOptions& opt = {}) {
    const int ell = cs.size();
    if (!cs.rip) throw RipViolation("cliques do not satisfy the running intersection property");
    if (static_cast<int>(parts_in.size()) != ell) throw InputError("one part per clique required");
    if (!(epsilon > 0)) throw InputError("epsilon must be positive");
    const int n = cs.n;
    std::vector<SparsePoly> f;
    for (const auto& p : parts_in) {
        if (p.dim() != n) throw DimensionMismatch("part dimension");
        f.push_back(to_chebyshev(p));
    }

    DecompositionResult R;
    R.epsilon = epsilon;
    R.eta = epsilon / (2.0 * (ell + 2));
    R.eps_prime = ell >= 2 ? (epsilon + (ell - 2) * R.eta) / (ell - 1) : epsilon;
    R.eps_prime_alt = (epsilon + (ell - 2) * R.eta) / ell;

    const GridMin gm = sparse_grid_min(f, cs, opt.grid);
    R.f_grid_min = gm.value;
    if (gm.value < epsilon) {
        std::string w;
        for (int v = 0; v < n; ++v) w += (v ? "," : "") + std::to_string(gm.witness[v]);
        throw NotBoundedBelow("f = " + std::to_string(gm.value) + " < epsilon at (" + w + ")");
    }

    std::vector<double> lip0;
    std::vector<double> norm0;
    for (const auto& p : f) {
        auto b = box_functionals(p, 2);
        lip0.push_back(b.lip);
        norm0.push_back(b.sup_norm_upper);
    }
    const double denom = R.eps_prime - 2.0 * R.eta;
    R.D.assign(static_cast<std::size_t>(ell), std::vector<int>(static_cast<std::size_t>(ell), 0));
    for (int l = 1; l < ell; ++l)
        for (int m = l; m < ell; ++m) {
            double s = 0.0;
            for (int k = l; k <= m; ++k) s += lip0[k];
            R.D[l][m] = static_cast<int>(std::ceil(2.0 * opt.cjac * static_cast<double>(cs.inter[l].size()) * s / denom));
        }
    if (ell >= 2) R.D[0] = R.D[1];

    const double allowed = opt.margin * (R.eps_prime / 2.0 - R.eta);
    for (int L = ell - 1; L >= 1; --L) {
        LevelInfo info;
        info.level = L;
        info.parent = rip_parent(cs, L);
        info.keep = cs.inter[L];
        info.allowed = allowed;
        const Clique dropv = [&] {
            Clique d;
            std::set_difference(cs.cliques[L].begin(), cs.cliques[L].end(), info.keep.begin(), info.keep.end(),
                                std::back_inserter(d));
            return d;
        }();
        info.D = R.D[L][ell - 1];
        SparsePoly p;
        bool ok = false;
        std::string last;
        if (info.keep.empty()) {
            auto g = partial_min(f[L], {}, dropv, 1, R.eps_prime / 2.0);
            p = SparsePoly::constant(n, g.values.data[0], Basis::Chebyshev);
            info.envelope_slack = g.slack;
            ok = true;
        } else {
            for (int m : degree_schedule(info.D)) {
                info.tried.push_back(m);
                auto g = partial_min(f[L], info.keep, dropv, 2 * m + 1, R.eps_prime / 2.0);
                MultiIndex mi(static_cast<std::size_t>(n), 0);
                for (int v : info.keep) mi[v] = m;
                try {
                    auto ja = jackson_approx(g, mi, opt.cjac);
                    info.error = ja.error;
                    if (ja.error > allowed) {
                        last = "sample error " + std::to_string(ja.error) + " above " + std::to_string(allowed);
                        continue;
                    }
                    SparsePoly hL = f[L] - ja.p;
                    if (grid_min(hL, cs.cliques[L], opt.grid) < R.eta) {
                        last = "h below eta on the verification grid";
                        continue;
                    }
                    p = ja.p;
                    info.m = m;
                    info.envelope_slack = g.slack;
                    ok = true;
                    break;
                } catch (const ContractUnmet& e) {
                    last = e.what();
                }
            }
        }
        if (!ok)
            throw ContractUnmet(info.error, allowed,
                                "no degree up to " + std::to_string(info.D) + " approximates the envelope of clique " +
                                    clique_str(cs.cliques[L]) + " (" + last + ")");
        f[L] = f[L] - p;
        f[info.parent] = f[info.parent] + p;
        R.levels.push_back(info);
    }
    R.h = f;

    // diagnostics
    SparsePoly total(n, Basis::Chebyshev), orig(n, Basis::Chebyshev);
    for (int j = 0; j < ell; ++j) {
        total = total + R.h[j];
        orig = orig + to_chebyshev(parts_in[j]);
    }
    const double om = std::max(orig.max_abs_coeff(), 1e-300);
    R.sum_residual = (total - orig).max_abs_coeff() / om;
    double norm_sum = 0.0;
    for (double v : norm0) norm_sum += v;
    for (int j = 0; j < ell; ++j) {
        CliqueInfo ci;
        const auto& J = cs.cliques[j];
        ci.grid_min = grid_min(R.h[j], J, opt.grid);
        ci.positive_ok = ci.grid_min >= R.eta - opt.tol * std::max(1.0, om);
        ci.fulldeg = fulldeg(R.h[j]);
        MultiIndex bound = fulldeg(to_chebyshev(parts_in[j]));
        for (int l = std::max(j, 1); l < ell; ++l)
            for (int v : cs.inter[l]) bound[v] = std::max(bound[v], R.D[l][ell - 1]);
        for (int v = 0; v < n; ++v)
            if (!std::binary_search(J.begin(), J.end(), v)) bound[v] = 0;
        ci.degree_bound = bound;
        ci.degree_ok = index_leq(ci.fulldeg, bound) && support_within(R.h[j], J);
        auto b = box_functionals(R.h[j], 2);
        ci.sup_norm = b.sup_norm_upper;
        ci.norm_bound = 3.0 * std::ldexp(1.0, ell - 1) * norm_sum;
        ci.norm_ok = ci.sup_norm <= ci.norm_bound;
        ci.lip = b.lip;
        double ls = 0.0;
        for (int k = j; k < ell; ++k) ls += lip0[k];
        ci.lip_bound = 3.0 * ls;
        ci.lip_ok = ci.lip <= ci.lip_bound * (1.0 + kLipSlack);
        R.cliques.push_back(std::move(ci));
    }
    return R;
}

} // namespace sparsepos
