#pragma once

#include "sparsepos/chebyshev.hpp"
#include "sparsepos/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace sparsepos {

using MultiIndex = std::vector<int>;

enum class Basis { Monomial, Chebyshev };

inline const char* basis_name(Basis b) { return b == Basis::Monomial ? "monomial" : "chebyshev"; }

inline int weight(const MultiIndex& I) {
    int s = 0;
    for (int v : I) s += v;
    return s;
}

inline int hamming(const MultiIndex& I) {
    int s = 0;
    for (int v : I) s += (v > 0);
    return s;
}

// entrywise I <= J
inline bool index_leq(const MultiIndex& I, const MultiIndex& J) {
    if (I.size() != J.size()) return false;
    for (std::size_t k = 0; k < I.size(); ++k)
        if (I[k] > J[k]) return false;
    return true;
}

inline std::string index_str(const MultiIndex& I) {
    std::ostringstream os;
    os << '(';
    for (std::size_t k = 0; k < I.size(); ++k) os << (k ? "," : "") << I[k];
    os << ')';
    return os.str();
}

inline constexpr double kDropTol = 1e-14;

class SparsePoly {
  public:
    using TermMap = std::map<MultiIndex, double>;

    SparsePoly() = default;
    explicit SparsePoly(int dim, Basis basis = Basis::Monomial) : dim_(dim), basis_(basis) {
        if (dim < 0) throw InputError("negative dimension");
    }

    static SparsePoly constant(int dim, double c, Basis b = Basis::Monomial) {
        SparsePoly p(dim, b);
        p.add_term(MultiIndex(static_cast<std::size_t>(dim), 0), c);
        return p;
    }
    // x_k; identical in both bases since T_1(x) = x
    static SparsePoly variable(int dim, int k, Basis b = Basis::Monomial) {
        MultiIndex I(static_cast<std::size_t>(dim), 0);
        I.at(static_cast<std::size_t>(k)) = 1;
        return term(dim, I, 1.0, b);
    }
    static SparsePoly term(int dim, const MultiIndex& I, double c, Basis b = Basis::Monomial) {
        SparsePoly p(dim, b);
        p.add_term(I, c);
        return p;
    }

    int dim() const { return dim_; }
    Basis basis() const { return basis_; }
    const TermMap& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }

    double coeff(const MultiIndex& I) const {
        auto it = terms_.find(I);
        return it == terms_.end() ? 0.0 : it->second;
    }

    void add_term(const MultiIndex& I, double c) {
        check_index(I);
        if (c == 0.0) return;
        auto [it, fresh] = terms_.try_emplace(I, c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0.0) terms_.erase(it);
        }
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& [I, c] : terms_) m = std::max(m, std::abs(c));
        return m;
    }
    double sum_abs_coeff() const {
        double s = 0.0;
        for (const auto& [I, c] : terms_) s += std::abs(c);
        return s;
    }

    // drop coefficients below rel * max|c|
    SparsePoly& prune(double rel = kDropTol) {
        double cut = rel * max_abs_coeff();
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (std::abs(it->second) <= cut) it = terms_.erase(it);
            else ++it;
        }
        return *this;
    }

    SparsePoly& operator*=(double s) {
        if (s == 0.0) {
            terms_.clear();
            return *this;
        }
        for (auto& [I, c] : terms_) c *= s;
        return *this;
    }

    bool operator==(const SparsePoly& o) const { return dim_ == o.dim_ && basis_ == o.basis_ && terms_ == o.terms_; }

  private:
    void check_index(const MultiIndex& I) const {
        if (static_cast<int>(I.size()) != dim_)
            throw DimensionMismatch("exponent " + index_str(I) + " has length " + std::to_string(I.size()) +
                                    ", expected " + std::to_string(dim_));
        for (int v : I)
            if (v < 0) throw InputError("negative exponent in " + index_str(I));
    }

    int dim_ = 0;
    Basis basis_ = Basis::Monomial;
    TermMap terms_;
};

// ---------- basis change ----------

namespace detail {

// x^i = sum_j P[i][j] T_j
inline const std::vector<std::vector<long double>>& mono_to_cheb_table(int deg) {
    static thread_local std::vector<std::vector<long double>> P{{1.0L}};
    while (static_cast<int>(P.size()) <= deg) {
        const auto& prev = P.back();
        std::vector<long double> next(prev.size() + 1, 0.0L);
        for (std::size_t j = 0; j < prev.size(); ++j) {
            if (j == 0) next[1] += prev[0];
            else {
                next[j + 1] += 0.5L * prev[j];
                next[j - 1] += 0.5L * prev[j];
            }
        }
        P.push_back(std::move(next));
    }
    return P;
}

// T_i = sum_j M[i][j] x^j
inline const std::vector<std::vector<long double>>& cheb_to_mono_table(int deg) {
    static thread_local std::vector<std::vector<long double>> M{{1.0L}, {0.0L, 1.0L}};
    while (static_cast<int>(M.size()) <= deg) {
        std::size_t i = M.size();
        std::vector<long double> next(i + 1, 0.0L);
        for (std::size_t j = 0; j < M[i - 1].size(); ++j) next[j + 1] += 2.0L * M[i - 1][j];
        for (std::size_t j = 0; j < M[i - 2].size(); ++j) next[j] -= M[i - 2][j];
        M.push_back(std::move(next));
    }
    return M;
}

inline SparsePoly change_basis(const SparsePoly& p, Basis target) {
    if (p.basis() == target) return p;
    const int n = p.dim();
    int maxdeg = 0;
    for (const auto& [I, c] : p.terms())
        for (int v : I) maxdeg = std::max(maxdeg, v);
    const auto& tab = target == Basis::Chebyshev ? mono_to_cheb_table(maxdeg) : cheb_to_mono_table(maxdeg);

    std::map<MultiIndex, long double> cur;
    for (const auto& [I, c] : p.terms()) cur[I] = c;
    // one variable at a time
    for (int k = 0; k < n; ++k) {
        std::map<MultiIndex, long double> next;
        for (const auto& [I, c] : cur) {
            const auto& row = tab[static_cast<std::size_t>(I[k])];
            MultiIndex J = I;
            for (std::size_t j = 0; j < row.size(); ++j) {
                if (row[j] == 0.0L) continue;
                J[k] = static_cast<int>(j);
                next[J] += c * row[j];
            }
        }
        cur.swap(next);
    }
    SparsePoly out(n, target);
    for (const auto& [I, c] : cur) out.add_term(I, static_cast<double>(c));
    out.prune();
    return out;
}

} // namespace detail

inline SparsePoly to_chebyshev(const SparsePoly& p) { return detail::change_basis(p, Basis::Chebyshev); }
inline SparsePoly to_monomial(const SparsePoly& p) { return detail::change_basis(p, Basis::Monomial); }
inline SparsePoly to_basis(const SparsePoly& p, Basis b) { return detail::change_basis(p, b); }

// ---------- arithmetic ----------

inline void require_same(const SparsePoly& p, const SparsePoly& q, bool basis_too) {
    if (p.dim() != q.dim())
        throw DimensionMismatch("dimensions " + std::to_string(p.dim()) + " and " + std::to_string(q.dim()));
    if (basis_too && p.basis() != q.basis())
        throw InputError(std::string("basis mismatch: ") + basis_name(p.basis()) + " vs " + basis_name(q.basis()));
}

inline SparsePoly add(const SparsePoly& p, const SparsePoly& q) {
    require_same(p, q, true);
    SparsePoly r = p;
    for (const auto& [I, c] : q.terms()) r.add_term(I, c);
    r.prune();
    return r;
}

inline SparsePoly scale(const SparsePoly& p, double s) {
    SparsePoly r = p;
    r *= s;
    return r;
}

inline SparsePoly sub(const SparsePoly& p, const SparsePoly& q) { return add(p, scale(q, -1.0)); }

// Products of two Chebyshev-basis inputs stay in the Chebyshev basis
// (T_a T_b = (T_{a+b} + T_{|a-b|})/2 per variable); anything else is done
// in the monomial basis.
inline SparsePoly mul(const SparsePoly& p, const SparsePoly& q) {
    require_same(p, q, false);
    const int n = p.dim();
    if (p.basis() == Basis::Chebyshev && q.basis() == Basis::Chebyshev) {
        std::map<MultiIndex, long double> acc;
        MultiIndex K(static_cast<std::size_t>(n));
        for (const auto& [I, a] : p.terms()) {
            for (const auto& [J, b] : q.terms()) {
                std::vector<int> act;
                for (int k = 0; k < n; ++k)
                    if (I[k] > 0 && J[k] > 0) act.push_back(k);
                const long double base = static_cast<long double>(a) * b / static_cast<long double>(1u << act.size());
                for (int k = 0; k < n; ++k) K[k] = I[k] + J[k];
                for (std::uint32_t mask = 0; mask < (1u << act.size()); ++mask) {
                    for (std::size_t t = 0; t < act.size(); ++t) {
                        int k = act[t];
                        K[k] = (mask >> t & 1u) ? std::abs(I[k] - J[k]) : I[k] + J[k];
                    }
                    acc[K] += base;
                }
            }
        }
        SparsePoly r(n, Basis::Chebyshev);
        for (const auto& [I, c] : acc) r.add_term(I, static_cast<double>(c));
        r.prune();
        return r;
    }
    const SparsePoly pm = to_monomial(p), qm = to_monomial(q);
    std::map<MultiIndex, long double> acc;
    MultiIndex K(static_cast<std::size_t>(n));
    for (const auto& [I, a] : pm.terms())
        for (const auto& [J, b] : qm.terms()) {
            for (int k = 0; k < n; ++k) K[k] = I[k] + J[k];
            acc[K] += static_cast<long double>(a) * b;
        }
    SparsePoly r(n, Basis::Monomial);
    for (const auto& [I, c] : acc) r.add_term(I, static_cast<double>(c));
    r.prune();
    return r;
}

inline SparsePoly operator+(const SparsePoly& p, const SparsePoly& q) { return add(p, q); }
inline SparsePoly operator-(const SparsePoly& p, const SparsePoly& q) { return sub(p, q); }
inline SparsePoly operator*(const SparsePoly& p, const SparsePoly& q) { return mul(p, q); }
inline SparsePoly operator*(double s, const SparsePoly& p) { return scale(p, s); }
inline SparsePoly operator*(const SparsePoly& p, double s) { return scale(p, s); }
inline SparsePoly operator-(const SparsePoly& p) { return scale(p, -1.0); }
inline SparsePoly operator+(const SparsePoly& p, double c) {
    return add(p, SparsePoly::constant(p.dim(), c, p.basis()));
}

// ---------- evaluation ----------

inline double eval(const SparsePoly& p, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != p.dim())
        throw DimensionMismatch("point has length " + std::to_string(x.size()) + ", expected " + std::to_string(p.dim()));
    const int n = p.dim();
    std::vector<int> maxdeg(static_cast<std::size_t>(n), 0);
    for (const auto& [I, c] : p.terms())
        for (int k = 0; k < n; ++k) maxdeg[k] = std::max(maxdeg[k], I[k]);
    std::vector<std::vector<double>> tab(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        if (p.basis() == Basis::Chebyshev) tab[k] = cheb::values(x[k], maxdeg[k]);
        else {
            tab[k].assign(static_cast<std::size_t>(maxdeg[k]) + 1, 1.0);
            for (int j = 1; j <= maxdeg[k]; ++j) tab[k][j] = tab[k][j - 1] * x[k];
        }
    }
    long double s = 0.0L;
    for (const auto& [I, c] : p.terms()) {
        long double t = c;
        for (int k = 0; k < n; ++k)
            if (I[k]) t *= tab[k][I[k]];
        s += t;
    }
    return static_cast<double>(s);
}

// <p, T_I> under the product Chebyshev probability measure.
inline double cheb_inner(const SparsePoly& p, const MultiIndex& I) {
    if (p.basis() != Basis::Chebyshev) throw InputError("cheb_inner expects a Chebyshev-basis polynomial");
    if (static_cast<int>(I.size()) != p.dim()) throw DimensionMismatch("index length");
    return std::ldexp(p.coeff(I), -hamming(I));
}

// ---------- degree data ----------

struct DegreeData {
    MultiIndex fulldeg;
    int deg = 0;
    std::vector<int> support_vars;
    std::vector<MultiIndex> index_set;
};

inline DegreeData degree_data(const SparsePoly& p) {
    DegreeData d;
    d.fulldeg.assign(static_cast<std::size_t>(p.dim()), 0);
    for (const auto& [I, c] : p.terms()) {
        d.index_set.push_back(I);
        d.deg = std::max(d.deg, weight(I));
        for (int k = 0; k < p.dim(); ++k) d.fulldeg[k] = std::max(d.fulldeg[k], I[k]);
    }
    for (int k = 0; k < p.dim(); ++k)
        if (d.fulldeg[k] > 0) d.support_vars.push_back(k);
    return d;
}

inline MultiIndex fulldeg(const SparsePoly& p) { return degree_data(p).fulldeg; }
inline std::vector<int> support(const SparsePoly& p) { return degree_data(p).support_vars; }

inline bool support_within(const SparsePoly& p, const std::vector<int>& vars) {
    std::set<int> allowed(vars.begin(), vars.end());
    for (int v : support(p))
        if (!allowed.count(v)) return false;
    return true;
}

// ---------- dense views ----------

// Dense Chebyshev coefficient tensor over `vars` (extent fulldeg+1 per var).
inline cheb::Tensor to_dense(const SparsePoly& p, const std::vector<int>& vars, const std::vector<int>& ext) {
    const SparsePoly c = to_chebyshev(p);
    cheb::Tensor t(ext);
    std::vector<int> idx(vars.size());
    for (const auto& [I, a] : c.terms()) {
        bool inside = true;
        for (std::size_t k = 0; k < vars.size(); ++k) {
            idx[k] = I[vars[k]];
            if (idx[k] >= ext[k]) inside = false;
        }
        int other = 0;
        for (int v = 0, k = 0; v < p.dim(); ++v) {
            if (k < static_cast<int>(vars.size()) && vars[k] == v) {
                ++k;
                continue;
            }
            other += I[v];
        }
        if (!inside || other) throw InputError("polynomial does not fit the dense layout");
        t.data[t.offset(idx)] += a;
    }
    return t;
}

inline std::vector<int> dense_extents(const SparsePoly& p, const std::vector<int>& vars) {
    auto fd = fulldeg(p);
    std::vector<int> e;
    for (int v : vars) e.push_back(fd[v] + 1);
    return e;
}

inline SparsePoly from_dense(int dim, const std::vector<int>& vars, const cheb::Tensor& t) {
    SparsePoly p(dim, Basis::Chebyshev);
    std::vector<int> idx;
    MultiIndex I(static_cast<std::size_t>(dim), 0);
    for (std::size_t o = 0; o < t.size(); ++o) {
        if (t.data[o] == 0.0) continue;
        t.unravel(o, idx);
        for (std::size_t k = 0; k < vars.size(); ++k) I[vars[k]] = idx[k];
        p.add_term(I, t.data[o]);
    }
    p.prune();
    return p;
}

// ---------- box functionals ----------

struct BoxFunctional {
    double sup_norm_upper = 0.0;
    double sup_norm_lower = 0.0;
    std::vector<double> lip_per_variable;  // certified upper bounds
    std::vector<double> lip_grid;          // finite-difference slopes, diagnostic only
    double lip = 1.0;                      // max(1, sum_k lip_per_variable[k])
    bool lip_floor_applied = false;
};

namespace detail {

// Tensor grid sizes kept below this many points.
inline constexpr std::size_t kGridBudget = 4'000'000;

inline int fit_grid(int wanted, int nvars, std::size_t budget = kGridBudget) {
    int m = wanted;
    while (m > 2 && std::pow(static_cast<double>(m), nvars) > static_cast<double>(budget)) --m;
    return m;
}

} // namespace detail

// Certified per-variable Lipschitz bounds: the smaller of the coefficient
// bound sum |c_I| i_k^2 and an Ehlich-Zeller bound on |d p / d x_k|.
inline std::vector<double> lip_bounds(const SparsePoly& p) {
    const SparsePoly c = to_chebyshev(p);
    const int n = p.dim();
    std::vector<double> coef(static_cast<std::size_t>(n), 0.0);
    for (const auto& [I, a] : c.terms())
        for (int k = 0; k < n; ++k) coef[k] += std::abs(a) * I[k] * I[k];

    const auto dd = degree_data(c);
    const auto& vars = dd.support_vars;
    if (vars.empty()) return coef;
    const cheb::Tensor T = to_dense(c, vars, dense_extents(c, vars));
    std::vector<double> out = coef;
    for (std::size_t kk = 0; kk < vars.size(); ++kk) {
        // derivative tensor along mode kk
        cheb::Tensor D = T;
        {
            const int d = T.ext[kk] - 1;
            Eigen::MatrixXd Dm = Eigen::MatrixXd::Zero(std::max(d, 1), d + 1);
            for (int j = 0; j <= d; ++j) {
                std::vector<double> e(static_cast<std::size_t>(d) + 1, 0.0);
                e[j] = 1.0;
                auto de = cheb::derivative(e);
                for (std::size_t i = 0; i < de.size() && static_cast<int>(i) < Dm.rows(); ++i)
                    Dm(static_cast<Eigen::Index>(i), j) = de[i];
            }
            D = cheb::mode_product(T, static_cast<int>(kk), Dm);
        }
        std::vector<int> degs;
        for (int e : D.ext) degs.push_back(e - 1);
        int factor = 8;
        auto total = [&](int f) {
            double s = 1;
            for (int d : degs) s *= f * (d + 1);
            return s;
        };
        while (factor > 2 && total(factor) > static_cast<double>(detail::kGridBudget)) factor /= 2;
        if (total(factor) > 4.0 * static_cast<double>(detail::kGridBudget)) continue;  // too big, keep coefficient bound
        std::vector<std::vector<double>> pts;
        double ez = 1.0;
        for (int d : degs) {
            int m = factor * (d + 1);
            pts.push_back(cheb::gauss_points(m));
            ez *= cheb::ez_factor(d, m);
        }
        auto vals = cheb::evaluate_on_grid(D, pts);
        double mx = 0.0;
        for (double v : vals.data) mx = std::max(mx, std::abs(v));
        out[vars[kk]] = std::min(coef[vars[kk]], mx * ez);
    }
    return out;
}

inline double aggregate_lip(const std::vector<double>& per_var) {
    double s = 0.0;
    for (double v : per_var) s += v;
    return std::max(1.0, s);
}

inline BoxFunctional box_functionals(const SparsePoly& p, int grid_per_dim) {
    if (grid_per_dim < 2) throw InputError("grid_per_dim must be at least 2");
    const SparsePoly c = to_chebyshev(p);
    BoxFunctional b;
    b.sup_norm_upper = c.sum_abs_coeff();
    b.lip_per_variable = lip_bounds(c);
    double s = 0.0;
    for (double v : b.lip_per_variable) s += v;
    b.lip_floor_applied = s < 1.0;
    b.lip = std::max(1.0, s);
    b.lip_grid.assign(static_cast<std::size_t>(p.dim()), 0.0);

    const auto dd = degree_data(c);
    const auto& vars = dd.support_vars;
    if (vars.empty()) {
        b.sup_norm_lower = std::abs(c.coeff(MultiIndex(static_cast<std::size_t>(p.dim()), 0)));
        return b;
    }
    const int m = detail::fit_grid(grid_per_dim, static_cast<int>(vars.size()));
    const auto x = cheb::lobatto_points(m);
    std::vector<std::vector<double>> pts(vars.size(), x);
    const auto vals = cheb::evaluate_on_grid(to_dense(c, vars, dense_extents(c, vars)), pts);
    for (double v : vals.data) b.sup_norm_lower = std::max(b.sup_norm_lower, std::abs(v));

    // adjacent finite differences along each mode
    std::vector<int> idx;
    for (std::size_t o = 0; o < vals.size(); ++o) {
        vals.unravel(o, idx);
        for (std::size_t k = 0; k < vars.size(); ++k) {
            if (idx[k] + 1 >= m) continue;
            auto j = idx;
            ++j[k];
            double slope = std::abs(vals.data[vals.offset(j)] - vals.data[o]) / (x[idx[k] + 1] - x[idx[k]]);
            b.lip_grid[vars[k]] = std::max(b.lip_grid[vars[k]], slope);
        }
    }
    return b;
}

// Tensor Lobatto grid over `vars` and the values of p there.
struct GridValues {
    std::vector<int> vars;
    std::vector<double> points;
    cheb::Tensor values;
};

inline GridValues grid_values(const SparsePoly& p, const std::vector<int>& vars, int m) {
    GridValues g;
    g.vars = vars;
    g.points = cheb::lobatto_points(m);
    if (!support_within(p, vars)) throw InputError("grid_values: support outside the requested variables");
    const SparsePoly c = to_chebyshev(p);
    std::vector<int> ext;
    auto fd = fulldeg(c);
    for (int v : vars) ext.push_back(fd[v] + 1);
    std::vector<std::vector<double>> pts(vars.size(), g.points);
    g.values = cheb::evaluate_on_grid(to_dense(c, vars, ext), pts);
    return g;
}

inline double grid_min(const SparsePoly& p, const std::vector<int>& vars, int m) {
    auto g = grid_values(p, vars, m);
    double mn = INFINITY;
    for (double v : g.values.data) mn = std::min(mn, v);
    return mn;
}

inline std::string to_string(const SparsePoly& p) {
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto& [I, c] : p.terms()) {
        os << (first ? "" : " + ") << c;
        first = false;
        for (int k = 0; k < p.dim(); ++k) {
            if (!I[k]) continue;
            if (p.basis() == Basis::Monomial) os << "*x" << k + 1 << (I[k] > 1 ? "^" + std::to_string(I[k]) : "");
            else os << "*T" << I[k] << "(x" << k + 1 << ")";
        }
    }
    if (first) os << "0";
    return os.str();
}

} // namespace sparsepos
