#pragma once

#include "sparsepos/errors.hpp"
#include "sparsepos/poly.hpp"
#include "sparsepos/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace sparsepos {

// All calculators work with natural logarithms so nothing overflows; r values
// are also returned directly (inf when beyond double range).

inline double r_from_log_rhs(double log_rhs) {
    // (r+2)^2 >= exp(log_rhs)  or  r^2 >= exp(log_rhs)
    return std::exp(0.5 * log_rhs);
}

// ---------- sparse Schmüdgen, simplified ----------

struct SchmuedgenInputs {
    int n = 1;
    int ell = 2;
    int Jbar = 1;
    double Lbar = 1.0;
    int M = 1;
    double p_norm = 1.0;
    double epsilon = 1.0;
    double cjac = 4.0;
};

struct SimpleBound {
    double log_r2 = 0.0;        // log of the full right-hand side for r^2
    double r_min = 0.0;         // sqrt of the full right-hand side
    double threshold = 0.0;     // 4 C_Jac (ell+2) Jbar Lbar / M
    bool simplified_regime = false;  // epsilon < threshold
    double log_A = 0.0;
    double A = 0.0;
    double r_min_simplified = std::numeric_limits<double>::quiet_NaN();
};

inline SimpleBound schmuedgen_bound_simple(const SchmuedgenInputs& in) {
    if (in.n <= 0 || in.ell <= 0 || in.Jbar <= 0 || in.M <= 0 || !(in.epsilon > 0) || !(in.p_norm > 0) || !(in.Lbar > 0) ||
        !(in.cjac > 0))
        throw InputError("bound inputs must be positive");
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double J = in.Jbar, l2 = in.ell + 2.0;
    SimpleBound b;
    const double inner = std::max(static_cast<double>(in.M), 4.0 * in.cjac * l2 * J * in.Lbar / in.epsilon) + 2.0;
    b.log_r2 = (J + 3.0) * std::log(2.0) + std::log(l2) + std::log(static_cast<double>(in.n)) + std::log(pi2) +
               std::log(in.p_norm) - std::log(in.epsilon) + (J + 2.0) * std::log(inner);
    b.r_min = r_from_log_rhs(b.log_r2);
    b.threshold = 4.0 * in.cjac * l2 * J * in.Lbar / in.M;
    b.simplified_regime = in.epsilon < b.threshold;
    b.log_A = std::log(static_cast<double>(in.n)) + std::log(pi2) + (J + 2.0) * std::log(4.0 * in.cjac * J * in.Lbar + 2.0) +
              (J + 3.0) * std::log(2.0 * l2);
    b.A = std::exp(b.log_A);
    if (b.simplified_regime)
        b.r_min_simplified = r_from_log_rhs(b.log_A + std::log(in.p_norm) - (J + 3.0) * std::log(in.epsilon));
    return b;
}

// ---------- sparse Schmüdgen, detailed (per clique) ----------

struct DetailedInputs {
    CliqueStructure cliques;
    std::vector<MultiIndex> fulldeg;  // per clique, length n
    std::vector<double> lip;          // lip p_j per clique
    double p_norm = 1.0;
    double epsilon = 1.0;
    double cjac = 4.0;
};

struct DetailedBound {
    double log_rhs_separated = 0.0;  // variable-separated product form
    double log_rhs_equivcond = 0.0;
    double log_rhs_uniform = 0.0;    // coarser form with exponent |J_j|+2
    double r_min = 0.0;              // smallest integer r with (r+2)^2 >= both displayed sides
    double r_min_uniform = 0.0;
    double effcond_max = 0.0;        // max_m V_m^2 / (r_min+2)^2, to compare with 1/(2 pi^2 n)
};

inline std::vector<DetailedBound> schmuedgen_bound_detailed(const DetailedInputs& in) {
    const auto& cs = in.cliques;
    const int ell = cs.size(), n = cs.n;
    if (static_cast<int>(in.fulldeg.size()) != ell || static_cast<int>(in.lip.size()) != ell)
        throw InputError("one fulldeg and lip entry per clique required");
    if (!(in.epsilon > 0) || !(in.p_norm > 0)) throw InputError("bound inputs must be positive");
    const double pi2 = std::numbers::pi * std::numbers::pi, l2 = ell + 2.0;
    auto tail = [&](int l) {
        double s = 0.0;
        for (int t = l; t < ell; ++t) s += in.lip[t];
        return 4.0 * in.cjac * l2 * static_cast<double>(cs.inter[l].size()) * s / in.epsilon;
    };
    std::vector<DetailedBound> out;
    for (int j = 0; j < ell; ++j) {
        const auto& fd = in.fulldeg[j];
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int m = 0; m < n; ++m) {
            v[m] = fd[m];
            for (int l = j; l < ell; ++l)
                if (std::binary_search(cs.inter[l].begin(), cs.inter[l].end(), m)) v[m] = std::max(v[m], tail(l));
        }
        double V = 0.0;
        for (int m = 0; m < n; ++m) V = std::max(V, static_cast<double>(fd[m]));
        for (int k = j; k < ell; ++k) V = std::max(V, tail(k));
        double vmaxJ = 0.0;
        for (int l : cs.cliques[j]) vmaxJ = std::max(vmaxJ, v[l]);
        const double Jj = static_cast<double>(cs.cliques[j].size());
        const double head = (Jj / 2.0 + 2.0) * std::log(2.0) + std::log(l2) + std::log(in.p_norm) + std::log(static_cast<double>(n)) +
                            std::log(pi2) - std::log(in.epsilon);
        DetailedBound b;
        b.log_rhs_separated = head + 2.0 * std::log(vmaxJ);
        for (int m = 0; m < n; ++m) b.log_rhs_separated += std::log(v[m] + 2.0);
        b.log_rhs_equivcond = std::log(2.0 * pi2 * n) + 2.0 * std::log(V);
        b.log_rhs_uniform = head + (Jj + 2.0) * std::log(V + 2.0);
        const double lr = std::max(b.log_rhs_separated, b.log_rhs_equivcond);
        b.r_min = std::max(0.0, std::ceil(r_from_log_rhs(lr) - 2.0));
        b.r_min_uniform = std::max(0.0, std::ceil(r_from_log_rhs(std::max(b.log_rhs_uniform, b.log_rhs_equivcond)) - 2.0));
        b.effcond_max = V * V / ((b.r_min + 2.0) * (b.r_min + 2.0));
        out.push_back(b);
    }
    return out;
}

// ---------- sparse Putinar ----------

struct PutinarClique {
    int Jsize = 1;
    double c = 1.0;   // Lojasiewicz constant
    double L = 1.0;   // Lojasiewicz exponent
    double deg_p = 1.0;
    double max_deg_g = 1.0;
    std::vector<int> inter_sizes;  // |inter_i| for i >= j
};

struct PutinarInputs {
    std::vector<PutinarClique> cliques;
    int ell = 2;
    int kbar = 1;
    double sum_norm = 1.0;  // sum_i ||p_i||
    double sum_lip = 1.0;   // sum_i lip p_i
    double epsilon = 1.0;
    double Cd = 1.0, Cm = 1.0, Cf = 1.0, Cjac = 1.0;
};

struct PutinarBound {
    double log_C1 = 0.0, log_C2 = 0.0, log_C = 0.0;
    double C = 0.0;
    int C_binding = 1;
    double log_rhs1 = 0.0, log_rhs2 = 0.0;
    double rhs1 = 0.0, rhs2 = 0.0;  // right-hand sides for (r+2)^2
    int binding = 1;
    double r_min = 0.0;
    double eps_exponent1 = 0.0, eps_exponent2 = 0.0;  // (r+2)^2 ~ eps^{-exponent}
};

inline std::vector<PutinarBound> putinar_bound(const PutinarInputs& in) {
    if (!(in.epsilon > 0)) throw InputError("epsilon must be positive");
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double l = in.ell;
    std::vector<PutinarBound> out;
    for (const auto& q : in.cliques) {
        if (q.c < 1.0 || q.L < 1.0) throw InputError("Lojasiewicz constants must be at least 1");
        const double L = q.L, J = q.Jsize;
        const double E = (2.0 * L + J + 2.0) * (1.0 + 8.0 * L / 3.0);
        PutinarBound b;
        b.log_C1 = std::log(2.0 * pi2) + (1.0 + 16.0 * L / 3.0) * std::log(J) + 2.0 * std::log(in.Cd) +
                   (16.0 * L / 3.0) * std::log(in.Cjac) + (1.0 + 24.0 * L) * std::log(2.0) +
                   ((16.0 + 8.0 * l) * L + 2.0) / 3.0 * std::log(3.0) - (2.0 / 3.0) * std::log(static_cast<double>(in.kbar)) +
                   (8.0 / 3.0) * std::log(q.c) + 2.0 * std::log(q.max_deg_g) + 8.0 * L * std::log(2.0 * (l + 2.0));
        double s = 0.0;
        for (int t : q.inter_sizes) s += std::pow(static_cast<double>(t), 2.0 * E);
        b.log_C2 = std::log(in.Cf) + E * std::log(in.Cjac * in.Cm) + std::log(J) + std::log(pi2) +
                   (4.0 * L + J / 2.0 + 1.0 + (1.0 + (4.0 * L + 1.0) / 3.0) * E) * std::log(2.0) +
                   (l * (L + 1.0) + E) * std::log(3.0) + (1.0 + L + (4.0 * L + 1.0) / 3.0 * E) * std::log(l + 2.0) +
                   std::log(static_cast<double>(in.kbar)) + (1.0 + 0.75 * E) * std::log(q.c) + std::log(s) +
                   E * std::log(q.max_deg_g + 1.0);
        b.C_binding = b.log_C1 >= b.log_C2 ? 1 : 2;
        b.log_C = std::max(b.log_C1, b.log_C2);
        b.C = std::exp(b.log_C);
        b.eps_exponent1 = 1.0 + L + (4.0 * L + 1.0) / 3.0 * E;
        b.eps_exponent2 = 2.0 * (12.0 * L + 1.0) / 3.0;
        const double dl = std::log(q.deg_p * in.sum_lip);
        b.log_rhs1 = b.log_C + std::log(4.0 * (l + 2.0)) + (L + 1.0) * std::log(in.sum_norm) + E * dl -
                     b.eps_exponent1 * std::log(in.epsilon);
        b.log_rhs2 = b.log_C + 2.0 * ((4.0 * L + 1.0) / 3.0 * std::log(in.sum_norm) + (8.0 * L / 3.0) * dl) -
                     b.eps_exponent2 * std::log(in.epsilon);
        b.rhs1 = std::exp(b.log_rhs1);
        b.rhs2 = std::exp(b.log_rhs2);
        b.binding = b.log_rhs1 >= b.log_rhs2 ? 1 : 2;
        b.r_min = std::max(0.0, std::ceil(r_from_log_rhs(std::max(b.log_rhs1, b.log_rhs2)) - 2.0));
        out.push_back(b);
    }
    return out;
}

// ---------- complexity comparison ----------

// lgamma(z + a) - lgamma(z); the Stirling series avoids cancellation once z dwarfs a
inline double lgamma_shift(double z, double a) {
    if (z < 1e6 || a * a > 1e-4 * z) return std::lgamma(z + a) - std::lgamma(z);
    return a * std::log(z) + a * (a - 1.0) / (2.0 * z) - a * (a - 1.0) * (2.0 * a - 1.0) / (12.0 * z * z);
}

// log C(y + k, y) for real arguments via log-gamma; k is passed separately
// because y + k - y loses k entirely once y is large
inline double log_binom_plus(double y, double k) {
    if (y > k) return lgamma_shift(y + 1.0, k) - std::lgamma(k + 1.0);
    return lgamma_shift(k + 1.0, y) - std::lgamma(y + 1.0);
}

inline double log_binom(double x, double y) { return log_binom_plus(y, x - y); }

inline double log_B_dense(int n, double C, double eps) { return log_binom_plus(C / std::sqrt(eps), n); }

inline double log_B_sparse(int ell, int J, double Cp, double exponent, double eps) {
    return std::log(static_cast<double>(ell)) + log_binom_plus(J * Cp * std::pow(eps, -exponent), J);
}

inline double schm_exponent(int J) { return (J + 3.0) / 2.0; }
inline double put_exponent_discussion(int J) { return 26.0 / 3.0 + 5.0 * J / 3.0; }
// r exponent obtained by putting L = 1 into the two Putinar conditions
inline double put_exponent_theorem(int J) {
    const double E = (J + 4.0) * 11.0 / 3.0;
    return std::max(2.0 + 5.0 / 3.0 * E, 26.0 / 3.0) / 2.0;
}

inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / den;
}

struct CompareRow {
    double epsilon = 0.0;
    double log_dense = 0.0, log_schm = 0.0, log_put_discussion = 0.0, log_put_theorem = 0.0;
    double log_ratio_schm = 0.0, log_ratio_put = 0.0;
};

struct CompareReport {
    int n = 0, J = 0, ell = 0;
    double C = 1.0, Cp = 1.0;
    std::vector<CompareRow> rows;
    double slope_schm = 0.0, predicted_schm = 0.0;
    double slope_put = 0.0, predicted_put = 0.0;
    double exponent_put_discussion = 0.0, exponent_put_theorem = 0.0;
    bool sparse_schm_wins = false, sparse_put_wins = false;  // strict thresholds, every clique size
};

inline CompareReport complexity_compare(int n, const std::vector<int>& clique_sizes, int ell, const std::vector<double>& eps,
                                        double C = 1.0, double Cp = 1.0) {
    if (clique_sizes.empty()) throw InputError("no clique sizes");
    if (n <= 0 || ell <= 0 || !(C > 0) || !(Cp > 0)) throw InputError("comparison inputs must be positive");
    CompareReport r;
    r.n = n;
    r.ell = ell;
    r.C = C;
    r.Cp = Cp;
    r.J = *std::max_element(clique_sizes.begin(), clique_sizes.end());
    const int J = r.J;
    r.exponent_put_discussion = put_exponent_discussion(J);
    r.exponent_put_theorem = put_exponent_theorem(J);
    std::vector<double> lx, ys, yp;
    for (double e : eps) {
        if (!(e > 0)) throw InputError("epsilon values must be positive");
        CompareRow row;
        row.epsilon = e;
        row.log_dense = log_B_dense(n, C, e);
        row.log_schm = log_B_sparse(ell, J, Cp, schm_exponent(J), e);
        row.log_put_discussion = log_B_sparse(ell, J, Cp, r.exponent_put_discussion, e);
        row.log_put_theorem = log_B_sparse(ell, J, Cp, r.exponent_put_theorem, e);
        row.log_ratio_schm = row.log_schm - row.log_dense;
        row.log_ratio_put = row.log_put_discussion - row.log_dense;
        lx.push_back(std::log(e));
        ys.push_back(row.log_ratio_schm);
        yp.push_back(row.log_ratio_put);
        r.rows.push_back(row);
    }
    r.slope_schm = eps.size() >= 2 ? ls_slope(lx, ys) : std::numeric_limits<double>::quiet_NaN();
    r.slope_put = eps.size() >= 2 ? ls_slope(lx, yp) : std::numeric_limits<double>::quiet_NaN();
    r.predicted_schm = 0.5 * (n - J * (J + 3.0));
    r.predicted_put = n / 2.0 - J * r.exponent_put_discussion;
    r.sparse_schm_wins = true;
    r.sparse_put_wins = true;
    for (int s : clique_sizes) {
        r.sparse_schm_wins = r.sparse_schm_wins && n > s * (s + 3);
        r.sparse_put_wins = r.sparse_put_wins && n / 2.0 > s * put_exponent_discussion(s);
    }
    return r;
}

struct BinomRatioReport {
    std::vector<double> epsilon;
    std::vector<double> log_ratio;
    std::vector<double> statistic;  // log_ratio / ((cq - ap) log eps)
    double slope = 0.0;              // d log_ratio / d log eps, expected (cq - ap)
    double limit = 1.0;
    bool bounded = false;
    bool trending = false;           // |statistic - 1| shrinks as eps decreases
};

inline BinomRatioReport binom_log_ratio_slope(double a, double b, double c, double d, double p, double q,
                                              std::vector<double> eps, double envelope = 10.0) {
    if (!(a > 0 && b > 0 && c > 0 && d > 0 && p > 0 && q > 0)) throw InputError("a, b, c, d, p, q must be positive");
    const double k = c * q - a * p;
    if (k == 0.0) throw InputError("cq - ap must be nonzero");
    std::sort(eps.begin(), eps.end(), std::greater<>());
    BinomRatioReport r;
    std::vector<double> lx;
    for (double e : eps) {
        if (!(e > 0 && e < 1)) throw InputError("epsilon values must lie in (0,1)");
        const double x = b * std::pow(e, -p), y = d * std::pow(e, -q);
        const double lr = log_binom_plus(x, a) - log_binom_plus(y, c);
        r.epsilon.push_back(e);
        r.log_ratio.push_back(lr);
        r.statistic.push_back(lr / (k * std::log(e)));
        lx.push_back(std::log(e));
    }
    r.slope = eps.size() >= 2 ? ls_slope(lx, r.log_ratio) : std::numeric_limits<double>::quiet_NaN();
    r.bounded = std::all_of(r.statistic.begin(), r.statistic.end(), [&](double s) { return std::abs(s) <= envelope; });
    r.trending = true;
    for (std::size_t i = 1; i < r.statistic.size(); ++i)
        if (std::abs(r.statistic[i] - 1.0) > std::abs(r.statistic[i - 1] - 1.0) + 1e-12) r.trending = false;
    return r;
}

} // namespace sparsepos
