// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "sparsepos/sparsepos.hpp"

#include "instances.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace sparsepos;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = o.pass && secs <= budget_s;
    if (!ok) ++failures;
    std::printf("[%s] %2d %-28s %7.2fs (budget %gs)  %s\n", ok ? "PASS" : "FAIL", id, name, secs, budget_s, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char b[128];
    std::snprintf(b, sizeof b, f, a);
    return b;
}

SparsePoly random_in(std::mt19937_64& rng, const MultiIndex& r, int nterms, Basis b = Basis::Chebyshev) {
    std::uniform_real_distribution<double> U(-1, 1);
    SparsePoly p(static_cast<int>(r.size()), b);
    for (int t = 0; t < nterms; ++t) {
        MultiIndex I(r.size());
        for (std::size_t k = 0; k < r.size(); ++k) I[k] = static_cast<int>(rng() % static_cast<std::uint64_t>(r[k] + 1));
        p.add_term(I, U(rng));
    }
    return p;
}

double cheb_T(int k, double x) { return std::cos(k * std::acos(std::clamp(x, -1.0, 1.0))); }

// plain tensor-grid evaluation, independent of the library's Clenshaw code
double eval_direct(const SparsePoly& p, const std::vector<double>& x) {
    double s = 0;
    for (const auto& [I, c] : p.terms()) {
        double t = c;
        for (std::size_t k = 0; k < I.size(); ++k) t *= p.basis() == Basis::Chebyshev ? cheb_T(I[k], x[k]) : std::pow(x[k], I[k]);
        s += t;
    }
    return s;
}

MultiIndex elementwise_max(MultiIndex a, const MultiIndex& b) {
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::max(a[k], b[k]);
    return a;
}

template <class F>
void for_grid(int n, int m, F&& f) {
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    std::vector<double> x(static_cast<std::size_t>(n));
    while (true) {
        for (int k = 0; k < n; ++k) x[k] = -1.0 + 2.0 * idx[k] / (m - 1);
        f(x);
        int k = 0;
        while (k < n && ++idx[k] == m) idx[k++] = 0;
        if (k == n) break;
    }
}

std::vector<testing_instances::ChainInstance> chain_family() {
    std::vector<testing_instances::ChainInstance> v;
    for (std::uint64_t s = 1000; s < 1020; ++s) v.push_back(testing_instances::random_chain(s));
    return v;
}

} // namespace

int main() {
    const auto family = chain_family();
    std::vector<CertifyResult> certified;

    criterion(1, "eigenvalue laws", 1.0, [] {
        int bad = 0;
        double worst = 0;
        for (int r = 1; r <= 50; ++r)
            for (int k = 0; k <= r; ++k) {
                const double l = lambda_1d(k, r);
                const double cap = kPi * kPi * k * k / ((r + 2.0) * (r + 2.0));
                if (!(l > 0.0 && l <= 1.0 && 1.0 - l <= cap)) ++bad;
                worst = std::max(worst, (1.0 - l) - cap);
            }
        return Outcome{bad == 0, "violations " + std::to_string(bad) + fmt(", max (1-lambda)-bound %.3g", worst)};
    });

    criterion(2, "kernel nonnegativity", 5.0, [] {
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> U(-1, 1);
        double mn = INFINITY;
        for (const MultiIndex& r : std::vector<MultiIndex>{{3}, {8}, {3, 4}, {5, 5, 2}}) {
            JacksonSpec spec(r);
            std::vector<double> x(r.size()), y(r.size());
            for (int t = 0; t < 10000; ++t) {
                for (std::size_t k = 0; k < r.size(); ++k) {
                    x[k] = U(rng);
                    y[k] = U(rng);
                }
                mn = std::min(mn, kernel_eval(spec, x, y));
            }
        }
        return Outcome{mn >= -1e-12, fmt("min kernel value %.3e", mn)};
    });

    criterion(3, "operator roundtrip/perturbation", 20.0, [] {
        std::mt19937_64 rng(3);
        double rt = 0;
        for (int t = 0; t < 50; ++t) {
            const int n = 1 + t % 3;
            MultiIndex r(static_cast<std::size_t>(n));
            for (auto& v : r) v = 1 + static_cast<int>(rng() % 8);
            JacksonSpec spec(r);
            auto p = random_in(rng, r, 6);
            auto back = jackson_apply_inverse(spec, jackson_apply(spec, p));
            for (const auto& [I, c] : p.terms()) rt = std::max(rt, std::abs(back.coeff(I) - c));
            for (const auto& [I, c] : back.terms()) rt = std::max(rt, std::abs(p.coeff(I) - c));
        }
        // perturbation: p scaled into [0,1], r large enough for effcond
        int checked = 0, violated = 0, skipped = 0;
        double worst_ratio = 0;
        for (int t = 0; t < 50; ++t) {
            const int n = 1 + t % 2;
            MultiIndex d(static_cast<std::size_t>(n));
            for (auto& v : d) v = 1 + static_cast<int>(rng() % 2);
            auto p = random_in(rng, d, 4);
            p.add_term(MultiIndex(static_cast<std::size_t>(n), 0), 0.0);
            double lo = INFINITY, hi = -INFINITY;
            for_grid(n, 61, [&](const std::vector<double>& x) {
                const double v = eval_direct(p, x);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            });
            // T_k extrema sit on the grid only approximately; keep a margin
            const double span = std::max(hi - lo, 1e-9);
            p = (p + (-lo + 0.1 * span)) * (1.0 / (1.2 * span));
            MultiIndex r(static_cast<std::size_t>(n));
            for (int k = 0; k < n; ++k) r[k] = static_cast<int>(std::ceil(d[k] * kPi * std::sqrt(2.0 * n))) + static_cast<int>(rng() % 6);
            JacksonSpec spec(r);
            PerturbationBound b;
            try {
                b = inverse_perturbation_bound(spec, p);
            } catch (const EffcondViolated&) {
                ++skipped;
                continue;
            }
            auto q = jackson_apply_inverse(spec, p);
            double meas = 0;
            for_grid(n, 30, [&](const std::vector<double>& x) { meas = std::max(meas, std::abs(eval_direct(q, x) - eval_direct(p, x))); });
            ++checked;
            if (meas > b.bound) ++violated;
            worst_ratio = std::max(worst_ratio, meas / b.bound);
        }
        const bool ok = rt <= 1e-12 && violated == 0 && checked >= 40;
        return Outcome{ok, fmt("roundtrip err %.2e", rt) + ", perturbation checked " + std::to_string(checked) + " skipped " +
                               std::to_string(skipped) + fmt(", max measured/bound %.3g", worst_ratio)};
    });

    criterion(4, "Karlin-Shapley", 10.0, [] {
        std::mt19937_64 rng(4);
        std::uniform_real_distribution<double> U(-1, 1);
        auto gen = [] {
            SparsePoly g(1);
            g.add_term({0}, 1.0);
            g.add_term({2}, -1.0);
            return g;
        }();
        double worst = 0;
        for (int t = 0; t < 100; ++t) {
            const int d = 1 + static_cast<int>(rng() % 6);
            SparsePoly s0(1), s1(1);
            for (int k = 0; k < 2; ++k) {
                SparsePoly a(1), b(1);
                for (int i = 0; i <= d; ++i) a.add_term({i}, U(rng));
                for (int i = 0; i < d; ++i) b.add_term({i}, U(rng));
                s0 = s0 + a * a;
                s1 = s1 + b * b;
            }
            auto p = s0 + s1 * gen;
            auto ks = karlin_shapley(p, -1, 1);
            SparsePoly a0(1), a1(1);
            for (const auto& q : ks.sigma0) a0 = a0 + to_monomial(q) * to_monomial(q);
            for (const auto& q : ks.sigma1) a1 = a1 + to_monomial(q) * to_monomial(q);
            SparsePoly rec = ks.odd ? SparsePoly(1) : a0 + a1 * gen;
            if (ks.odd) {
                SparsePoly yp(1), ym(1);
                yp.add_term({0}, 1.0);
                yp.add_term({1}, 1.0);
                ym.add_term({0}, 1.0);
                ym.add_term({1}, -1.0);
                rec = yp * a0 + ym * a1;
            }
            double diff = 0;
            for (int i = 0; i <= 2 * d; ++i) diff = std::max(diff, std::abs(rec.coeff({i}) - p.coeff({i})));
            worst = std::max(worst, diff / p.max_abs_coeff());
        }
        return Outcome{worst <= 1e-9, fmt("max relative residual %.2e over 100", worst)};
    });

    criterion(5, "kernel certificates", 60.0, [] {
        std::mt19937_64 rng(5);
        double worst = 0;
        int fails = 0;
        for (int t = 0; t < 50; ++t) {
            const int n = 1 + t % 3;
            MultiIndex r(static_cast<std::size_t>(n));
            for (auto& v : r) v = 1 + static_cast<int>(rng() % 8);
            MultiIndex half(r.size());
            for (std::size_t k = 0; k < r.size(); ++k) half[k] = r[k] / 2;
            auto a = random_in(rng, half, 5, Basis::Monomial);
            auto b = random_in(rng, half, 3, Basis::Monomial);
            auto q = a * a + b * b + 0.05;
            auto c = kernel_certificate(q, JacksonSpec(r));
            auto v = verify(c, 1e-8);
            if (!v.pass) ++fails;
            worst = std::max(worst, v.residual);
        }
        return Outcome{fails == 0, "failed " + std::to_string(fails) + "/50" + fmt(", max residual %.2e", worst)};
    });

    criterion(6, "decomposition properties", 60.0, [&] {
        int bad = 0;
        std::string why;
        double worst_sum = 0, worst_min = INFINITY;
        for (const auto& in : family) {
            CliqueStructure cs(in.n, in.cliques);
            auto d = sparse_decompose(in.parts, cs, in.epsilon);
            const int ell = cs.size();
            double norm_sum = 0;
            std::vector<double> lips;
            for (const auto& p : in.parts) {
                auto b = box_functionals(p, 2);
                norm_sum += b.sup_norm_upper;
                lips.push_back(b.lip);
            }
            SparsePoly total(in.n, Basis::Chebyshev);
            bool ok = true;
            for (int j = 0; j < ell; ++j) {
                total = total + to_chebyshev(d.h[j]);
                auto b = box_functionals(d.h[j], 2);
                const double gm = grid_min(d.h[j], cs.cliques[j], 20) - d.eta;
                worst_min = std::min(worst_min, gm);
                ok = ok && gm >= -1e-6 && support_within(d.h[j], cs.cliques[j]);
                ok = ok && b.sup_norm_upper <= 3.0 * std::ldexp(1.0, ell - 1) * norm_sum;
                double tail = 0;
                for (int k = j; k < ell; ++k) tail += lips[k];
                ok = ok && b.lip <= 3.0 * tail * 1.05;
                auto fd = fulldeg(to_chebyshev(d.h[j]));
                auto pd = fulldeg(to_chebyshev(in.parts[j]));
                for (int v : cs.cliques[j]) {
                    int cap = pd[v];
                    for (int k = std::max(j, 1); k < ell; ++k)
                        if (std::binary_search(cs.inter[k].begin(), cs.inter[k].end(), v)) cap = std::max(cap, d.D[k][ell - 1]);
                    ok = ok && fd[v] <= cap;
                }
            }
            const SparsePoly fc = to_chebyshev(in.f);
            double diff = 0;
            for (const auto& [I, c] : (total - fc).terms()) diff = std::max(diff, std::abs(c));
            diff /= fc.max_abs_coeff();
            worst_sum = std::max(worst_sum, diff);
            if (!ok || diff > 1e-10) ++bad;
        }
        return Outcome{bad == 0, "instances failing " + std::to_string(bad) + "/20" + fmt(", max sum err %.2e", worst_sum) +
                                     fmt(", min(h-eta) %.3g", worst_min)};
    });

    criterion(7, "end-to-end sparse Schmuedgen", 120.0, [&] {
        int bad = 0, bound_bad = 0, max_r = 0;
        double worst = 0, min_slack = INFINITY;
        for (const auto& in : family) {
            CertifyResult res;
            try {
                res = schmuedgen_certify(make_problem(in.f, {}, &in.cliques, in.epsilon));
            } catch (const std::exception&) {
                ++bad;
                continue;
            }
            int r_inst = 0;
            for (const auto& r : res.cert.r_used)
                for (int v : r) r_inst = std::max(r_inst, v);
            bool ok = res.report.pass && res.report.residual <= 1e-6 && r_inst <= 32;
            for (const auto& e : res.cert.entries) ok = ok && support_within(entry_polynomial(e, in.n), in.cliques[e.clique]);
            worst = std::max(worst, res.report.residual);
            max_r = std::max(max_r, r_inst);
            // theoretical bound from the bounds module
            SchmuedgenInputs si;
            si.n = in.n;
            si.ell = static_cast<int>(in.cliques.size());
            si.Jbar = 0;
            for (const auto& c : in.cliques) si.Jbar = std::max(si.Jbar, static_cast<int>(c.size()));
            si.Lbar = 0;
            si.M = 1;
            for (const auto& p : in.parts) {
                si.Lbar += box_functionals(p, 2).lip;
                for (int v : fulldeg(to_chebyshev(p))) si.M = std::max(si.M, v);
            }
            si.p_norm = to_chebyshev(in.f).sum_abs_coeff();
            si.epsilon = in.epsilon;
            const double rb = schmuedgen_bound_simple(si).r_min;
            if (!(rb >= r_inst)) ++bound_bad;
            min_slack = std::min(min_slack, rb / std::max(r_inst, 1));
            if (!ok) ++bad;
            certified.push_back(std::move(res));
        }
        return Outcome{bad == 0 && bound_bad == 0, "failed " + std::to_string(bad) + "/20, max r " + std::to_string(max_r) +
                                                       fmt(", max residual %.2e", worst) + ", bound below r in " +
                                                       std::to_string(bound_bad) + fmt(", min bound/r %.3g", min_slack)};
    });

    criterion(8, "ball rewrite", 10.0, [&] {
        std::vector<Certificate> certs;
        for (const auto& r : certified) certs.push_back(r.cert);
        std::mt19937_64 rng(8);
        for (int t = 0; t < 10; ++t) {
            const int n = 2 + t % 2;
            MultiIndex r(static_cast<std::size_t>(n), 2 + 2 * static_cast<int>(rng() % 2));
            MultiIndex half(r.size());
            for (std::size_t k = 0; k < r.size(); ++k) half[k] = r[k] / 2;
            auto a = random_in(rng, half, 4, Basis::Monomial);
            certs.push_back(kernel_certificate(a * a + 0.1, JacksonSpec(r)));
        }
        if (certs.size() < 30) return Outcome{false, "end-to-end certificates missing"};
        int bad = 0;
        double worst = 0;
        for (const auto& c : certs) {
            auto b = preordering_to_qm(c);
            auto v = verify(b, 1e-10);
            worst = std::max(worst, v.residual);
            bool ok = v.pass;
            for (std::size_t j = 0; j < c.cliques.size(); ++j) {
                bool rewritten = false;
                for (const auto& e : c.entries) rewritten = rewritten || (e.clique == static_cast<int>(j) && !e.K.empty());
                if (c.cliques[j].size() == 1) rewritten = false;
                // measured fulldeg over the clique's entries, before and after
                MultiIndex before(static_cast<std::size_t>(c.n), 0), after(static_cast<std::size_t>(c.n), 0);
                for (const auto& e : c.entries)
                    if (e.clique == static_cast<int>(j)) before = elementwise_max(before, fulldeg(entry_polynomial(e, c.n)));
                for (const auto& e : b.entries)
                    if (e.clique == static_cast<int>(j)) after = elementwise_max(after, fulldeg(entry_polynomial(e, c.n)));
                for (int v : c.cliques[j]) {
                    const int want = rewritten ? 2 : 0;
                    ok = ok && b.r_used[j][v] - c.r_used[j][v] == want;
                    ok = ok && after[v] <= before[v] + want;
                }
            }
            if (!ok) ++bad;
        }
        return Outcome{bad == 0, "failed " + std::to_string(bad) + "/" + std::to_string(certs.size()) +
                                     fmt(", max residual %.2e", worst)};
    });

    criterion(9, "asymptotics", 5.0, [] {
        const std::vector<double> eps{1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
        bool ok = true;
        std::string d;
        for (auto [n, J] : std::vector<std::pair<int, int>>{{10, 2}, {12, 2}, {12, 3}}) {
            auto r = complexity_compare(n, {J, J}, 2, eps, 100.0, 100.0);
            auto r1 = complexity_compare(n, {J, J}, 2, eps, 1.0, 1.0);
            const bool hit = std::abs(r.slope_schm - r.predicted_schm) <= 0.1 * std::max(1.0, std::abs(r.predicted_schm));
            ok = ok && hit;
            char b[160];
            std::snprintf(b, sizeof b, "(%d,%d) slope %.3f vs %.1f [C=1: %.3f]; ", n, J, r.slope_schm, r.predicted_schm, r1.slope_schm);
            d += b;
        }
        auto br = binom_log_ratio_slope(1, 1, 2, 1, 1, 1, {1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
        ok = ok && br.bounded && br.trending;
        d += fmt("binomial ratio statistic %.3f", br.statistic.front()) + fmt(" -> %.3f", br.statistic.back());
        return Outcome{ok, d};
    });

    criterion(10, "RIP oracle equivalence", 10.0, [] {
        // all ordered lists of 1..4 nonempty subsets of 6 variables
        const int N = 6, S = (1 << N) - 1;
        std::vector<Clique> as_clique(static_cast<std::size_t>(S + 1));
        for (int m = 1; m <= S; ++m)
            for (int v = 0; v < N; ++v)
                if (m >> v & 1) as_clique[m].push_back(v);
        auto oracle = [](const int* m, int len) {
            int before = 0;
            for (int j = 0; j < len; ++j) {
                const int inter = m[j] & before;
                bool found = j == 0;
                for (int s = 0; s < j && !found; ++s) found = (inter & ~m[s]) == 0;
                if (!found) return false;
                before |= m[j];
            }
            return true;
        };
        long long lists = 0, mismatches = 0;
        std::vector<Clique> cs;
        int m[4];
        for (int len = 1; len <= 4; ++len) {
            cs.resize(static_cast<std::size_t>(len));
            std::fill(m, m + len, 1);
            for (int k = 0; k < len; ++k) cs[k] = as_clique[1];
            while (true) {
                ++lists;
                if (rip_check(cs) != oracle(m, len)) ++mismatches;
                int k = 0;
                while (k < len && ++m[k] > S) {
                    m[k] = 1;
                    cs[k] = as_clique[1];
                    ++k;
                }
                if (k == len) break;
                cs[k] = as_clique[m[k]];
            }
        }
        return Outcome{mismatches == 0, std::to_string(lists) + " lists, mismatches " + std::to_string(mismatches)};
    });

    std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
