#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's numerical routines beyond container types.

#include "instances.hpp"
#include "sparsepos/poly.hpp"
#include "sparsepos/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <vector>

namespace testing_oracles {

using namespace sparsepos;

// random monomial-basis polynomial, per-variable degree <= maxdeg
inline SparsePoly random_poly(std::mt19937_64& rng, int n, int maxdeg, int nterms) {
    std::uniform_real_distribution<double> U(-1, 1);
    SparsePoly p(n);
    for (int t = 0; t < nterms; ++t) {
        MultiIndex I(static_cast<std::size_t>(n));
        for (auto& v : I) v = static_cast<int>(rng() % static_cast<std::uint64_t>(maxdeg + 1));
        p.add_term(I, U(rng));
    }
    return p;
}

// random polynomial with fulldeg <= r
inline SparsePoly random_poly_in(std::mt19937_64& rng, const MultiIndex& r, int nterms) {
    std::uniform_real_distribution<double> U(-1, 1);
    SparsePoly p(static_cast<int>(r.size()));
    for (int t = 0; t < nterms; ++t) {
        MultiIndex I(r.size());
        for (std::size_t k = 0; k < r.size(); ++k) I[k] = static_cast<int>(rng() % static_cast<std::uint64_t>(r[k] + 1));
        p.add_term(I, U(rng));
    }
    p.add_term(MultiIndex(r.size(), 0), 0.25);
    return p;
}

// max |coefficient difference|, after bringing q into p's basis
inline double coeff_dist(const SparsePoly& p, const SparsePoly& q) {
    const SparsePoly qq = to_basis(q, p.basis());
    std::set<MultiIndex> keys;
    for (const auto& [I, c] : p.terms()) keys.insert(I);
    for (const auto& [I, c] : qq.terms()) keys.insert(I);
    double d = 0.0;
    for (const auto& I : keys) d = std::max(d, std::abs(p.coeff(I) - qq.coeff(I)));
    return d;
}

inline double cheb_T(int k, double x) { return std::cos(k * std::acos(std::clamp(x, -1.0, 1.0))); }

// evaluation straight from the definition: x^I or prod cos(i_k acos x_k)
inline double eval_monomial(const SparsePoly& p, const std::vector<double>& x) {
    long double s = 0.0;
    for (const auto& [I, c] : p.terms()) {
        long double t = c;
        for (std::size_t k = 0; k < I.size(); ++k)
            t *= p.basis() == Basis::Monomial ? std::pow(x[k], I[k]) : cheb_T(I[k], x[k]);
        s += t;
    }
    return static_cast<double>(s);
}

// running intersection property, read literally: for every j >= 2 there is
// s < j with J_j cap (J_1 u ... u J_{j-1}) inside J_s
inline bool rip_literal(const std::vector<Clique>& cs) {
    for (std::size_t j = 1; j < cs.size(); ++j) {
        std::set<int> before;
        for (std::size_t k = 0; k < j; ++k) before.insert(cs[k].begin(), cs[k].end());
        std::vector<int> inter;
        for (int v : cs[j])
            if (before.count(v)) inter.push_back(v);
        bool found = false;
        for (std::size_t s = 0; s < j && !found; ++s) {
            std::set<int> S(cs[s].begin(), cs[s].end());
            found = std::all_of(inter.begin(), inter.end(), [&](int v) { return S.count(v) > 0; });
        }
        if (!found) return false;
    }
    return true;
}

// lexicographically first permutation of the (deduplicated) cliques with RIP
inline std::vector<Clique> first_rip_permutation(std::vector<Clique> cs) {
    for (auto& c : cs) {
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
    }
    std::sort(cs.begin(), cs.end());
    cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
    do {
        if (rip_literal(cs)) return cs;
    } while (std::next_permutation(cs.begin(), cs.end()));
    return {};
}

inline double lambda_ref(int k, int r) {
    if (k == 0) return 1.0;
    const double a = std::numbers::pi / (r + 2);
    return ((r + 2 - k) * std::cos(k * a) + std::sin(k * a) / std::tan(a)) / (r + 2);
}

// sum over I <= r of 2^{w(I)} lambda_I T_I(x) T_I(y)
inline double kernel_sum(const MultiIndex& r, const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = r.size();
    MultiIndex I(n, 0);
    double s = 0.0;
    while (true) {
        double t = 1.0;
        for (std::size_t k = 0; k < n; ++k)
            t *= (I[k] ? 2.0 : 1.0) * lambda_ref(I[k], r[k]) * cheb_T(I[k], x[k]) * cheb_T(I[k], y[k]);
        s += t;
        std::size_t k = 0;
        while (k < n && ++I[k] > r[k]) I[k++] = 0;
        if (k == n) break;
    }
    return s;
}

inline testing_instances::ChainInstance chain_instance(std::uint64_t seed) { return testing_instances::random_chain(seed); }

} // namespace testing_oracles
