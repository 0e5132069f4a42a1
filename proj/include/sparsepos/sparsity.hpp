#pragma once

#include "sparsepos/errors.hpp"
#include "sparsepos/poly.hpp"

#include <algorithm>
#include <functional>
#include <iterator>
#include <set>
#include <string>
#include <vector>

namespace sparsepos {

using Clique = std::vector<int>;  // sorted ascending, 0-based

inline std::string clique_str(const Clique& c) {
    std::string s = "{";
    for (std::size_t k = 0; k < c.size(); ++k) s += (k ? "," : "") + std::to_string(c[k] + 1);
    return s + "}";
}

inline Clique normalize_clique(Clique c) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
}

inline bool is_subset(const Clique& a, const Clique& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

inline Clique set_union(const Clique& a, const Clique& b) {
    Clique u;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(u));
    return u;
}

inline Clique set_intersection(const Clique& a, const Clique& b) {
    Clique u;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(u));
    return u;
}

// J_j ∩ (J_1 ∪ ... ∪ J_{j-1}); the first entry is empty.
inline std::vector<Clique> intersections(const std::vector<Clique>& cliques) {
    std::vector<Clique> out;
    Clique seen;
    for (const auto& c : cliques) {
        out.push_back(set_intersection(c, seen));
        seen = set_union(seen, c);
    }
    return out;
}

// Running intersection property for the given order.
inline bool rip_check(const std::vector<Clique>& cliques) {
    const bool sorted = std::all_of(cliques.begin(), cliques.end(), [](const Clique& c) {
        return std::adjacent_find(c.begin(), c.end(), std::greater_equal<>()) == c.end();
    });
    std::vector<Clique> fixed;
    if (!sorted) {
        fixed = cliques;
        for (auto& c : fixed) c = normalize_clique(c);
    }
    const auto& cs = sorted ? cliques : fixed;
    std::size_t total = 0;
    for (const auto& c : cs) total += c.size();
    Clique seen, inter, next;
    seen.reserve(total);
    next.reserve(total);
    inter.reserve(total);
    for (std::size_t j = 0; j < cs.size(); ++j) {
        const Clique& c = cs[j];
        if (j > 0) {
            inter.clear();
            std::set_intersection(c.begin(), c.end(), seen.begin(), seen.end(), std::back_inserter(inter));
            bool ok = false;
            for (std::size_t s = 0; s < j && !ok; ++s) ok = is_subset(inter, cs[s]);
            if (!ok) return false;
        }
        next.clear();
        std::set_union(seen.begin(), seen.end(), c.begin(), c.end(), std::back_inserter(next));
        seen.swap(next);
    }
    return true;
}

struct CliqueStructure {
    int n = 0;
    std::vector<Clique> cliques;
    std::vector<Clique> inter;  // inter[0] is empty
    bool rip = false;
    bool heuristic = false;     // order found by the spanning-tree heuristic

    CliqueStructure() = default;
    CliqueStructure(int dim, std::vector<Clique> cs) : n(dim) {
        for (auto& c : cs) {
            c = normalize_clique(std::move(c));
            if (c.empty()) throw InputError("empty clique");
            for (int v : c)
                if (v < 0 || v >= n) throw InputError("clique variable " + std::to_string(v + 1) + " out of range");
            cliques.push_back(std::move(c));
        }
        if (cliques.empty()) throw InputError("no cliques");
        inter = intersections(cliques);
        rip = rip_check(cliques);
    }

    int size() const { return static_cast<int>(cliques.size()); }
    int max_clique() const {
        std::size_t m = 0;
        for (const auto& c : cliques) m = std::max(m, c.size());
        return static_cast<int>(m);
    }
};

inline constexpr int kExhaustiveRipLimit = 8;

// Orders an unordered clique family so that RIP holds. Exhaustive
// (lexicographically smallest valid order) for up to 8 cliques, otherwise a
// maximum-weight spanning tree order, flagged as heuristic.
inline CliqueStructure rip_order(int n, std::vector<Clique> cs) {
    for (auto& c : cs) c = normalize_clique(std::move(c));
    std::sort(cs.begin(), cs.end());
    cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
    const int L = static_cast<int>(cs.size());
    if (L == 0) throw InputError("no cliques");

    std::vector<Clique> order;
    bool heuristic = false;
    if (L <= kExhaustiveRipLimit) {
        std::vector<bool> used(static_cast<std::size_t>(L), false);
        std::vector<int> idx;
        // prefix validity only depends on the prefix, so prune on the fly
        std::function<bool(const Clique&)> dfs = [&](const Clique& seen) -> bool {
            if (static_cast<int>(idx.size()) == L) return true;
            for (int c = 0; c < L; ++c) {
                if (used[c]) continue;
                if (!idx.empty()) {
                    Clique in = set_intersection(cs[c], seen);
                    bool ok = false;
                    for (int s : idx)
                        if (is_subset(in, cs[s])) {
                            ok = true;
                            break;
                        }
                    if (!ok) continue;
                }
                used[c] = true;
                idx.push_back(c);
                if (dfs(set_union(seen, cs[c]))) return true;
                idx.pop_back();
                used[c] = false;
            }
            return false;
        };
        if (!dfs({})) {
            std::string all;
            for (const auto& c : cs) all += clique_str(c) + " ";
            throw NoRipOrder("no ordering of " + all + "satisfies the running intersection property");
        }
        for (int i : idx) order.push_back(cs[i]);
    } else {
        heuristic = true;
        std::vector<bool> in(static_cast<std::size_t>(L), false);
        in[0] = true;
        order.push_back(cs[0]);
        for (int step = 1; step < L; ++step) {
            int best = -1;
            std::size_t bw = 0;
            for (int c = 0; c < L; ++c) {
                if (in[c]) continue;
                std::size_t w = 0;
                for (int s = 0; s < L; ++s)
                    if (in[s]) w = std::max(w, set_intersection(cs[c], cs[s]).size());
                if (best < 0 || w > bw) {
                    best = c;
                    bw = w;
                }
            }
            in[best] = true;
            order.push_back(cs[best]);
        }
        if (!rip_check(order)) throw NoRipOrder("heuristic ordering failed for " + std::to_string(L) + " cliques");
    }
    CliqueStructure s(n, order);
    s.heuristic = heuristic;
    return s;
}

struct CspGraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;       // correlative sparsity pattern
    std::vector<std::pair<int, int>> fill_edges;  // added by the chordal extension
    std::vector<int> elimination_order;
    CliqueStructure structure;
};

inline CspGraph csp_graph(const SparsePoly& objective, const std::vector<SparsePoly>& constraints) {
    const int n = objective.dim();
    if (n <= 0) throw InputError("objective has no variables");
    std::vector<std::set<int>> adj(static_cast<std::size_t>(n));
    auto connect = [&](const std::vector<int>& vs) {
        for (std::size_t a = 0; a < vs.size(); ++a)
            for (std::size_t b = a + 1; b < vs.size(); ++b) {
                adj[vs[a]].insert(vs[b]);
                adj[vs[b]].insert(vs[a]);
            }
    };
    for (const auto& [I, c] : objective.terms()) {
        std::vector<int> vs;
        for (int k = 0; k < n; ++k)
            if (I[k]) vs.push_back(k);
        connect(vs);
    }
    for (const auto& g : constraints) {
        if (g.dim() != n) throw DimensionMismatch("constraint dimension differs from objective");
        connect(support(g));
    }
    CspGraph out;
    out.n = n;
    for (int a = 0; a < n; ++a)
        for (int b : adj[a])
            if (a < b) out.edges.emplace_back(a, b);

    // greedy minimum-degree elimination; ties to the smallest index
    auto work = adj;
    std::vector<bool> gone(static_cast<std::size_t>(n), false);
    std::vector<Clique> cand;
    for (int step = 0; step < n; ++step) {
        int v = -1;
        for (int u = 0; u < n; ++u)
            if (!gone[u] && (v < 0 || work[u].size() < work[v].size())) v = u;
        Clique c(work[v].begin(), work[v].end());
        for (std::size_t a = 0; a < c.size(); ++a)
            for (std::size_t b = a + 1; b < c.size(); ++b)
                if (work[c[a]].insert(c[b]).second) {
                    work[c[b]].insert(c[a]);
                    out.fill_edges.emplace_back(std::min(c[a], c[b]), std::max(c[a], c[b]));
                }
        for (int u : c) work[u].erase(v);
        c.push_back(v);
        cand.push_back(normalize_clique(c));
        gone[v] = true;
        out.elimination_order.push_back(v);
    }
    std::sort(out.fill_edges.begin(), out.fill_edges.end());
    std::vector<Clique> maximal;
    for (std::size_t i = 0; i < cand.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < cand.size() && !dominated; ++j)
            if (i != j && is_subset(cand[i], cand[j]) && (cand[i] != cand[j] || j < i)) dominated = true;
        if (!dominated) maximal.push_back(cand[i]);
    }
    out.structure = rip_order(n, maximal);
    return out;
}

// Assigns each term to the first clique containing its support.
inline std::vector<SparsePoly> split_objective(const SparsePoly& f, const CliqueStructure& cs) {
    if (f.dim() != cs.n) throw DimensionMismatch("objective dimension differs from clique structure");
    std::vector<SparsePoly> parts(cs.cliques.size(), SparsePoly(f.dim(), f.basis()));
    for (const auto& [I, c] : f.terms()) {
        Clique sup;
        for (int k = 0; k < f.dim(); ++k)
            if (I[k]) sup.push_back(k);
        std::size_t j = 0;
        while (j < cs.cliques.size() && !is_subset(sup, cs.cliques[j])) ++j;
        if (j == cs.cliques.size()) {
            SparsePoly t = SparsePoly::term(f.dim(), I, c, f.basis());
            throw UnsplittableTerm("term " + to_string(t) + " lies in no clique");
        }
        parts[j].add_term(I, c);
    }
    return parts;
}

struct Constraint {
    SparsePoly g;
    int clique = 0;
};

struct SparseProblem {
    SparsePoly objective;
    std::vector<SparsePoly> parts;
    std::vector<Constraint> constraints;
    CliqueStructure cliques;
    double epsilon = 0.0;
};

// Builds a problem from an objective, optional clique list and constraints.
inline SparseProblem make_problem(const SparsePoly& f, std::vector<SparsePoly> gs, const std::vector<Clique>* given,
                                  double epsilon) {
    SparseProblem p;
    p.objective = f;
    p.epsilon = epsilon;
    if (given) {
        p.cliques = CliqueStructure(f.dim(), *given);
        if (!p.cliques.rip) p.cliques = rip_order(f.dim(), *given);
    } else {
        p.cliques = csp_graph(f, gs).structure;
    }
    p.parts = split_objective(f, p.cliques);
    for (auto& g : gs) {
        auto sup = support(g);
        std::size_t j = 0;
        while (j < p.cliques.cliques.size() && !is_subset(sup, p.cliques.cliques[j])) ++j;
        if (j == p.cliques.cliques.size()) throw UnsplittableTerm("constraint " + to_string(g) + " lies in no clique");
        p.constraints.push_back({std::move(g), static_cast<int>(j)});
    }
    return p;
}

} // namespace sparsepos
