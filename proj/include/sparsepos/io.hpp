#pragma once

#include "sparsepos/certificate.hpp"
#include "sparsepos/errors.hpp"
#include "sparsepos/poly.hpp"
#include "sparsepos/sparsity.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

// JSON exchange formats. Variable and clique indices are 1-based on disk and
// 0-based in memory. Doubles are written in shortest round-trip form, so a
// read after a write reproduces every coefficient bit for bit.

namespace sparsepos::io {

using json = nlohmann::json;

namespace detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
    throw InputError(where + ": " + what);
}

inline const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(where, std::string("missing \"") + key + "\"");
    return *it;
}

inline int as_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(where, "expected an integer");
    return j.get<int>();
}

inline double as_double(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(where, "non-finite number");
    return v;
}

// 1-based index list -> sorted 0-based clique
inline Clique read_indices(const json& j, int n, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of variable indices");
    Clique c;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const int v = as_int(j[i], where + "[" + std::to_string(i) + "]");
        if (v < 1 || v > n) fail(where + "[" + std::to_string(i) + "]", "variable " + std::to_string(v) + " outside 1.." + std::to_string(n));
        c.push_back(v - 1);
    }
    return normalize_clique(std::move(c));
}

inline json write_indices(const std::vector<int>& c) {
    json a = json::array();
    for (int v : c) a.push_back(v + 1);
    return a;
}

} // namespace detail

// ---------- polynomials ----------

inline SparsePoly poly_from_json(const json& j, const std::string& where = "polynomial") {
    using detail::fail;
    const int n = detail::as_int(detail::field(j, "dim", where), where + ".dim");
    if (n < 0) fail(where + ".dim", "negative dimension");
    Basis b = Basis::Monomial;
    if (auto it = j.find("basis"); it != j.end()) {
        if (!it->is_string()) fail(where + ".basis", "expected a string");
        const auto s = it->get<std::string>();
        if (s == "monomial") b = Basis::Monomial;
        else if (s == "chebyshev") b = Basis::Chebyshev;
        else fail(where + ".basis", "unknown basis \"" + s + "\"");
    }
    SparsePoly p(n, b);
    const json& terms = detail::field(j, "terms", where);
    if (!terms.is_array()) fail(where + ".terms", "expected an array");
    std::set<MultiIndex> seen;
    for (std::size_t t = 0; t < terms.size(); ++t) {
        const std::string w = where + ".terms[" + std::to_string(t) + "]";
        const json& e = detail::field(terms[t], "exp", w);
        if (!e.is_array() || static_cast<int>(e.size()) != n)
            throw DimensionMismatch(w + ".exp: expected " + std::to_string(n) + " exponents");
        MultiIndex I;
        for (std::size_t k = 0; k < e.size(); ++k) {
            const int v = detail::as_int(e[k], w + ".exp[" + std::to_string(k) + "]");
            if (v < 0) fail(w + ".exp[" + std::to_string(k) + "]", "negative exponent");
            I.push_back(v);
        }
        if (!seen.insert(I).second) fail(w + ".exp", "duplicate exponent " + index_str(I));
        p.add_term(I, detail::as_double(detail::field(terms[t], "coeff", w), w + ".coeff"));
    }
    return p;
}

inline json poly_to_json(const SparsePoly& p) {
    json terms = json::array();
    for (const auto& [I, c] : p.terms()) terms.push_back({{"exp", I}, {"coeff", c}});
    return {{"dim", p.dim()}, {"basis", basis_name(p.basis())}, {"terms", std::move(terms)}};
}

// ---------- problems ----------

struct ProblemInput {
    SparsePoly objective;
    std::vector<SparsePoly> constraints;
    std::optional<std::vector<Clique>> cliques;
    double epsilon = 0.0;

    SparseProblem build() const {
        return make_problem(objective, constraints, cliques ? &*cliques : nullptr, epsilon);
    }
};

inline ProblemInput problem_from_json(const json& j) {
    ProblemInput in;
    in.objective = poly_from_json(detail::field(j, "objective", "problem"), "objective");
    const int n = in.objective.dim();
    if (auto it = j.find("constraints"); it != j.end()) {
        if (!it->is_array()) detail::fail("constraints", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            auto g = poly_from_json((*it)[i], "constraints[" + std::to_string(i) + "]");
            if (g.dim() != n) throw DimensionMismatch("constraints[" + std::to_string(i) + "]: dim differs from objective");
            in.constraints.push_back(std::move(g));
        }
    }
    if (auto it = j.find("cliques"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) detail::fail("cliques", "expected an array");
        std::vector<Clique> cs;
        for (std::size_t i = 0; i < it->size(); ++i) cs.push_back(detail::read_indices((*it)[i], n, "cliques[" + std::to_string(i) + "]"));
        in.cliques = std::move(cs);
    }
    if (auto it = j.find("epsilon"); it != j.end()) in.epsilon = detail::as_double(*it, "epsilon");
    return in;
}

inline json cliques_to_json(const std::vector<Clique>& cs) {
    json a = json::array();
    for (const auto& c : cs) a.push_back(detail::write_indices(c));
    return a;
}

// ---------- certificates ----------

inline json certificate_to_json(const Certificate& c) {
    json entries = json::array();
    for (const auto& e : c.entries) {
        json sq = json::array();
        for (const auto& q : e.sigma.squares()) sq.push_back(poly_to_json(q));
        entries.push_back({{"clique", e.clique + 1},
                           {"K", detail::write_indices(e.K)},
                           {"generator", e.gen == Generator::Box ? "box" : "ball"},
                           {"squares", std::move(sq)}});
    }
    return {{"target", poly_to_json(c.target)},
            {"cliques", cliques_to_json(c.cliques)},
            {"r_used", c.r_used},
            {"entries", std::move(entries)},
            {"residual", c.residual}};
}

inline Certificate certificate_from_json(const json& j) {
    using detail::fail;
    Certificate c;
    c.target = poly_from_json(detail::field(j, "target", "certificate"), "target");
    c.n = c.target.dim();
    const json& cl = detail::field(j, "cliques", "certificate");
    if (!cl.is_array()) fail("cliques", "expected an array");
    for (std::size_t i = 0; i < cl.size(); ++i) c.cliques.push_back(detail::read_indices(cl[i], c.n, "cliques[" + std::to_string(i) + "]"));
    if (auto it = j.find("r_used"); it != j.end()) {
        if (!it->is_array() || it->size() != c.cliques.size()) fail("r_used", "expected one entry per clique");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const json& r = (*it)[i];
            if (!r.is_array() || static_cast<int>(r.size()) != c.n) throw DimensionMismatch("r_used[" + std::to_string(i) + "]");
            MultiIndex m;
            for (std::size_t k = 0; k < r.size(); ++k) m.push_back(detail::as_int(r[k], "r_used[" + std::to_string(i) + "]"));
            c.r_used.push_back(std::move(m));
        }
    }
    const json& es = detail::field(j, "entries", "certificate");
    if (!es.is_array()) fail("entries", "expected an array");
    bool ball = false;
    for (std::size_t i = 0; i < es.size(); ++i) {
        const std::string w = "entries[" + std::to_string(i) + "]";
        CertEntry e;
        e.clique = detail::as_int(detail::field(es[i], "clique", w), w + ".clique") - 1;
        e.K = detail::read_indices(detail::field(es[i], "K", w), c.n, w + ".K");
        if (auto g = es[i].find("generator"); g != es[i].end()) {
            if (*g == "ball") e.gen = Generator::Ball;
            else if (*g != "box") fail(w + ".generator", "expected \"box\" or \"ball\"");
        }
        ball = ball || e.gen == Generator::Ball;
        const json& sq = detail::field(es[i], "squares", w);
        if (!sq.is_array()) fail(w + ".squares", "expected an array");
        std::vector<SparsePoly> qs;
        for (std::size_t k = 0; k < sq.size(); ++k) {
            auto q = poly_from_json(sq[k], w + ".squares[" + std::to_string(k) + "]");
            if (q.dim() != c.n) throw DimensionMismatch(w + ".squares[" + std::to_string(k) + "]");
            qs.push_back(std::move(q));
        }
        e.sigma = SosPoly::from_polys(c.n, qs);
        c.entries.push_back(std::move(e));
    }
    c.generators = ball ? Generator::Ball : Generator::Box;
    if (auto it = j.find("residual"); it != j.end()) c.residual = detail::as_double(*it, "residual");
    return c;
}

// ---------- files ----------

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError(path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InputError(path + ": cannot write");
    out << text;
}

} // namespace sparsepos::io
