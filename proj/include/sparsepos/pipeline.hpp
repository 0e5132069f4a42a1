#pragma once

#include "sparsepos/approx.hpp"
#include "sparsepos/certificate.hpp"
#include "sparsepos/errors.hpp"
#include "sparsepos/jackson.hpp"
#include "sparsepos/sparsity.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace sparsepos {

struct CertifyOptions {
    double cjac = kDefaultCjac;
    int grid = 20;
    double tol = 1e-6;
    int rcap = 64;
    std::size_t max_basis = 4096;  // per-entry Gram size guard
    std::optional<std::vector<MultiIndex>> r_hint;  // per clique; "auto" when empty
};

struct CliqueRun {
    MultiIndex r;               // Jackson degrees used
    std::vector<MultiIndex> tried;
    double clamp_mass = 0.0;
    double node_min = 0.0;      // min of u at the quadrature nodes, relative to ||h||
};

struct CertifyResult {
    Certificate cert;
    DecompositionResult decomposition;
    std::vector<CliqueRun> runs;
    VerifyReport report;
    GridMin grid_min;
    std::vector<SparsePoly> h;    // certified blocks: decomposition output after constant balancing
    std::vector<double> shifts;   // constants moved between blocks (sum zero)
};

namespace detail {

inline int even_ceil(int v) { return v + (v % 2); }

inline std::size_t basis_size(const MultiIndex& r) {
    std::size_t s = 1;
    for (int v : r)
        if (v > 0) s *= static_cast<std::size_t>(v / 2 + 1);
    return s;
}

// Moves constants between the h_j (sum unchanged) so that the grid minimum
// above eta is shared in proportion to how hard each block is to certify.
inline std::vector<double> balance_constants(std::vector<SparsePoly>& h, const CliqueStructure& cs, double eta, int grid) {
    const std::size_t L = h.size();
    std::vector<double> mu(L), w(L), shift(L, 0.0);
    double surplus = 0.0, wsum = 0.0;
    for (std::size_t j = 0; j < L; ++j) {
        h[j] = to_chebyshev(h[j]);
        mu[j] = grid_min(h[j], cs.cliques[j], grid);
        // ||K_r^{-1} h - h|| scales like sum |c_I| sum_k i_k^2 / r^2
        w[j] = 0.0;
        for (const auto& [I, a] : h[j].terms())
            for (int i : I) w[j] += std::abs(a) * i * i;
        surplus += mu[j] - eta;
        wsum += w[j];
    }
    if (surplus <= 0 || wsum <= 0) return shift;
    for (std::size_t j = 0; j < L; ++j) {
        const double target = eta + surplus * w[j] / wsum;
        shift[j] = target - mu[j];
    }
    // the shifts sum to zero up to rounding; put the rounding into the first block
    double tot = 0.0;
    for (double s : shift) tot += s;
    shift[0] -= tot;
    for (std::size_t j = 0; j < L; ++j) h[j] = h[j] + shift[j];
    return shift;
}

inline double min_at_nodes(const SparsePoly& u, const JacksonSpec& spec) {
    const auto& vars = spec.active_vars();
    if (vars.empty()) return u.coeff(MultiIndex(static_cast<std::size_t>(u.dim()), 0));
    std::vector<std::vector<double>> pts;
    std::vector<int> ext;
    const auto fd = fulldeg(u);
    for (int v : vars) {
        pts.push_back(cheb::gauss_points(spec.r()[v] + 1));
        ext.push_back(fd[v] + 1);
    }
    auto vals = cheb::evaluate_on_grid(to_dense(u, vars, ext), pts);
    return *std::min_element(vals.data.begin(), vals.data.end());
}

} // namespace detail

// Certificate for h in the box preordering over clique J: finds r with
// K_r^{-1}(h) >= 0 at the quadrature nodes, then certifies K_r(u) = h.
inline std::pair<Certificate, CliqueRun> certify_clique(const SparsePoly& h, const Clique& J, const CertifyOptions& opt,
                                                        const MultiIndex* hint = nullptr) {
    const int n = h.dim();
    const SparsePoly hc = to_chebyshev(h);
    if (!support_within(hc, J)) throw UnsplittableTerm("polynomial leaves clique " + clique_str(J));
    const auto fd = fulldeg(hc);
    CliqueRun run;
    run.r.assign(static_cast<std::size_t>(n), 0);
    if (hint) {
        run.r = *hint;
        for (int v = 0; v < n; ++v)
            if (run.r[v] < fd[v]) throw DegreeExceedsSpec("r hint " + index_str(run.r) + " below fulldeg " + index_str(fd));
    } else {
        for (int v = 0; v < n; ++v)
            if (fd[v] > 0) run.r[v] = std::max(2, detail::even_ceil(fd[v]));
    }
    const double scale = std::max(hc.sum_abs_coeff(), 1e-300);
    const double node_tol = 1e-10;
    while (true) {
        run.tried.push_back(run.r);
        for (int v = 0; v < n; ++v)
            if (run.r[v] > opt.rcap)
                throw RCapExceeded("clique " + clique_str(J) + ": r " + index_str(run.r) + " exceeds cap " +
                                   std::to_string(opt.rcap));
        if (detail::basis_size(run.r) > opt.max_basis)
            throw RCapExceeded("clique " + clique_str(J) + ": r " + index_str(run.r) + " needs a Gram basis of " +
                               std::to_string(detail::basis_size(run.r)) + " > " + std::to_string(opt.max_basis));
        const JacksonSpec spec(run.r);
        const SparsePoly u = jackson_apply_inverse(spec, hc);
        run.node_min = detail::min_at_nodes(u, spec) / scale;
        if (run.node_min >= -node_tol) {
            Certificate c = kernel_certificate(u, spec, node_tol);
            run.clamp_mass = c.clamp_mass;
            c.target = hc;
            return {std::move(c), run};
        }
        if (hint) throw NegativeNodeValue("K_r^{-1}(h) negative at a node for hinted r " + index_str(run.r));
        // grow r where the inverse operator perturbs h most
        std::vector<double> pert(static_cast<std::size_t>(n), 0.0);
        for (const auto& [I, a] : hc.terms())
            for (int v = 0; v < n; ++v)
                if (I[v]) pert[v] += std::abs(a) * (1.0 / spec.lambda(v, I[v]) - 1.0);
        const double pmax = *std::max_element(pert.begin(), pert.end());
        for (int v = 0; v < n; ++v)
            if (run.r[v] > 0 && pert[v] >= 0.25 * pmax)
                run.r[v] = detail::even_ceil(std::max(run.r[v] + 2, (3 * run.r[v]) / 2));
    }
}

inline CertifyResult schmuedgen_certify(const SparseProblem& prob, const CertifyOptions& opt = {}) {
    const CliqueStructure& cs = prob.cliques;
    if (!cs.rip) throw RipViolation("cliques do not satisfy the running intersection property");
    if (!prob.constraints.empty()) throw InputError("certify works on the box only; drop the constraints");
    if (!(prob.epsilon > 0)) throw InputError("epsilon must be positive");
    const int n = cs.n;
    CertifyResult out;
    out.grid_min = sparse_grid_min(prob.parts, cs, opt.grid);
    if (out.grid_min.value < prob.epsilon) {
        std::string w;
        for (int v = 0; v < n; ++v) w += (v ? "," : "") + std::to_string(out.grid_min.witness[v]);
        throw NotPositive("grid minimum " + std::to_string(out.grid_min.value) + " < epsilon " +
                          std::to_string(prob.epsilon) + " at (" + w + ")");
    }
    DecompositionOptions dopt;
    dopt.cjac = opt.cjac;
    dopt.grid = opt.grid;
    dopt.tol = opt.tol;
    out.decomposition = sparse_decompose(prob.parts, cs, prob.epsilon, dopt);
    out.h = out.decomposition.h;
    out.shifts = detail::balance_constants(out.h, cs, out.decomposition.eta, opt.grid);

    Certificate& cert = out.cert;
    cert.n = n;
    cert.cliques = cs.cliques;
    cert.target = to_chebyshev(prob.objective);
    for (int j = 0; j < cs.size(); ++j) {
        const MultiIndex* hint = opt.r_hint ? &opt.r_hint->at(static_cast<std::size_t>(j)) : nullptr;
        auto [c, run] = certify_clique(out.h[j], cs.cliques[j], opt, hint);
        MultiIndex ru(static_cast<std::size_t>(n), 0);
        for (int v = 0; v < n; ++v) ru[v] = run.r[v] + run.r[v] % 2;
        cert.r_used.push_back(ru);
        cert.clamp_mass += c.clamp_mass;
        for (auto& e : c.entries) {
            e.clique = j;
            cert.entries.push_back(std::move(e));
        }
        out.runs.push_back(std::move(run));
    }
    out.report = verify(cert, opt.tol);
    cert.residual = out.report.residual;
    if (!out.report.pass) {
        std::string why = "certificate failed verification (residual " + std::to_string(out.report.residual) + ")";
        for (const auto& s : out.report.issues) why += "; " + s;
        throw NumericalFailure(why);
    }
    return out;
}

} // namespace sparsepos
