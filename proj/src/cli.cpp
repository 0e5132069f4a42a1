#include "sparsepos/cli.hpp"

#include "sparsepos/sparsepos.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace sparsepos::cli {

namespace {

using json = nlohmann::json;

struct Config {
    std::string command;
    std::string input, output;
    int grid = 20;
    double tol = 1e-6;
    double cjac = kDefaultCjac;
    int rcap = 64;
    int seed = 0;
    std::string format = "json";
    // kernel
    std::vector<int> r;
    std::vector<double> x, y;
    // compare
    int n = 0;
    std::vector<int> sizes;
    int ell = 0;
    std::vector<double> eps;
    double C = 1.0, Cp = 1.0;
};

// JSON cannot carry inf/nan; emit null instead
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json config_json(const Config& c) {
    return {{"grid", c.grid}, {"tol", c.tol}, {"cjac", c.cjac}, {"rcap", c.rcap}, {"seed", c.seed}};
}

std::string csv_line(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
    return s + "\n";
}

std::string fmt(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    std::ostringstream o;
    o << std::setprecision(17) << v;
    return o.str();
}

std::string one_based(const std::vector<int>& c) {
    std::string s = "{";
    for (std::size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + std::to_string(c[i] + 1);
    return s + "}";
}

SparseProblem load_problem(const Config& c) { return io::problem_from_json(io::read_json_file(c.input)).build(); }

json structure_json(const CliqueStructure& cs) {
    json inter = json::array();
    for (std::size_t j = 1; j < cs.inter.size(); ++j) inter.push_back(io::detail::write_indices(cs.inter[j]));
    return {{"n", cs.n}, {"cliques", io::cliques_to_json(cs.cliques)}, {"intersections", inter}, {"rip", cs.rip},
            {"heuristic", cs.heuristic}};
}

json report_json(const VerifyReport& r) {
    return {{"pass", r.pass}, {"residual", r.residual}, {"support_ok", r.support_ok}, {"degree_ok", r.degree_ok},
            {"entries", r.entries}, {"squares", r.squares}, {"issues", r.issues}};
}

json decomposition_json(const DecompositionResult& d) {
    json h = json::array();
    for (const auto& p : d.h) h.push_back(io::poly_to_json(p));
    json levels = json::array();
    for (const auto& l : d.levels)
        levels.push_back({{"clique", l.level + 1}, {"parent", l.parent + 1}, {"intersection", io::detail::write_indices(l.keep)},
                          {"m", l.m}, {"D", l.D}, {"error", l.error}, {"allowed", l.allowed},
                          {"envelope_slack", l.envelope_slack}, {"tried", l.tried}});
    json cl = json::array();
    for (const auto& c : d.cliques)
        cl.push_back({{"grid_min", c.grid_min}, {"fulldeg", c.fulldeg}, {"degree_bound", c.degree_bound},
                      {"sup_norm", c.sup_norm}, {"norm_bound", c.norm_bound}, {"lip", c.lip}, {"lip_bound", c.lip_bound},
                      {"degree_ok", c.degree_ok}, {"norm_ok", c.norm_ok}, {"lip_ok", c.lip_ok}, {"positive_ok", c.positive_ok}});
    return {{"h", h}, {"epsilon", d.epsilon}, {"eta", d.eta}, {"eps_prime", d.eps_prime}, {"eps_prime_alt", d.eps_prime_alt},
            {"D", d.D}, {"levels", levels}, {"cliques", cl}, {"f_grid_min", d.f_grid_min}, {"sum_residual", d.sum_residual}};
}

struct Output {
    json artifact;
    std::string csv;       // used with --format csv when non-empty
    std::string summary;
    int code = 0;
};

Output cmd_analyze(const Config& c) {
    const auto in = io::problem_from_json(io::read_json_file(c.input));
    Output o;
    json a;
    CliqueStructure cs;
    if (in.cliques) {
        cs = CliqueStructure(in.objective.dim(), *in.cliques);
        a["given_order_rip"] = cs.rip;
        if (!cs.rip) cs = rip_order(in.objective.dim(), *in.cliques);
    } else {
        auto g = csp_graph(in.objective, in.constraints);
        json edges = json::array(), fill = json::array();
        for (auto [u, v] : g.edges) edges.push_back({u + 1, v + 1});
        for (auto [u, v] : g.fill_edges) fill.push_back({u + 1, v + 1});
        a["graph"] = {{"edges", edges}, {"fill_edges", fill}};
        cs = g.structure;
    }
    a["structure"] = structure_json(cs);
    const auto prob = make_problem(in.objective, in.constraints, &cs.cliques, in.epsilon);
    json parts = json::array();
    std::string rows;
    for (int j = 0; j < cs.size(); ++j) {
        const auto bf = box_functionals(prob.parts[j], c.grid);
        const auto dd = degree_data(to_chebyshev(prob.parts[j]));
        parts.push_back({{"clique", j + 1}, {"part", io::poly_to_json(prob.parts[j])}, {"fulldeg", dd.fulldeg},
                         {"sup_norm_upper", bf.sup_norm_upper}, {"sup_norm_lower", bf.sup_norm_lower},
                         {"lip_per_variable", bf.lip_per_variable}, {"lip", bf.lip}});
        rows += "  J" + std::to_string(j + 1) + " = " + one_based(cs.cliques[j]) + "  terms " +
                std::to_string(prob.parts[j].terms().size()) + "\n";
    }
    a["parts"] = parts;
    json cons = json::array();
    for (const auto& g : prob.constraints) cons.push_back({{"clique", g.clique + 1}});
    a["constraints"] = cons;
    a["config"] = config_json(c);
    o.artifact = a;
    o.summary = "n = " + std::to_string(cs.n) + ", " + std::to_string(cs.size()) + " clique(s), rip " +
                (cs.rip ? "true" : "false") + (cs.heuristic ? " (heuristic order)" : "") + "\n" + rows;
    return o;
}

Output cmd_decompose(const Config& c) {
    const auto prob = load_problem(c);
    if (!prob.cliques.rip) throw RipViolation("cliques do not satisfy the running intersection property");
    DecompositionOptions opt;
    opt.cjac = c.cjac;
    opt.grid = c.grid;
    opt.tol = c.tol;
    const auto d = sparse_decompose(prob.parts, prob.cliques, prob.epsilon, opt);
    Output o;
    o.artifact = decomposition_json(d);
    o.artifact["structure"] = structure_json(prob.cliques);
    o.artifact["config"] = config_json(c);
    std::ostringstream s;
    s << "eta " << fmt(d.eta) << ", eps' " << fmt(d.eps_prime) << ", sum residual " << fmt(d.sum_residual) << "\n";
    for (std::size_t j = 0; j < d.cliques.size(); ++j)
        s << "  h" << j + 1 << ": grid min " << fmt(d.cliques[j].grid_min) << ", fulldeg " << index_str(d.cliques[j].fulldeg)
          << (d.cliques[j].positive_ok ? "" : "  [below eta]") << "\n";
    o.summary = s.str();
    return o;
}

Output cmd_certify(const Config& c) {
    const auto prob = load_problem(c);
    CertifyOptions opt;
    opt.cjac = c.cjac;
    opt.grid = c.grid;
    opt.tol = c.tol;
    opt.rcap = c.rcap;
    const auto res = schmuedgen_certify(prob, opt);
    Output o;
    o.artifact = io::certificate_to_json(res.cert);
    o.artifact["report"] = report_json(res.report);
    json runs = json::array();
    for (const auto& r : res.runs) runs.push_back({{"r", r.r}, {"tried", r.tried}, {"clamp_mass", r.clamp_mass}});
    o.artifact["runs"] = runs;
    o.artifact["config"] = config_json(c);
    std::ostringstream s;
    s << "certificate: " << res.cert.entries.size() << " entries, " << res.cert.square_count() << " squares, residual "
      << fmt(res.report.residual) << (res.report.pass ? " (pass)" : " (FAIL)") << "\n";
    for (std::size_t j = 0; j < res.runs.size(); ++j)
        s << "  J" << j + 1 << " = " << one_based(prob.cliques.cliques[j]) << "  r = " << index_str(res.runs[j].r) << "\n";
    o.summary = s.str();
    return o;
}

Output cmd_verify(const Config& c) {
    const auto cert = io::certificate_from_json(io::read_json_file(c.input));
    const auto rep = verify(cert, c.tol);
    Output o;
    o.artifact = report_json(rep);
    o.summary = std::string(rep.pass ? "pass" : "FAIL") + ": residual " + fmt(rep.residual) + ", " +
                std::to_string(rep.entries) + " entries, " + std::to_string(rep.squares) + " squares\n";
    for (const auto& i : rep.issues) o.summary += "  " + i + "\n";
    if (!rep.pass) o.code = 2;
    return o;
}

Output cmd_kernel(const Config& c) {
    if (c.r.empty()) throw InputError("--r is required");
    const JacksonSpec spec(c.r);
    Output o;
    json lam = json::array();
    std::string csv = csv_line({"variable", "k", "lambda"});
    for (int v = 0; v < spec.dim(); ++v) {
        lam.push_back(spec.lambdas(v));
        for (int k = 0; k <= c.r[v]; ++k) csv += csv_line({std::to_string(v + 1), std::to_string(k), fmt(spec.lambda(v, k))});
    }
    o.artifact = {{"r", c.r}, {"lambda", lam}};
    o.summary = "Jackson kernel r = " + index_str(c.r) + "\n";
    if (!c.x.empty() || !c.y.empty()) {
        if (static_cast<int>(c.x.size()) != spec.dim() || static_cast<int>(c.y.size()) != spec.dim())
            throw DimensionMismatch("--x and --y need one coordinate per variable");
        for (double v : c.x)
            if (std::abs(v) > 1) throw InputError("--x outside the box");
        for (double v : c.y)
            if (std::abs(v) > 1) throw InputError("--y outside the box");
        const double k = kernel_eval(spec, c.x, c.y);
        o.artifact["x"] = c.x;
        o.artifact["y"] = c.y;
        o.artifact["kernel"] = k;
        o.summary += "J_r(x, y) = " + fmt(k) + "\n";
    }
    o.csv = csv;
    return o;
}

Output cmd_bounds(const Config& c) {
    const json j = io::read_json_file(c.input);
    const auto in = io::problem_from_json(j);
    const auto prob = in.build();
    const auto& cs = prob.cliques;
    const int ell = cs.size();
    if (!(prob.epsilon > 0)) throw InputError("epsilon must be positive");

    SchmuedgenInputs si;
    si.n = cs.n;
    si.ell = ell;
    si.Jbar = cs.max_clique();
    si.Lbar = 0.0;
    si.M = 1;
    si.p_norm = to_chebyshev(prob.objective).sum_abs_coeff();
    si.epsilon = prob.epsilon;
    si.cjac = c.cjac;
    DetailedInputs di;
    di.cliques = cs;
    di.p_norm = si.p_norm;
    di.epsilon = prob.epsilon;
    di.cjac = c.cjac;
    for (const auto& p : prob.parts) {
        const auto bf = box_functionals(p, c.grid);
        const auto fd = fulldeg(to_chebyshev(p));
        si.Lbar += bf.lip;
        for (int v : fd) si.M = std::max(si.M, v);
        di.fulldeg.push_back(fd);
        di.lip.push_back(bf.lip);
    }
    if (si.p_norm <= 0) si.p_norm = 1.0;
    di.p_norm = si.p_norm;
    const auto sb = schmuedgen_bound_simple(si);
    const auto db = schmuedgen_bound_detailed(di);

    Output o;
    json a;
    a["schmuedgen"] = {{"inputs", {{"n", si.n}, {"ell", si.ell}, {"Jbar", si.Jbar}, {"Lbar", si.Lbar}, {"M", si.M},
                                    {"p_norm", si.p_norm}, {"epsilon", si.epsilon}, {"cjac", si.cjac}}},
                       {"r_min", num(sb.r_min)}, {"log_r2", sb.log_r2}, {"A", num(sb.A)}, {"log_A", sb.log_A},
                       {"threshold", sb.threshold}, {"regime", sb.simplified_regime ? "small_epsilon" : "full"},
                       {"r_min_simplified", num(sb.r_min_simplified)}};
    json det = json::array();
    std::string csv = csv_line({"clique", "log_rhs_separated", "log_rhs_equivcond", "log_rhs_uniform", "r_min", "r_min_uniform"});
    for (int k = 0; k < ell; ++k) {
        det.push_back({{"clique", k + 1}, {"log_rhs_separated", db[k].log_rhs_separated},
                       {"log_rhs_equivcond", db[k].log_rhs_equivcond}, {"log_rhs_uniform", db[k].log_rhs_uniform},
                       {"r_min", num(db[k].r_min)}, {"r_min_uniform", num(db[k].r_min_uniform)}});
        csv += csv_line({std::to_string(k + 1), fmt(db[k].log_rhs_separated), fmt(db[k].log_rhs_equivcond),
                         fmt(db[k].log_rhs_uniform), fmt(db[k].r_min), fmt(db[k].r_min_uniform)});
    }
    a["detailed"] = det;

    std::ostringstream s;
    s << "Schmuedgen r_min " << fmt(sb.r_min) << " (" << (sb.simplified_regime ? "small-epsilon regime" : "full regime")
      << "), C_Jac " << fmt(c.cjac) << "\n";
    for (int k = 0; k < ell; ++k) s << "  J" << k + 1 << ": r_min " << fmt(db[k].r_min) << "\n";

    // Putinar side needs the Lojasiewicz data from the input file
    if (auto it = j.find("putinar"); it != j.end()) {
        const json& pj = *it;
        auto get = [&](const char* key, double def) {
            auto f = pj.find(key);
            return f == pj.end() ? def : io::detail::as_double(*f, std::string("putinar.") + key);
        };
        PutinarInputs pi;
        pi.ell = ell;
        pi.epsilon = prob.epsilon;
        pi.kbar = std::max<int>(1, static_cast<int>(prob.constraints.size()));
        pi.Cd = get("Cd", 1.0);
        pi.Cm = get("Cm", 1.0);
        pi.Cf = get("Cf", 1.0);
        pi.Cjac = get("Cjac", 1.0);
        pi.sum_norm = 0.0;
        pi.sum_lip = 0.0;
        for (const auto& p : prob.parts) {
            const auto bf = box_functionals(p, c.grid);
            pi.sum_norm += bf.sup_norm_upper;
            pi.sum_lip += bf.lip;
        }
        if (pi.sum_norm <= 0) pi.sum_norm = 1.0;
        for (int k = 0; k < ell; ++k) {
            PutinarClique q;
            q.Jsize = static_cast<int>(cs.cliques[k].size());
            q.c = get("c", 1.0);
            q.L = get("L", 1.0);
            q.deg_p = std::max(1, degree_data(prob.parts[k]).deg);
            q.max_deg_g = 1.0;
            for (const auto& g : prob.constraints)
                if (g.clique == k) q.max_deg_g = std::max<double>(q.max_deg_g, degree_data(g.g).deg);
            for (int i = k; i < ell; ++i) q.inter_sizes.push_back(static_cast<int>(cs.inter[i].size()));
            pi.cliques.push_back(q);
        }
        const auto pb = putinar_bound(pi);
        json pa = json::array();
        for (int k = 0; k < ell; ++k) {
            pa.push_back({{"clique", k + 1}, {"log_C1", pb[k].log_C1}, {"log_C2", pb[k].log_C2}, {"C", num(pb[k].C)},
                          {"C_binding", pb[k].C_binding}, {"log_rhs1", pb[k].log_rhs1}, {"log_rhs2", pb[k].log_rhs2},
                          {"binding", pb[k].binding}, {"r_min", num(pb[k].r_min)},
                          {"eps_exponent1", pb[k].eps_exponent1}, {"eps_exponent2", pb[k].eps_exponent2}});
            s << "  Putinar J" << k + 1 << ": r_min " << fmt(pb[k].r_min) << " (condition " << pb[k].binding << " binds)\n";
        }
        a["putinar"] = {{"constants", {{"Cd", pi.Cd}, {"Cm", pi.Cm}, {"Cf", pi.Cf}, {"Cjac", pi.Cjac}}}, {"kbar", pi.kbar},
                        {"cliques", pa}};
    }
    a["config"] = config_json(c);
    o.artifact = a;
    o.csv = csv;
    o.summary = s.str();
    return o;
}

Output cmd_compare(const Config& c) {
    Config k = c;
    if (!c.input.empty()) {
        const json j = io::read_json_file(c.input);
        auto ints = [&](const char* key) {
            std::vector<int> v;
            for (const auto& e : io::detail::field(j, key, "compare")) v.push_back(io::detail::as_int(e, key));
            return v;
        };
        k.n = io::detail::as_int(io::detail::field(j, "n", "compare"), "n");
        k.sizes = ints("clique_sizes");
        k.ell = io::detail::as_int(io::detail::field(j, "ell", "compare"), "ell");
        k.eps.clear();
        for (const auto& e : io::detail::field(j, "epsilons", "compare")) k.eps.push_back(io::detail::as_double(e, "epsilons"));
        if (auto it = j.find("C"); it != j.end()) k.C = io::detail::as_double(*it, "C");
        if (auto it = j.find("Cp"); it != j.end()) k.Cp = io::detail::as_double(*it, "Cp");
    }
    if (k.n <= 0 || k.sizes.empty() || k.eps.empty()) throw InputError("compare needs --n, --J and --eps (or --input)");
    if (k.ell <= 0) k.ell = static_cast<int>(k.sizes.size());
    const auto r = complexity_compare(k.n, k.sizes, k.ell, k.eps, k.C, k.Cp);
    Output o;
    json rows = json::array();
    std::string csv = csv_line({"epsilon", "log_B_dense", "log_B_sparse_schm", "log_B_sparse_put", "log_B_sparse_put_theorem",
                                "log_ratio_schm", "log_ratio_put"});
    for (const auto& row : r.rows) {
        rows.push_back({{"epsilon", row.epsilon}, {"log_B_dense", row.log_dense}, {"log_B_sparse_schm", row.log_schm},
                        {"log_B_sparse_put", row.log_put_discussion}, {"log_B_sparse_put_theorem", row.log_put_theorem},
                        {"log_ratio_schm", row.log_ratio_schm}, {"log_ratio_put", row.log_ratio_put}});
        csv += csv_line({fmt(row.epsilon), fmt(row.log_dense), fmt(row.log_schm), fmt(row.log_put_discussion),
                         fmt(row.log_put_theorem), fmt(row.log_ratio_schm), fmt(row.log_ratio_put)});
    }
    o.artifact = {{"n", r.n}, {"J", r.J}, {"ell", r.ell}, {"C", r.C}, {"Cp", r.Cp}, {"rows", rows},
                  {"slope_schm", num(r.slope_schm)}, {"predicted_schm", r.predicted_schm},
                  {"slope_put", num(r.slope_put)}, {"predicted_put", r.predicted_put},
                  {"exponent_put_discussion", r.exponent_put_discussion}, {"exponent_put_theorem", r.exponent_put_theorem},
                  {"sparse_schm_wins", r.sparse_schm_wins}, {"sparse_put_wins", r.sparse_put_wins}};
    o.csv = csv;
    std::ostringstream s;
    s << "n " << r.n << ", |J| " << r.J << ": Schmuedgen log-ratio slope " << fmt(r.slope_schm) << " (predicted "
      << fmt(r.predicted_schm) << "), sparse wins " << (r.sparse_schm_wins ? "yes" : "no") << "\n";
    o.summary = s.str();
    return o;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sparse positivity certificates on the box [-1,1]^n", "sparsepos"};
    app.require_subcommand(1);
    Config c;
    auto common = [&](CLI::App* s, bool needs_input) {
        auto* i = s->add_option("--input,-i", c.input, "input JSON file");
        if (needs_input) i->required()->check(CLI::ExistingFile);
        s->add_option("--output,-o", c.output, "write the machine-readable artifact here");
        s->add_option("--grid", c.grid, "verification grid points per dimension")->check(CLI::Range(2, 100000));
        s->add_option("--tol", c.tol, "verification tolerance")->check(CLI::PositiveNumber);
        s->add_option("--cjac", c.cjac, "Jackson approximation constant")->check(CLI::PositiveNumber);
        s->add_option("--rcap", c.rcap, "largest Jackson degree tried per variable")->check(CLI::Range(1, 1000));
        s->add_option("--seed", c.seed, "recorded in the output; all commands are deterministic");
        s->add_option("--format", c.format, "artifact format")->check(CLI::IsMember({"json", "csv"}));
    };
    struct Sub {
        const char* name;
        const char* help;
        bool input;
    };
    const Sub subs[] = {{"analyze", "clique structure of a problem", true},
                        {"decompose", "split a clique-sum into clique-local positive parts", true},
                        {"certify", "build and verify a sparse box certificate", true},
                        {"verify", "check a certificate file", true},
                        {"kernel", "Jackson kernel eigenvalues and values", false},
                        {"bounds", "theoretical degree bounds for a problem", true},
                        {"compare", "dense versus sparse block-size comparison", false}};
    for (const auto& s : subs) {
        auto* a = app.add_subcommand(s.name, s.help);
        common(a, s.input);
        if (std::string(s.name) == "kernel") {
            a->add_option("--r", c.r, "Jackson degree per variable")->delimiter(',')->required();
            a->add_option("--x", c.x, "first kernel argument")->delimiter(',');
            a->add_option("--y", c.y, "second kernel argument")->delimiter(',');
        }
        if (std::string(s.name) == "compare") {
            a->add_option("--n", c.n, "number of variables");
            a->add_option("--J", c.sizes, "clique sizes")->delimiter(',');
            a->add_option("--ell", c.ell, "number of cliques (default: count of --J)");
            a->add_option("--eps", c.eps, "accuracies")->delimiter(',');
            a->add_option("--C", c.C, "dense constant")->check(CLI::PositiveNumber);
            a->add_option("--Cp", c.Cp, "sparse constant")->check(CLI::PositiveNumber);
        }
    }
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    c.command = app.get_subcommands().front()->get_name();

    try {
        Output o;
        if (c.command == "analyze") o = cmd_analyze(c);
        else if (c.command == "decompose") o = cmd_decompose(c);
        else if (c.command == "certify") o = cmd_certify(c);
        else if (c.command == "verify") o = cmd_verify(c);
        else if (c.command == "kernel") o = cmd_kernel(c);
        else if (c.command == "bounds") o = cmd_bounds(c);
        else o = cmd_compare(c);

        std::string artifact;
        if (c.format == "csv") {
            if (o.csv.empty()) throw InputError("--format csv is not available for " + c.command);
            artifact = o.csv;
        } else {
            artifact = o.artifact.dump(2) + "\n";
        }
        if (c.output.empty()) {
            out << artifact;
        } else {
            io::write_text_file(c.output, artifact);
            out << o.summary;
        }
        return o.code;
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        err << "input error: " << e.what() << "\n";
        return 1;
    } catch (const PreconditionError& e) {
        err << "precondition failed: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

} // namespace sparsepos::cli
