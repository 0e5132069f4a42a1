#include "sparsepos/cli.hpp"
#include "sparsepos/io.hpp"
#include "sparsepos/sparsepos.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace sparsepos;
namespace orc = testing_oracles;

namespace {

const double kPi2 = std::numbers::pi * std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::vector<double> eps_sweep() {
    std::vector<double> e;
    for (int k = 0; k < 10; ++k) e.push_back(std::pow(10.0, -0.5 * k));
    return e;
}

// product-form transcription of the two Putinar conditions, no logarithms
struct PutinarRef {
    double C1, C2, rhs1, rhs2;
};

PutinarRef putinar_ref(const PutinarClique& q, const PutinarInputs& in) {
    const double L = q.L, J = q.Jsize, l = in.ell, kb = in.kbar;
    const double E = (2 * L + J + 2) * (1 + 8 * L / 3);
    PutinarRef r{};
    r.C1 = 2 * kPi2 * std::pow(J, 1 + 16 * L / 3) * in.Cd * in.Cd * std::pow(in.Cjac, 16 * L / 3) *
           std::pow(2.0, 1 + 2 * (4 + 3 * 8.0 / 3) * L) * std::pow(3.0, ((16 + 8 * l) * L + 2) / 3) * std::pow(kb, -2.0 / 3) *
           std::pow(q.c, 8.0 / 3) * q.max_deg_g * q.max_deg_g * std::pow(2 * (l + 2), 8 * L);
    double s = 0;
    for (int t : q.inter_sizes) s += std::pow(static_cast<double>(t), 2 * E);
    r.C2 = in.Cf * std::pow(in.Cjac * in.Cm, E) * J * kPi2 * std::pow(2.0, 4 * L + J / 2 + 1 + (1 + (4 * L + 1) / 3) * E) *
           std::pow(3.0, l * (L + 1) + E) * std::pow(l + 2, 1 + L + (4 * L + 1) / 3 * E) * kb *
           std::pow(q.c, 1 + 0.75 * E) * s * std::pow(q.max_deg_g + 1, E);
    const double C = std::max(r.C1, r.C2);
    const double dl = q.deg_p * in.sum_lip;
    r.rhs1 = C * 4 * (l + 2) * std::pow(in.sum_norm, L + 1) * std::pow(dl, E) /
             std::pow(in.epsilon, 1 + L + (4 * L + 1) / 3 * E);
    r.rhs2 = C * std::pow(std::pow(in.sum_norm, (4 * L + 1) / 3) * std::pow(dl, 8 * L / 3) / std::pow(in.epsilon, (12 * L + 1) / 3), 2);
    return r;
}

PutinarInputs worked_putinar(double eps) {
    PutinarInputs in;
    in.ell = 2;
    in.kbar = 1;
    in.sum_norm = 1.0;
    in.sum_lip = 1.0;
    in.epsilon = eps;
    PutinarClique q;
    q.Jsize = 2;
    q.c = 1;
    q.L = 1;
    q.deg_p = 2;
    q.max_deg_g = 2;
    q.inter_sizes = {1};
    in.cliques = {q};
    return in;
}

std::string fixture(const std::string& name) { return std::string(SPARSEPOS_FIXTURES) + "/" + name; }

int run_cli(const std::vector<std::string>& args, std::string* out = nullptr, std::string* err = nullptr) {
    std::ostringstream o, e;
    const int rc = cli::run(args, o, e);
    if (out) *out = o.str();
    if (err) *err = e.str();
    return rc;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("sparsepos_test_" + name)).string();
}

} // namespace

// ---------------- Schmüdgen bounds ----------------

TEST(SimpleBound, WorkedValue) {
    SchmuedgenInputs in{4, 2, 2, 1.0, 2, 1.0, 0.1, 4.0};
    auto b = schmuedgen_bound_simple(in);
    const double inner = std::max(2.0, 4 * 4.0 * 4 * 2 * 1.0 / 0.1) + 2;  // 1282
    const double r2 = std::pow(2.0, 5) * 4 * 4 * kPi2 * 1.0 / 0.1 * std::pow(inner, 4);
    EXPECT_LE(rel(b.r_min, std::sqrt(r2)), 1e-12);
    EXPECT_TRUE(b.simplified_regime);
    const double A = 4 * kPi2 * std::pow(4 * 4.0 * 2 * 1.0 + 2, 4) * std::pow(2 * 4.0, 5);
    EXPECT_LE(rel(b.A, A), 1e-12);
    EXPECT_LE(rel(b.r_min_simplified, std::sqrt(A / std::pow(0.1, 5))), 1e-12);
}

TEST(SimpleBound, RegimeSwitchAtThreshold) {
    SchmuedgenInputs in{4, 2, 2, 1.0, 2, 1.0, 1.0, 4.0};
    const double thr = 4 * 4.0 * 4 * 2 * 1.0 / 2;  // 64
    in.epsilon = thr;
    auto at = schmuedgen_bound_simple(in);
    EXPECT_DOUBLE_EQ(at.threshold, thr);
    EXPECT_FALSE(at.simplified_regime);
    EXPECT_TRUE(std::isnan(at.r_min_simplified));
    in.epsilon = std::nextafter(thr, 0.0);
    EXPECT_TRUE(schmuedgen_bound_simple(in).simplified_regime);
}

TEST(SimpleBound, MonotoneInEpsilon) {
    double prev = 0.0;
    auto e = eps_sweep();
    std::reverse(e.begin(), e.end());  // growing eps
    prev = INFINITY;
    for (double eps : e) {
        SchmuedgenInputs in{6, 3, 3, 2.5, 4, 3.0, eps, 4.0};
        double r = schmuedgen_bound_simple(in).r_min;
        EXPECT_LE(r, prev);
        prev = r;
        in.epsilon = 2 * eps;
        EXPECT_LE(schmuedgen_bound_simple(in).r_min, r);
    }
}

TEST(SimpleBound, RejectsNonPositive) {
    EXPECT_THROW(schmuedgen_bound_simple({4, 2, 2, 1.0, 2, 1.0, 0.0, 4.0}), InputError);
    EXPECT_THROW(schmuedgen_bound_simple({0, 2, 2, 1.0, 2, 1.0, 0.1, 4.0}), InputError);
}

TEST(DetailedBound, ChainOracle) {
    // J1={0,1}, J2={1,2}, J3={2,3,4}
    CliqueStructure cs(5, {{0, 1}, {1, 2}, {2, 3, 4}});
    DetailedInputs in;
    in.cliques = cs;
    in.fulldeg = {{2, 3, 0, 0, 0}, {0, 1, 2, 0, 0}, {0, 0, 2, 2, 1}};
    in.lip = {1.5, 2.0, 0.7};
    in.p_norm = 3.0;
    in.epsilon = 0.2;
    auto got = schmuedgen_bound_detailed(in);
    ASSERT_EQ(got.size(), 3u);
    const int ell = 3, n = 5;
    // intersections read off by hand: inter[1] = {1}, inter[2] = {2}
    const std::vector<std::vector<int>> inter{{}, {1}, {2}};
    auto tail = [&](int l) {
        double s = 0;
        for (int t = l; t < ell; ++t) s += in.lip[t];
        return 4 * 4.0 * (ell + 2) * inter[l].size() * s / in.epsilon;
    };
    for (int j = 0; j < ell; ++j) {
        std::vector<double> v(n);
        double V = 0;
        for (int m = 0; m < n; ++m) {
            v[m] = in.fulldeg[j][m];
            V = std::max(V, v[m]);
            for (int l = j; l < ell; ++l)
                for (int w : inter[l])
                    if (w == m) v[m] = std::max(v[m], tail(l));
        }
        for (int k = j; k < ell; ++k) V = std::max(V, tail(k));
        double vmax = 0;
        for (int m : cs.cliques[j]) vmax = std::max(vmax, v[m]);
        const double Jj = cs.cliques[j].size();
        double sep = std::pow(2.0, Jj / 2 + 2) * (ell + 2) * in.p_norm * n * kPi2 / in.epsilon * vmax * vmax;
        for (int m = 0; m < n; ++m) sep *= v[m] + 2;
        const double eq = 2 * kPi2 * n * V * V;
        const double uni = std::pow(2.0, Jj / 2 + 2) * (ell + 2) * in.p_norm * n * kPi2 / in.epsilon * std::pow(V + 2, Jj + 2);
        EXPECT_LE(rel(std::exp(got[j].log_rhs_separated), sep), 1e-12);
        EXPECT_LE(rel(std::exp(got[j].log_rhs_equivcond), eq), 1e-12);
        EXPECT_LE(rel(std::exp(got[j].log_rhs_uniform), uni), 1e-12);
        const double r = got[j].r_min;
        EXPECT_GE((r + 2) * (r + 2), std::max(sep, eq) * (1 - 1e-12));
        EXPECT_LT((r + 1) * (r + 1), std::max(sep, eq));
        // the bound implies the effcond threshold
        EXPECT_LE(got[j].effcond_max, 1.0 / (2 * kPi2 * n) * (1 + 1e-12));
    }
}

TEST(DetailedBound, SymmetricCliquesAgree) {
    // mirror-image chain: both cliques see the same shared variable and tail
    CliqueStructure cs(3, {{0, 1}, {1, 2}});
    DetailedInputs in;
    in.cliques = cs;
    in.fulldeg = {{2, 2, 0}, {0, 2, 2}};
    in.lip = {1.0, 1.0};
    in.epsilon = 0.3;
    auto a = schmuedgen_bound_detailed(in);
    EXPECT_DOUBLE_EQ(a[0].log_rhs_separated, a[1].log_rhs_separated);
    EXPECT_DOUBLE_EQ(a[0].log_rhs_uniform, a[1].log_rhs_uniform);
    EXPECT_EQ(a[0].r_min, a[1].r_min);
}

TEST(DetailedBound, MonotoneInEpsilon) {
    CliqueStructure cs(4, {{0, 1}, {1, 2}, {2, 3}});
    DetailedInputs in;
    in.cliques = cs;
    in.fulldeg = {{2, 2, 0, 0}, {0, 2, 2, 0}, {0, 0, 2, 2}};
    in.lip = {1.0, 2.0, 3.0};
    double prev = 0;
    for (double e : eps_sweep()) {
        in.epsilon = e;
        double r = schmuedgen_bound_detailed(in)[0].r_min;
        EXPECT_GE(r, prev);
        prev = r;
    }
}

// ---------------- Putinar ----------------

TEST(PutinarBound, WorkedOracle) {
    auto in = worked_putinar(0.5);
    auto b = putinar_bound(in);
    ASSERT_EQ(b.size(), 1u);
    auto ref = putinar_ref(in.cliques[0], in);
    EXPECT_LE(rel(std::exp(b[0].log_C1), ref.C1), 1e-12);
    EXPECT_LE(rel(std::exp(b[0].log_C2), ref.C2), 1e-12);
    EXPECT_LE(rel(b[0].rhs1, ref.rhs1), 1e-12);
    EXPECT_LE(rel(b[0].rhs2, ref.rhs2), 1e-12);
    EXPECT_EQ(b[0].binding, ref.rhs1 >= ref.rhs2 ? 1 : 2);
}

TEST(PutinarBound, RandomOracle) {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> U(0, 1);
    for (int t = 0; t < 30; ++t) {
        PutinarInputs in;
        in.ell = 1 + static_cast<int>(rng() % 4);
        in.kbar = 1 + static_cast<int>(rng() % 3);
        in.sum_norm = 0.5 + 2 * U(rng);
        in.sum_lip = 0.5 + 2 * U(rng);
        in.epsilon = 0.05 + 0.5 * U(rng);
        in.Cd = 0.5 + U(rng);
        in.Cm = 0.5 + U(rng);
        in.Cf = 0.5 + U(rng);
        in.Cjac = 0.5 + U(rng);
        PutinarClique q;
        q.Jsize = 1 + static_cast<int>(rng() % 3);
        q.c = 1 + U(rng);
        q.L = 1 + 0.5 * U(rng);
        q.deg_p = 1 + static_cast<int>(rng() % 4);
        q.max_deg_g = 1 + static_cast<int>(rng() % 3);
        q.inter_sizes = {1 + static_cast<int>(rng() % 2), 1};
        in.cliques = {q};
        auto b = putinar_bound(in)[0];
        auto ref = putinar_ref(q, in);
        if (!std::isfinite(ref.rhs1) || !std::isfinite(ref.rhs2)) continue;
        EXPECT_LE(rel(b.rhs1, ref.rhs1), 1e-11) << t;
        EXPECT_LE(rel(b.rhs2, ref.rhs2), 1e-11) << t;
    }
}

TEST(PutinarBound, LinearLojasiewiczExponents) {
    auto b = putinar_bound(worked_putinar(0.5))[0];
    // L = 1, |J| = 2: E = 6 * 11/3 = 22, exponent 1 + 1 + 5/3 * 22
    EXPECT_NEAR(b.eps_exponent1, 2.0 + 110.0 / 3.0, 1e-12);
    EXPECT_NEAR(b.eps_exponent2, 26.0 / 3.0, 1e-12);
}

TEST(PutinarBound, MonotoneAndGuarded) {
    double prev = 0;
    for (double e : eps_sweep()) {
        double r = putinar_bound(worked_putinar(e))[0].r_min;
        EXPECT_GE(r, prev);
        prev = r;
    }
    auto bad = worked_putinar(0.5);
    bad.cliques[0].c = 0.5;
    EXPECT_THROW(putinar_bound(bad), InputError);
}

// ---------------- complexity comparison ----------------

TEST(LogBinomial, MatchesExactSmallCases) {
    // C(10, 3) = 120, C(7, 0) = 1, C(52, 5) = 2598960
    EXPECT_NEAR(log_binom_plus(7, 3), std::log(120.0), 1e-12);
    EXPECT_NEAR(log_binom_plus(7, 0), 0.0, 1e-12);
    EXPECT_NEAR(log_binom_plus(47, 5), std::log(2598960.0), 1e-11);
    EXPECT_NEAR(log_binom(52, 5), std::log(2598960.0), 1e-11);
    // large y: log C(y+k, k) ~ k log y - log k!
    const double y = 1e12;
    EXPECT_NEAR(log_binom_plus(y, 3), std::log(y + 1) + std::log(y + 2) + std::log(y + 3) - std::log(6.0), 1e-9);
}

TEST(Compare, SchmuedgenThresholdFlags) {
    auto e = std::vector<double>{1e-3, 1e-2};
    EXPECT_FALSE(complexity_compare(10, {2, 2}, 2, e).sparse_schm_wins);
    EXPECT_TRUE(complexity_compare(11, {2, 2}, 2, e).sparse_schm_wins);
    EXPECT_FALSE(complexity_compare(11, {2, 3}, 2, e).sparse_schm_wins);
}

TEST(Compare, SlopesMatchExponent) {
    const std::vector<double> e{1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
    for (auto [n, J] : std::vector<std::pair<int, int>>{{10, 2}, {12, 2}, {12, 3}, {8, 1}}) {
        auto r = complexity_compare(n, {J, J}, 2, e, 100.0, 100.0);
        EXPECT_NEAR(r.slope_schm, r.predicted_schm, 0.1 * std::max(1.0, std::abs(r.predicted_schm))) << n << "," << J;
        EXPECT_NEAR(r.slope_put, r.predicted_put, 0.1 * std::abs(r.predicted_put)) << n << "," << J;
    }
}

TEST(Compare, RowsAreLogBinomials) {
    auto r = complexity_compare(6, {2, 3}, 3, {0.01}, 1.0, 1.0);
    ASSERT_EQ(r.rows.size(), 1u);
    // dense: C(n + 10, 10) with C/sqrt(eps) = 10
    EXPECT_NEAR(r.rows[0].log_dense, std::log(8008.0), 1e-10);
    // sparse: ell * C(J + J eps^{-3}, J) with J = 3
    const double y = 3 * std::pow(0.01, -3.0);
    EXPECT_NEAR(r.rows[0].log_schm, std::log(3.0) + std::log((y + 1) * (y + 2) * (y + 3) / 6), 1e-9);
}

TEST(BinomRatio, WorkedInstance) {
    auto r = binom_log_ratio_slope(1, 1, 2, 1, 1, 1, {1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
    EXPECT_TRUE(r.bounded);
    EXPECT_TRUE(r.trending);
    EXPECT_LT(std::abs(r.statistic.back() - 1.0), std::abs(r.statistic.front() - 1.0));
    EXPECT_NEAR(r.slope, 1.0, 0.05);
    // independent value at eps = 1e-2: log[C(101,1) / C(102,2)]
    EXPECT_NEAR(r.log_ratio[0], std::log(101.0) - std::log(102.0 * 101.0 / 2.0), 1e-12);
}

TEST(BinomRatio, AntisymmetryAndGuard) {
    std::vector<double> e{1e-2, 1e-3, 1e-4};
    auto f = binom_log_ratio_slope(1, 1, 2, 1, 1, 1, e);
    auto g = binom_log_ratio_slope(2, 1, 1, 1, 1, 1, e);
    for (std::size_t i = 0; i < e.size(); ++i) {
        EXPECT_NEAR(f.log_ratio[i], -g.log_ratio[i], 1e-12);
        EXPECT_NEAR(f.statistic[i], g.statistic[i], 1e-12);
    }
    EXPECT_THROW(binom_log_ratio_slope(1, 1, 1, 1, 1, 1, e), InputError);
    EXPECT_THROW(binom_log_ratio_slope(1, 1, 2, 1, 1, 1, {2.0}), InputError);
}

// ---------------- serialization ----------------

TEST(Io, PolynomialRoundTripIsExact) {
    std::mt19937_64 rng(67);
    for (int t = 0; t < 20; ++t) {
        auto p = orc::random_poly(rng, 4, 3, 8);
        if (t % 2) p = to_chebyshev(p);
        auto q = io::poly_from_json(nlohmann::json::parse(io::poly_to_json(p).dump()));
        EXPECT_TRUE(p == q);
    }
}

TEST(Io, MalformedPolynomials) {
    auto dup = nlohmann::json::parse(R"({"dim":2,"terms":[{"exp":[1,0],"coeff":1},{"exp":[1,0],"coeff":2}]})");
    EXPECT_THROW(io::poly_from_json(dup), InputError);
    auto len = nlohmann::json::parse(R"({"dim":2,"terms":[{"exp":[1,0,0],"coeff":1}]})");
    EXPECT_THROW(io::poly_from_json(len), DimensionMismatch);
    auto nan = nlohmann::json::parse(R"({"dim":2,"terms":[{"exp":[1,0],"coeff":"x"}]})");
    EXPECT_THROW(io::poly_from_json(nan), InputError);
}

TEST(Io, CertificateRoundTripVerifies) {
    auto prob = io::problem_from_json(io::read_json_file(fixture("simple.json"))).build();
    auto res = schmuedgen_certify(prob);
    auto text = io::certificate_to_json(res.cert).dump();
    auto back = io::certificate_from_json(nlohmann::json::parse(text));
    auto v = verify(back);
    EXPECT_TRUE(v.pass);
    EXPECT_LE(v.residual, 1e-6);
    EXPECT_EQ(io::certificate_to_json(back).dump(), text);
}

// ---------------- command line ----------------

TEST(Cli, AnalyzeReportsCliques) {
    // f = x1 x2 + x2 x3
    const auto path = temp_path("analyze.json");
    io::write_text_file(path, R"({"objective":{"dim":3,"terms":[{"exp":[1,1,0],"coeff":1},{"exp":[0,1,1],"coeff":1}]},"epsilon":0.1})");
    std::string out;
    ASSERT_EQ(run_cli({"analyze", "--input", path}, &out), 0);
    auto j = nlohmann::json::parse(out);
    EXPECT_EQ(j["structure"]["cliques"], nlohmann::json::parse("[[1,2],[2,3]]"));
    EXPECT_EQ(j["structure"]["rip"], true);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run_cli({"analyze", "--input", fixture("simple.json")}), 0);
    EXPECT_EQ(run_cli({"analyze", "--input", fixture("no_rip.json")}), 2);
    EXPECT_EQ(run_cli({"certify", "--input", fixture("not_positive.json")}), 2);
    EXPECT_EQ(run_cli({"verify", "--input", fixture("tampered_certificate.json")}), 2);
    EXPECT_EQ(run_cli({"analyze", "--input", fixture("duplicate_exponent.json")}), 1);
    EXPECT_EQ(run_cli({"analyze", "--input", fixture("nope.json")}), 1);
    EXPECT_EQ(run_cli({"analyze", "--input", fixture("simple.json"), "--grid", "1"}), 1);
    EXPECT_EQ(run_cli({"frobnicate"}), 1);
    EXPECT_EQ(run_cli({"certify", "--input", fixture("chain.json"), "--rcap", "2"}), 3);
}

TEST(Cli, MalformedInputNamesLocation) {
    std::string err;
    EXPECT_EQ(run_cli({"analyze", "--input", fixture("duplicate_exponent.json")}, nullptr, &err), 1);
    EXPECT_NE(err.find("objective"), std::string::npos) << err;
}

TEST(Cli, CertifyIsDeterministicAndVerifies) {
    const auto a = temp_path("cert_a.json"), b = temp_path("cert_b.json");
    ASSERT_EQ(run_cli({"certify", "--input", fixture("simple.json"), "--output", a, "--seed", "7"}), 0);
    ASSERT_EQ(run_cli({"certify", "--input", fixture("simple.json"), "--output", b, "--seed", "7"}), 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_EQ(run_cli({"verify", "--input", a}), 0);
}

TEST(Cli, KernelAndCompareTables) {
    std::string out;
    ASSERT_EQ(run_cli({"kernel", "--r", "3,4", "--x", "0.1,0.2", "--y", "-0.3,0.5"}, &out), 0);
    auto j = nlohmann::json::parse(out);
    const double want = orc::kernel_sum({3, 4}, {0.1, 0.2}, {-0.3, 0.5});
    EXPECT_NEAR(j["kernel"].get<double>(), want, 1e-12);
    ASSERT_EQ(run_cli({"compare", "--n", "12", "--J", "2,2", "--eps", "1e-4,1e-3,1e-2", "--format", "csv"}, &out), 0);
    EXPECT_NE(out.find("epsilon"), std::string::npos);
    ASSERT_EQ(run_cli({"bounds", "--input", fixture("chain.json")}, &out), 0);
    EXPECT_NO_THROW(nlohmann::json::parse(out));
}
