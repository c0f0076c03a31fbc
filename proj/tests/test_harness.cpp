#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "vns/harness.hpp"

using namespace vns;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

RunConfig small_cfg() {
    RunConfig cfg;
    cfg.n = 16;
    cfg.dt = 2e-3;
    cfg.t_final = 0.1;
    cfg.u0 = "taylor_green";
    cfg.u0_amplitude = 0.4;
    cfg.particles = 2048;
    cfg.regime = "light";
    cfg.epsilon = 0.1;
    cfg.seed = 3;
    cfg.cadence = 5;
    cfg.validate();
    return cfg;
}

} // namespace

TEST_CASE("config: full round trip") {
    const std::string text = R"(
# comment
[fluid]
n = 32
dt = 5e-4        # trailing comment
t_final = 0.25
u0 = bandlimited
u0_amplitude = 0.3
u0_kmax = 3
cstar = 0.8

[kinetic]
regime = light_fast
alpha = 0.25
epsilon = 0.05
particles = 1234
init = maxwellian
theta = 0.1
rho0 = cosine
rho0_amplitude = 0.4
seed = 99
higher_r = 2, 4

[sweep]
epsilons = 0.1, 0.05, 0.02
reference = tns
w1_grid = 8

[output]
directory = /tmp/x
cadence = 10
snapshots = false
)";
    auto cfg = parse_config_text(text);
    CHECK(cfg.n == 32);
    CHECK(cfg.dt == 5e-4);
    CHECK(cfg.u0 == "bandlimited");
    CHECK(cfg.cstar.has_value());
    CHECK(cfg.regime == "light_fast");
    CHECK(cfg.alpha == 0.25);
    CHECK(cfg.particles == 1234);
    CHECK(cfg.theta == 0.1);
    CHECK(cfg.seed == 99);
    CHECK(cfg.higher_r == std::vector<double>{2.0, 4.0});
    CHECK(cfg.epsilons == std::vector<double>{0.1, 0.05, 0.02});
    CHECK(cfg.w1_grid == 8);
    CHECK(cfg.cadence == 10);
    CHECK_FALSE(cfg.snapshots);
}

TEST_CASE("config: unknown keys and malformed input are rejected") {
    CHECK_THROWS_AS(parse_config_text("[fluid]\nnx = 32\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[grid]\nn = 32\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("n = 32\n"), ConfigError);  // outside section
    CHECK_THROWS_AS(parse_config_text("[fluid]\nn 32\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[fluid]\nn = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[fluid]\nn = 7\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[kinetic]\nepsilon = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[kinetic]\nregime = warm\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[sweep]\nepsilons = 0.1, 0.2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[sweep]\nw1_grid = 24\n"), ConfigError);
}

TEST_CASE("loglog fit oracles") {
    // e(eps) = eps^{1/2} exactly: slope 1/2, residual 0
    std::vector<double> eps{0.1, 0.05, 0.02, 0.01, 0.005};
    std::vector<double> e1, e2;
    for (double e : eps) {
        e1.push_back(std::sqrt(e));
        e2.push_back(3.0 * e);
    }
    auto f1 = fit_loglog(eps, e1);
    CHECK(f1.slope == Catch::Approx(0.5).margin(1e-12));
    CHECK(f1.residual < 1e-12);
    auto f2 = fit_loglog(eps, e2);
    CHECK(f2.slope == Catch::Approx(1.0).margin(1e-12));
    CHECK(f2.intercept == Catch::Approx(std::log(3.0)).margin(1e-12));

    CHECK_THROWS(fit_loglog({0.1, 0.2, 0.3}, {1.0, 2.0, 3.0}));  // increasing eps
    CHECK_THROWS(fit_loglog({0.1, 0.05}, {1.0, 2.0}));           // too few
}

TEST_CASE("zero initial data keeps every diagnostic at zero") {
    auto cfg = small_cfg();
    cfg.u0 = "zero";
    auto res = run_coupled(cfg, cfg.epsilon);
    for (const auto& r : res.series) {
        CHECK(r.energy == 0.0);
        CHECK(r.dissipation == 0.0);
        CHECK(r.modulated == 0.0);
        CHECK(r.conc_p1 == 0.0);
        CHECK(r.brinkman_l2 == 0.0);
        CHECK(r.velmom_p1 == 0.0);
        CHECK(r.momentum[0] == 0.0);
        CHECK(r.momentum[1] == 0.0);
    }
}

TEST_CASE("well-prepared first step has vanishing Brinkman force") {
    auto cfg = small_cfg();
    cfg.epsilon = 1.0;
    auto res = run_coupled(cfg, 1.0);
    CHECK(res.series.front().brinkman_l2 <= 1e-10);
}

TEST_CASE("bit-identical reruns") {
    auto cfg = small_cfg();
    auto a = run_coupled(cfg, cfg.epsilon);
    auto b = run_coupled(cfg, cfg.epsilon);
    const std::string pa = "/tmp/vns_det_a.csv", pb = "/tmp/vns_det_b.csv";
    write_diagnostics_csv(pa, a.series, cfg.dim, cfg.higher_r);
    write_diagnostics_csv(pb, b.series, cfg.dim, cfg.higher_r);
    CHECK(slurp(pa) == slurp(pb));
    CHECK(a.final_state.fluid.u.values() == b.final_state.fluid.u.values());
    CHECK(a.final_state.ens.pos == b.final_state.ens.pos);
}

TEST_CASE("restart from snapshot matches the uninterrupted run") {
    auto cfg = small_cfg();
    cfg.t_final = 0.05;
    auto first = run_coupled(cfg, cfg.epsilon);

    // snapshot round trip in the middle
    const std::string fp = "/tmp/vns_restart_f.vnsf", ep = "/tmp/vns_restart_p.vnsp";
    write_field_snapshot(fp, first.final_state.fluid.u);
    write_ensemble_snapshot(ep, first.final_state.ens);
    CoupledState resume;
    resume.fluid = FluidState{read_field_snapshot(fp), 0.05};
    resume.fluid.u.set_divergence_free(true);
    resume.ens = read_ensemble_snapshot(ep);

    auto cfg2 = cfg;
    cfg2.t_final = 0.1;
    auto resumed = run_coupled(cfg2, cfg.epsilon, nullptr, &resume);
    auto straight = run_coupled(cfg2, cfg.epsilon);

    const double scale = std::max(1e-12, straight.final_state.fluid.u.l2_norm());
    CHECK(l2_distance(resumed.final_state.fluid.u, straight.final_state.fluid.u) <=
          1e-12 * scale);
    double max_dp = 0.0;
    for (std::size_t i = 0; i < straight.final_state.ens.pos.size(); ++i)
        max_dp = std::max(max_dp, std::abs(resumed.final_state.ens.pos[i] -
                                           straight.final_state.ens.pos[i]));
    CHECK(max_dp <= 1e-12);
}

TEST_CASE("snapshot formats round trip and reject bad magic") {
    const TorusGrid g(2, 16);
    auto f = vns::test::random_bandlimited(g, 2, 5, 77);
    write_field_snapshot("/tmp/vns_snap.vnsf", f);
    auto f2 = read_field_snapshot("/tmp/vns_snap.vnsf");
    CHECK(f2.values() == f.values());
    CHECK(f2.grid() == f.grid());

    ParticleEnsemble e;
    e.dim = 2;
    e.pos = {0.1, 0.2, 3.0, 4.0};
    e.vel = {1.0, -1.0, 0.5, 0.25};
    e.weight = {0.5, 0.5};
    write_ensemble_snapshot("/tmp/vns_snap.vnsp", e);
    auto e2 = read_ensemble_snapshot("/tmp/vns_snap.vnsp");
    CHECK(e2.pos == e.pos);
    CHECK(e2.vel == e.vel);
    CHECK(e2.weight == e.weight);

    CHECK_THROWS(read_field_snapshot("/tmp/vns_snap.vnsp"));
    CHECK_THROWS(read_ensemble_snapshot("/tmp/vns_snap.vnsf"));
}

TEST_CASE("diagnostics csv has a consistent header") {
    auto cfg = small_cfg();
    cfg.higher_r = {2.0, 4.0};
    auto res = run_coupled(cfg, cfg.epsilon);
    const std::string path = "/tmp/vns_diag.csv";
    write_diagnostics_csv(path, res.series, cfg.dim, cfg.higher_r);
    std::ifstream is(path);
    std::string header, row;
    REQUIRE(std::getline(is, header));
    REQUIRE(std::getline(is, row));
    const auto count = [](const std::string& s) {
        return std::count(s.begin(), s.end(), ',');
    };
    CHECK(count(header) == count(row));
    CHECK(header.rfind("t,energy,dissipation", 0) == 0);
    CHECK(header.find("higher_d_2") != std::string::npos);
    CHECK(header.find("higher_d_4") != std::string::npos);
}

TEST_CASE("small sweep completes with sane metrics") {
    RunConfig cfg;
    cfg.n = 16;
    cfg.dt = 2e-3;
    cfg.t_final = 0.1;
    cfg.u0 = "taylor_green";
    cfg.u0_amplitude = 0.4;
    cfg.particles = 4096;
    cfg.regime = "light";
    cfg.seed = 5;
    cfg.cadence = 10;
    cfg.epsilons = {0.2, 0.1, 0.05};
    cfg.reference = "tns";
    cfg.w1_grid = 8;
    cfg.w1_samples = 3;
    cfg.validate();

    int members = 0;
    auto fit = run_sweep(cfg, [&](double, const RunResult&) { ++members; });
    CHECK(members == 3);
    CHECK(fit.complete);
    REQUIRE(fit.epsilons.size() == 3);
    for (double e : fit.sup_u_err) CHECK(e > 0.0);
    for (double w : fit.avg_w1) CHECK(w >= 0.0);
    // smaller eps: smaller TNS distance
    CHECK(fit.sup_u_err.back() < fit.sup_u_err.front());

    write_ratefit_csv("/tmp/vns_rate.csv", fit);
    auto body = slurp("/tmp/vns_rate.csv");
    CHECK(body.find("# slope = ") != std::string::npos);
    CHECK(body.find("epsilon,sup_u_err") != std::string::npos);
}

TEST_CASE("sweep validates the regime/reference pairing") {
    RunConfig cfg;
    cfg.regime = "fine";
    cfg.reference = "tns";
    cfg.epsilons = {0.2, 0.1, 0.05};
    CHECK_THROWS_AS(run_sweep(cfg), ConfigError);
    cfg.regime = "light";
    cfg.reference = "ins";
    CHECK_THROWS_AS(run_sweep(cfg), ConfigError);
}
