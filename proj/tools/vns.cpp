#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "vns/harness.hpp"

namespace fs = std::filesystem;

namespace {

void write_error_record(const std::string& dir, const std::string& code,
                        const std::string& message) {
    fs::create_directories(dir);
    std::ofstream os(dir + "/error.txt");
    os << "code = " << code << "\n";
    os << "message = " << message << "\n";
}

void write_run_outputs(const vns::RunConfig& cfg, const std::string& dir,
                       const vns::RunResult& res) {
    fs::create_directories(dir);
    vns::write_diagnostics_csv(dir + "/diagnostics.csv", res.series, cfg.dim,
                               cfg.higher_r);
    if (cfg.snapshots) {
        vns::write_field_snapshot(dir + "/fluid.vnsf", res.final_state.fluid.u);
        vns::write_ensemble_snapshot(dir + "/particles.vnsp", res.final_state.ens);
    }
}

int cmd_run(const std::string& config_path) {
    vns::RunConfig cfg = vns::parse_config_file(config_path);
    std::optional<vns::ReferenceTrajectory> ref;
    if (cfg.reference != "none") {
        const vns::TorusGrid g(cfg.dim, cfg.n);
        auto u0 = vns::build_u0(cfg, g);
        auto rho0 = vns::build_rho0(cfg, g);
        auto scale = cfg.scaling(cfg.epsilon);
        auto ens = vns::build_ensemble(cfg, g, u0, rho0, scale);
        auto rho_init = vns::deposit(ens, u0, g, scale).rho;
        ref = vns::run_reference(cfg, u0, rho_init);
    }
    try {
        auto res = vns::run_coupled(cfg, cfg.epsilon, ref ? &*ref : nullptr);
        write_run_outputs(cfg, cfg.directory, res);
        std::printf("run complete: t = %.6g, %zu samples, mass drift %.3e\n",
                    cfg.t_final, res.series.size(),
                    std::abs(res.mass_final - res.mass0) /
                        std::max(1e-300, res.mass0));
        std::printf("outputs in %s\n", cfg.directory.c_str());
        return 0;
    } catch (const vns::NumericalError& e) {
        write_error_record(cfg.directory, e.code(), e.what());
        std::fprintf(stderr, "numerical failure [%s]: %s\n", e.code().c_str(),
                     e.what());
        return 1;
    }
}

int cmd_sweep(const std::string& config_path) {
    vns::RunConfig cfg = vns::parse_config_file(config_path);
    if (cfg.epsilons.empty())
        throw vns::ConfigError("sweep requires [sweep] epsilons = ...");
    fs::create_directories(cfg.directory);
    auto on_member = [&](double eps, const vns::RunResult& res) {
        char sub[64];
        std::snprintf(sub, sizeof sub, "%s/eps_%g", cfg.directory.c_str(), eps);
        write_run_outputs(cfg, sub, res);
        std::printf("  eps = %-8g sup|u - u_ref| = %.4e  avg W1 = %.4e\n", eps,
                    res.sup_u_err, res.avg_w1);
        std::fflush(stdout);
    };
    vns::RateFit fit = vns::run_sweep(cfg, on_member);
    vns::write_ratefit_csv(cfg.directory + "/ratefit.csv", fit);
    if (cfg.plot_script)
        vns::write_plot_script(cfg.directory + "/plot.gp", "ratefit.csv");
    if (!fit.complete) {
        write_error_record(cfg.directory, "sweep_member", fit.error);
        std::fprintf(stderr, "sweep failed, partial results kept: %s\n",
                     fit.error.c_str());
        return 1;
    }
    std::printf("sweep complete: %s slope %.3f (intercept %.3f, residual %.3e)\n",
                fit.metric_name.c_str(), fit.fit.slope, fit.fit.intercept,
                fit.fit.residual);
    std::printf("outputs in %s\n", cfg.directory.c_str());
    return 0;
}

int cmd_validate(const std::string& filter) {
    auto checks = vns::validate(filter);
    bool all = true;
    for (const auto& c : checks) {
        std::printf("%-24s %s  %s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL",
                    c.detail.c_str());
        all = all && c.pass;
    }
    if (checks.empty()) std::printf("no checks matched filter '%s'\n", filter.c_str());
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vns: multiscale Vlasov-Navier-Stokes simulator"};
    app.require_subcommand(1);

    std::string run_config, sweep_config, filter;
    auto* run = app.add_subcommand("run", "coupled kinetic-fluid run");
    run->add_option("config", run_config, "config file")->required();
    auto* sweep = app.add_subcommand("sweep", "epsilon sweep with rate fit");
    sweep->add_option("config", sweep_config, "config file")->required();
    auto* val = app.add_subcommand("validate", "built-in oracle suite");
    val->add_option("--filter", filter, "substring filter on check names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_run(run_config);
        if (sweep->parsed()) return cmd_sweep(sweep_config);
        return cmd_validate(filter);
    } catch (const vns::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const vns::NumericalError& e) {
        std::fprintf(stderr, "numerical failure [%s]: %s\n", e.code().c_str(),
                     e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
