#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vns/config.hpp"
#include "vns/errors.hpp"
#include "vns/fluid.hpp"
#include "vns/functionals.hpp"
#include "vns/kinetic.hpp"
#include "vns/limit_models.hpp"
#include "vns/snapshot.hpp"
#include "vns/spectral.hpp"
#include "vns/wasserstein.hpp"

namespace vns {

// ---------------------------------------------------------------------------
// Initial data presets
// ---------------------------------------------------------------------------

inline TorusField build_u0(const RunConfig& cfg, const TorusGrid& g) {
    TorusField u(g, g.dim());
    const int d = g.dim();
    if (cfg.u0 == "taylor_green") {
        if (d != 2) throw ConfigError("taylor_green preset requires dim = 2");
        double* u0 = u.mutable_component(0);
        double* u1 = u.mutable_component(1);
        for (std::size_t i = 0; i < g.size(); ++i) {
            auto c = g.coords(i);
            const double x = g.node(c[0]), y = g.node(c[1]);
            u0[i] = cfg.u0_amplitude * std::sin(x) * std::cos(y);
            u1[i] = -cfg.u0_amplitude * std::cos(x) * std::sin(y);
        }
    } else if (cfg.u0 == "bandlimited") {
        CounterRng rng(cfg.seed ^ 0x75bcd15ULL);
        std::vector<std::complex<double>> spec(g.size() * d, 0.0);
        const std::size_t sz = g.size();
        std::uint64_t ctr = 0;
        for (int c = 0; c < d; ++c)
            for (std::size_t i = 0; i < sz; ++i) {
                auto cc = g.coords(i);
                bool keep = true;
                int knorm = 0;
                for (int a = 0; a < d; ++a) {
                    const int k = g.wavenumber(cc[a]);
                    if (std::abs(k) > cfg.u0_kmax) keep = false;
                    knorm += k * k;
                }
                if (!keep || knorm == 0) continue;
                spec[static_cast<std::size_t>(c) * sz + i] = {
                    rng.normal(300 + c, ctr), rng.normal(400 + c, ctr)};
                ++ctr;
            }
        TorusField draft(g, d);
        draft.set_spectrum(std::move(spec));
        // re-symmetrize to a real field, rescale to the requested amplitude
        TorusField realf(g, d);
        realf.mutable_values() = draft.values();
        TorusField proj = leray_project(realf);
        const double m = proj.max_abs();
        auto& v = u.mutable_values();
        const double s = m > 0 ? cfg.u0_amplitude / m : 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = proj.values()[i] * s;
    } else if (cfg.u0 == "constant" || cfg.u0 == "zero") {
        // nothing: mean offsets added below
    } else {
        throw ConfigError("unknown u0 preset '" + cfg.u0 + "'");
    }
    if (cfg.u0 != "zero") {
        const double means[3] = {cfg.u0_mean_x, cfg.u0_mean_y, cfg.u0_mean_z};
        for (int c = 0; c < d; ++c) {
            double* p = u.mutable_component(c);
            for (std::size_t i = 0; i < g.size(); ++i) p[i] += means[c];
        }
    }
    TorusField out = dealias(leray_project(u));
    out.set_divergence_free(true);
    return out;
}

inline TorusField build_rho0(const RunConfig& cfg, const TorusGrid& g) {
    TorusField rho(g, 1);
    double* p = rho.mutable_component(0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto c = g.coords(i);
        const double x = g.node(c[0]), y = g.node(c[1]);
        if (cfg.rho0 == "uniform")
            p[i] = 1.0;
        else
            p[i] = 1.0 + cfg.rho0_amplitude * std::cos(x) * std::cos(y);
    }
    return rho;
}

inline ParticleEnsemble build_ensemble(const RunConfig& cfg, const TorusGrid& g,
                                       const TorusField& u0, const TorusField& rho0,
                                       const ScalingRegime& regime) {
    TorusField vel(g, g.dim());
    auto& vv = vel.mutable_values();
    for (std::size_t i = 0; i < vv.size(); ++i) vv[i] = regime.sigma * u0.values()[i];
    InitialDataSpec spec =
        cfg.init == "monokinetic"
            ? InitialDataSpec::monokinetic(rho0, vel)
            : InitialDataSpec::maxwellian(rho0, vel, cfg.theta);
    return sample_initial(spec, cfg.particles, cfg.seed);
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

struct DiagnosticRecord {
    double t = 0.0;
    double energy = 0.0;
    double dissipation = 0.0;
    double diss_integral = 0.0;
    double modulated = 0.0;
    double lambda = 0.0;
    double rel_entropy = 0.0;
    double ent1 = 0.0, ent2 = 0.0, ent3 = 0.0, ent4 = 0.0;
    double conc_p1 = 0.0, conc_p2 = 0.0;
    double velmom_p1 = 0.0;
    double brinkman_l2 = 0.0;
    double rho_linf = 0.0;
    std::array<double, 3> momentum{0.0, 0.0, 0.0};
    double accum_grad = 0.0, accum_f_l2 = 0.0, accum_heat = 0.0;
    int strong_grad_ok = 1;
    int cstar_ok = -1;  // -1: no C* supplied
    double ref_u_err = 0.0, ref_rho_hm1 = 0.0;
    std::vector<double> higher;
};

inline std::vector<std::string> diagnostic_columns(int dim,
                                                   const std::vector<double>& rlist) {
    std::vector<std::string> cols = {
        "t",          "energy",      "dissipation", "diss_integral", "modulated",
        "lambda",     "rel_entropy", "ent1",        "ent2",          "ent3",
        "ent4",       "conc_p1",     "conc_p2",     "velmom_p1",     "brinkman_l2",
        "rho_linf",   "mom_x",       "mom_y"};
    if (dim > 2) cols.push_back("mom_z");
    cols.insert(cols.end(), {"accum_grad", "accum_f_l2", "accum_heat",
                             "strong_grad_ok", "cstar_ok", "ref_u_err", "ref_rho_hm1"});
    for (double r : rlist) {
        char buf[48];
        std::snprintf(buf, sizeof buf, "higher_d_%g", r);
        cols.push_back(buf);
    }
    return cols;
}

inline void write_diagnostics_csv(const std::string& path,
                                  const std::vector<DiagnosticRecord>& series, int dim,
                                  const std::vector<double>& rlist) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    auto cols = diagnostic_columns(dim, rlist);
    for (std::size_t i = 0; i < cols.size(); ++i)
        os << cols[i] << (i + 1 < cols.size() ? "," : "\n");
    char buf[40];
    auto put = [&](double v, bool last = false) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf << (last ? "\n" : ",");
    };
    for (const auto& r : series) {
        put(r.t);
        put(r.energy);
        put(r.dissipation);
        put(r.diss_integral);
        put(r.modulated);
        put(r.lambda);
        put(r.rel_entropy);
        put(r.ent1);
        put(r.ent2);
        put(r.ent3);
        put(r.ent4);
        put(r.conc_p1);
        put(r.conc_p2);
        put(r.velmom_p1);
        put(r.brinkman_l2);
        put(r.rho_linf);
        put(r.momentum[0]);
        put(r.momentum[1]);
        if (dim > 2) put(r.momentum[2]);
        put(r.accum_grad);
        put(r.accum_f_l2);
        put(r.accum_heat);
        put(static_cast<double>(r.strong_grad_ok));
        put(static_cast<double>(r.cstar_ok));
        put(r.ref_u_err);
        put(r.ref_rho_hm1, r.higher.empty());
        for (std::size_t j = 0; j < r.higher.size(); ++j)
            put(r.higher[j], j + 1 == r.higher.size());
    }
}

// ---------------------------------------------------------------------------
// Reference trajectory (limit-model co-run)
// ---------------------------------------------------------------------------

struct ReferenceTrajectory {
    std::string model;  // "tns" | "ins"
    std::vector<double> times;
    std::vector<TorusField> u;
    std::vector<TorusField> rho;
    std::vector<TorusField> G;  // entropy G-field at each sample
};

/// Advance the configured limit model from the shared initial data, sampling
/// at the coupled run's diagnostic times.
inline ReferenceTrajectory run_reference(const RunConfig& cfg, const TorusField& u0,
                                         const TorusField& rho0_deposit) {
    ReferenceTrajectory out;
    out.model = cfg.reference;
    const int cad = cfg.effective_cadence();
    const int steps = static_cast<int>(std::llround(cfg.t_final / cfg.dt));
    const double sample_dt = cfg.dt * cad;
    double ref_dt = cfg.ref_dt > 0.0 ? cfg.ref_dt : cfg.dt;
    const int nsub = std::max(1, static_cast<int>(std::llround(sample_dt / ref_dt)));
    ref_dt = sample_dt / nsub;

    auto sample_tns = [&](const TnsState& s) {
        out.times.push_back(s.t);
        out.u.push_back(s.u);
        out.rho.push_back(s.rho);
        out.G.push_back(ns_entropy_g(s.u));
    };
    auto sample_ins = [&](const InsState& s) {
        out.times.push_back(s.t);
        out.u.push_back(s.u);
        out.rho.push_back(s.rho);
        out.G.push_back(ins_entropy_g(s));
    };

    if (cfg.reference == "tns") {
        TnsState s{u0, rho0_deposit, 0.0};
        sample_tns(s);
        for (int n = cad; n <= steps; n += cad) {
            for (int k = 0; k < nsub; ++k) s = tns_step(s, ref_dt);
            sample_tns(s);
        }
    } else if (cfg.reference == "ins") {
        InsState s{u0, rho0_deposit, 0.0, TorusField()};
        sample_ins(s);
        for (int n = cad; n <= steps; n += cad) {
            for (int k = 0; k < nsub; ++k) s = ins_step(s, ref_dt);
            sample_ins(s);
        }
    } else {
        throw ConfigError("run_reference: reference model is 'none'");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Coupled run
// ---------------------------------------------------------------------------

struct CoupledState {
    FluidState fluid;
    ParticleEnsemble ens;
};

struct RunResult {
    std::vector<DiagnosticRecord> series;
    CoupledState final_state;
    double mass0 = 0.0, mass_final = 0.0;
    std::array<double, 3> momentum0{0.0, 0.0, 0.0};
    // metrics vs the reference trajectory (when supplied)
    double sup_u_err = 0.0;
    double sup_rho_hm1 = 0.0;
    double avg_w1 = 0.0;
    double sup_rel_entropy = 0.0;
    double init_u_err = 0.0, init_rho_hm1 = 0.0;
    double conc2_time_integral = 0.0;
    double velmom1_final = 0.0;
    std::map<double, FineKeyTrace> fine_traces;
};

/// Strang-coupled time loop: deposit moments and the Brinkman force, half
/// fluid step with F, full kinetic push against the mid-step velocity, fresh
/// deposit, second half fluid step. Diagnostics at the configured cadence.
inline RunResult run_coupled(const RunConfig& cfg, double eps,
                             const ReferenceTrajectory* ref = nullptr,
                             const CoupledState* resume = nullptr) {
    const ScalingRegime regime = cfg.scaling(eps);
    const TorusGrid g(cfg.dim, cfg.n);
    const int d = g.dim();

    TorusField u0 = build_u0(cfg, g);
    TorusField rho0 = build_rho0(cfg, g);

    CoupledState st;
    if (resume) {
        st = *resume;
    } else {
        st.fluid = FluidState{u0, 0.0};
        st.ens = build_ensemble(cfg, g, u0, rho0, regime);
    }

    RunResult res;
    res.mass0 = st.ens.total_weight();
    const int cad = cfg.effective_cadence();
    const int steps =
        static_cast<int>(std::llround((cfg.t_final - st.fluid.t) / cfg.dt));
    const double dt = cfg.dt;

    ExistenceMonitor monitor;
    bool monitor_ready = false;
    double rho_linf_max = 0.0;
    double prev_diss = 0.0, diss_integral = 0.0;
    double prev_conc2 = 0.0, conc2_integral = 0.0;
    double w1_sum = 0.0;
    int w1_count = 0;
    const int ndiag = steps / cad + 1;
    const int w1_every = std::max(1, ndiag / std::max(1, cfg.w1_samples));
    ExistenceMonitor::Flags mflags;

    if (regime.preset == ScalingRegime::Preset::fine)
        for (double r : cfg.higher_r) {
            FineKeyTrace t;
            t.r = r;
            t.epsilon = eps;
            res.fine_traces.emplace(r, std::move(t));
        }

    for (int n = 0, diag_idx = 0; n <= steps; ++n) {
        DepositStats stats;
        MomentFields m = deposit(st.ens, st.fluid.u, g, regime, &stats,
                                 cfg.force_smoothing);
        const double diss_now = grad_l2_sq(st.fluid.u) + stats.concentration_p2 / regime.gamma;
        if (n > 0) {
            diss_integral += 0.5 * dt * (prev_diss + diss_now);
            conc2_integral += 0.5 * dt * (prev_conc2 + stats.concentration_p2);
        }
        prev_diss = diss_now;
        prev_conc2 = stats.concentration_p2;
        rho_linf_max = std::max(rho_linf_max, m.rho.max_abs());

        if (!monitor_ready) {
            monitor = ExistenceMonitor(st.fluid, m.brinkman);
            monitor_ready = true;
            mflags.accum_grad = 0.0;
            mflags.accum_f_l2 = 0.0;
            mflags.accum_heat = 0.0;
            mflags.strong_grad_ok = true;
            if (cfg.cstar) mflags.cstar_ok = true;
        } else if (n % cad == 0) {
            mflags = monitor.update(st.fluid, m.brinkman, dt * cad, cfg.cstar);
        }

        if (n % cad == 0) {
            DiagnosticRecord rec;
            rec.t = st.fluid.t;
            rec.energy = energy(st.ens, st.fluid.u, regime);
            rec.dissipation = diss_now;
            rec.diss_integral = diss_integral;
            rec.modulated = modulated_energy(st.ens, st.fluid.u, regime);
            rec.lambda = lambda_bound(rho_linf_max, regime);
            rec.conc_p1 = stats.concentration_p1;
            rec.conc_p2 = stats.concentration_p2;
            rec.velmom_p1 = velocity_moment(st.ens, 1);
            rec.brinkman_l2 = m.brinkman.l2_norm();
            rec.rho_linf = m.rho.max_abs();
            for (int c = 0; c < d; ++c)
                rec.momentum[c] =
                    (eps / regime.gamma) * m.current.mean(c) + st.fluid.u.mean(c);
            rec.accum_grad = mflags.accum_grad;
            rec.accum_f_l2 = mflags.accum_f_l2;
            rec.accum_heat = mflags.accum_heat;
            rec.strong_grad_ok = mflags.strong_grad_ok ? 1 : 0;
            rec.cstar_ok = mflags.cstar_ok ? (*mflags.cstar_ok ? 1 : 0) : -1;

            if (ref && diag_idx < static_cast<int>(ref->times.size())) {
                const TorusField& u_ref = ref->u[diag_idx];
                const TorusField& rho_ref = ref->rho[diag_idx];
                rec.ref_u_err = l2_distance(st.fluid.u, u_ref);
                rec.ref_rho_hm1 = sobolev_distance(m.rho, rho_ref, -1.0);
                auto terms = relative_entropy(st.ens, m.rho, st.fluid.u, u_ref,
                                              rho_ref, ref->G[diag_idx], regime);
                rec.rel_entropy = terms.h;
                rec.ent1 = terms.t1;
                rec.ent2 = terms.t2;
                rec.ent3 = terms.t3;
                rec.ent4 = terms.t4;
                res.sup_u_err = std::max(res.sup_u_err, rec.ref_u_err);
                res.sup_rho_hm1 = std::max(res.sup_rho_hm1, rec.ref_rho_hm1);
                res.sup_rel_entropy = std::max(res.sup_rel_entropy, terms.h);
                if (diag_idx == 0) {
                    res.init_u_err = rec.ref_u_err;
                    res.init_rho_hm1 = rec.ref_rho_hm1;
                }
                if (diag_idx % w1_every == 0) {
                    auto a = coarsen_density(m.rho, cfg.w1_grid);
                    auto b = coarsen_density(rho_ref, cfg.w1_grid);
                    w1_sum += wasserstein1(a, b);
                    ++w1_count;
                }
            }

            for (double r : cfg.higher_r)
                rec.higher.push_back(higher_dissipation(st.ens, st.fluid.u, r, regime));
            for (auto& [r, trace] : res.fine_traces) {
                TorusField dudt = ns_time_derivative(st.fluid, m.brinkman);
                trace.samples.push_back(
                    fine_key_sample(st.ens, st.fluid.u, dudt, r, eps, st.fluid.t));
            }
            res.series.push_back(std::move(rec));
            ++diag_idx;
        }

        if (n == steps) break;

        // Strang: fluid half step, kinetic full step, fresh force, fluid half.
        st.fluid = ns_step(st.fluid, m.brinkman, 0.5 * dt);
        st.ens = push(st.ens, st.fluid.u, regime, dt);
        MomentFields m2 = deposit(st.ens, st.fluid.u, g, regime, nullptr,
                                  cfg.force_smoothing);
        st.fluid = ns_step(st.fluid, m2.brinkman, 0.5 * dt);
    }

    res.mass_final = st.ens.total_weight();
    res.momentum0 = res.series.empty() ? std::array<double, 3>{0, 0, 0}
                                       : res.series.front().momentum;
    res.conc2_time_integral = conc2_integral;
    res.velmom1_final = velocity_moment(st.ens, 1);
    res.avg_w1 = w1_count > 0 ? w1_sum / w1_count : 0.0;
    res.final_state = std::move(st);
    return res;
}

// ---------------------------------------------------------------------------
// Rate fitting and sweeps
// ---------------------------------------------------------------------------

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
};

/// Least-squares fit of log(err) against log(eps). Requires >= 3 points and
/// strictly decreasing eps.
inline LogLogFit fit_loglog(const std::vector<double>& eps,
                            const std::vector<double>& err) {
    if (eps.size() != err.size() || eps.size() < 3)
        throw std::invalid_argument("fit_loglog: need >= 3 matched points");
    for (std::size_t i = 1; i < eps.size(); ++i)
        if (eps[i] >= eps[i - 1])
            throw std::invalid_argument("fit_loglog: eps must be strictly decreasing");
    const std::size_t n = eps.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(eps[i] > 0.0) || !(err[i] > 0.0))
            throw std::invalid_argument("fit_loglog: values must be positive");
        lx[i] = std::log(eps[i]);
        ly[i] = std::log(err[i]);
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double nn = static_cast<double>(n);
    const double denom = nn * sxx - sx * sx;
    LogLogFit fit;
    fit.slope = (nn * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / nn;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / nn);
    return fit;
}

struct RateFit {
    std::vector<double> epsilons;
    std::vector<double> sup_u_err;
    std::vector<double> avg_w1;
    std::vector<double> sup_rho_hm1;
    std::vector<double> combined;
    std::vector<double> conc2_time_integral;
    std::vector<double> velmom1_final;
    std::vector<double> sup_rel_entropy;
    std::vector<double> c_fit;
    std::string metric_name;
    LogLogFit fit;
    bool complete = false;
    std::string error;
};

/// Epsilon sweep against a single reference run sharing the same initial data
/// projection (identical u0; reference density initialized from the deposited
/// particle density so the t = 0 mismatch vanishes). `on_member` is invoked
/// with each completed member run.
inline RateFit run_sweep(
    const RunConfig& cfg,
    const std::function<void(double, const RunResult&)>& on_member = nullptr) {
    if (cfg.epsilons.size() < 3)
        throw ConfigError("sweep needs at least 3 epsilons");
    const bool light_like = cfg.regime == "light" || cfg.regime == "light_fast";
    if (light_like && cfg.reference != "tns")
        throw ConfigError("light regimes require the tns reference");
    if (cfg.regime == "fine" && cfg.reference != "ins")
        throw ConfigError("fine regime requires the ins reference");

    const TorusGrid g(cfg.dim, cfg.n);
    TorusField u0 = build_u0(cfg, g);
    TorusField rho0 = build_rho0(cfg, g);
    // Positions and weights of the sampled ensemble are epsilon-independent,
    // so the deposited density seeds the reference identically for every run.
    ParticleEnsemble seed_ens =
        build_ensemble(cfg, g, u0, rho0, cfg.scaling(cfg.epsilons.front()));
    TorusField rho_init =
        deposit(seed_ens, u0, g, cfg.scaling(cfg.epsilons.front())).rho;
    ReferenceTrajectory ref = run_reference(cfg, u0, rho_init);

    RateFit out;
    out.metric_name = light_like ? "sup_u_err" : "sup_u_err + sup_rho_hm1";
    for (double eps : cfg.epsilons) {
        try {
            RunResult r = run_coupled(cfg, eps, &ref);
            if (on_member) on_member(eps, r);
            out.epsilons.push_back(eps);
            out.sup_u_err.push_back(r.sup_u_err);
            out.avg_w1.push_back(r.avg_w1);
            out.sup_rho_hm1.push_back(r.sup_rho_hm1);
            out.combined.push_back(r.sup_u_err + r.sup_rho_hm1);
            out.conc2_time_integral.push_back(r.conc2_time_integral);
            out.velmom1_final.push_back(r.velmom1_final);
            out.sup_rel_entropy.push_back(r.sup_rel_entropy);
            const double denom = r.init_u_err * r.init_u_err +
                                 r.init_rho_hm1 * r.init_rho_hm1 + eps;
            out.c_fit.push_back(r.sup_rel_entropy / denom);
        } catch (const NumericalError& e) {
            out.error = std::string("eps=") + std::to_string(eps) + ": " + e.what();
            return out;  // partial results preserved
        }
    }
    out.fit = fit_loglog(out.epsilons, light_like ? out.sup_u_err : out.combined);
    out.complete = true;
    return out;
}

inline void write_ratefit_csv(const std::string& path, const RateFit& r) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    char buf[40];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    os << "# metric = " << r.metric_name << "\n";
    os << "# slope = " << fmt(r.fit.slope) << "\n";
    os << "# intercept = " << fmt(r.fit.intercept) << "\n";
    os << "# residual = " << fmt(r.fit.residual) << "\n";
    os << "# complete = " << (r.complete ? 1 : 0) << "\n";
    if (!r.error.empty()) os << "# error = " << r.error << "\n";
    os << "epsilon,sup_u_err,avg_w1,sup_rho_hm1,combined,conc2_time_integral,"
          "velmom1_final,sup_rel_entropy,c_fit\n";
    for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
        os << fmt(r.epsilons[i]) << ',' << fmt(r.sup_u_err[i]) << ','
           << fmt(r.avg_w1[i]) << ',' << fmt(r.sup_rho_hm1[i]) << ','
           << fmt(r.combined[i]) << ',' << fmt(r.conc2_time_integral[i]) << ','
           << fmt(r.velmom1_final[i]) << ',' << fmt(r.sup_rel_entropy[i]) << ','
           << fmt(r.c_fit[i]) << "\n";
    }
}

inline void write_plot_script(const std::string& path, const std::string& csv_name) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "# Rate plot for a sweep; run: gnuplot -persist plot.gp\n"
       << "# Override the data path with: gnuplot -e \"datafile='...'\" plot.gp\n"
       << "datafile = exists(\"datafile\") ? datafile : '" << csv_name << "'\n"
       << "set datafile separator ','\n"
       << "set logscale xy\n"
       << "set xlabel 'epsilon'\n"
       << "set ylabel 'error'\n"
       << "set key left top\n"
       << "plot datafile every ::1 using 1:2 with linespoints title 'sup_t ||u_eps - u_ref||', \\\n"
       << "     datafile every ::1 using 1:3 with linespoints title 'avg W1(rho_eps, rho_ref)', \\\n"
       << "     datafile every ::1 using 1:5 with linespoints title 'combined'\n";
}

// ---------------------------------------------------------------------------
// Built-in validation report
// ---------------------------------------------------------------------------

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

inline std::vector<CheckResult> validate(const std::string& filter = "") {
    std::vector<CheckResult> out;
    auto want = [&](const std::string& name) {
        return filter.empty() || name.find(filter) != std::string::npos;
    };
    char buf[160];

    if (want("fluid_taylor_green")) {
        const TorusGrid g(2, 32);
        TorusField u(g, 2);
        double* a = u.mutable_component(0);
        double* b = u.mutable_component(1);
        for (std::size_t i = 0; i < g.size(); ++i) {
            auto c = g.coords(i);
            a[i] = std::sin(g.node(c[0])) * std::cos(g.node(c[1]));
            b[i] = -std::cos(g.node(c[0])) * std::sin(g.node(c[1]));
        }
        FluidState s{leray_project(u), 0.0};
        TorusField zero(g, 2);
        for (int i = 0; i < 200; ++i) s = ns_step(s, zero, 1e-3);
        double err = 0.0;
        const double decay = std::exp(-2.0 * 0.2);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double dx = s.u.value(0, i) - decay * a[i];
            const double dy = s.u.value(1, i) - decay * b[i];
            err += dx * dx + dy * dy;
        }
        err = std::sqrt(err / g.size()) / (decay * u.l2_norm());
        std::snprintf(buf, sizeof buf, "rel err %.2e (tol 1e-6)", err);
        out.push_back({"fluid_taylor_green", err <= 1e-6, buf});
    }

    if (want("pusher_closed_form")) {
        const TorusGrid g(2, 16);
        TorusField u(g, 2);
        double* a = u.mutable_component(0);
        for (std::size_t i = 0; i < g.size(); ++i) a[i] = 0.4;
        double worst = 0.0;
        for (double eps : {1.0, 1e-2, 1e-6}) {
            ParticleEnsemble e;
            e.dim = 2;
            e.pos = {1.0, 2.0};
            e.vel = {1.5, -0.5};
            e.weight = {1.0};
            auto r = push(e, u, ScalingRegime::light(eps), 1e-3);
            const double ee = std::exp(-1e-3 / eps);
            const double vx = 0.4 + (1.5 - 0.4) * ee;
            const double vy = -0.5 * ee;
            const double xx = wrap_coord(1.0 + 1e-3 * 0.4 + eps * (1 - ee) * (1.5 - 0.4));
            const double xy = wrap_coord(2.0 + eps * (1 - ee) * (-0.5));
            worst = std::max({worst, std::abs(r.vel[0] - vx), std::abs(r.vel[1] - vy),
                              std::abs(r.pos[0] - xx), std::abs(r.pos[1] - xy)});
        }
        std::snprintf(buf, sizeof buf, "max err %.2e (tol 1e-14)", worst);
        out.push_back({"pusher_closed_form", worst <= 1e-14, buf});
    }

    if (want("projector")) {
        const TorusGrid g(2, 32);
        TorusField grad(g, 2), tg(g, 2);
        double* ga = grad.mutable_component(0);
        double* ta = tg.mutable_component(0);
        double* tb = tg.mutable_component(1);
        for (std::size_t i = 0; i < g.size(); ++i) {
            auto c = g.coords(i);
            const double x = g.node(c[0]), y = g.node(c[1]);
            ga[i] = std::sin(x);
            ta[i] = std::sin(x) * std::cos(y);
            tb[i] = -std::cos(x) * std::sin(y);
        }
        const double e1 = leray_project(grad).max_abs();
        double e2 = 0.0;
        auto p = leray_project(tg);
        for (std::size_t i = 0; i < tg.values().size(); ++i)
            e2 = std::max(e2, std::abs(p.values()[i] - tg.values()[i]));
        std::snprintf(buf, sizeof buf, "gradient %.2e, fixed-point %.2e (tol 1e-12)", e1, e2);
        out.push_back({"projector", e1 <= 1e-12 && e2 <= 1e-12, buf});
    }

    if (want("w1_atoms")) {
        const TorusGrid g(2, 16);
        TorusField mu(g, 1), nu(g, 1), nu2(g, 1);
        mu.mutable_component(0)[g.index({2, 3, 0})] = 256.0;
        nu.mutable_component(0)[g.index({6, 3, 0})] = 256.0;
        nu2.mutable_component(0)[g.index({0, 0, 0})] = 128.0;
        nu2.mutable_component(0)[g.index({8, 0, 0})] = 128.0;
        TorusField mu2(g, 1);
        mu2.mutable_component(0)[g.index({0, 0, 0})] = 256.0;
        const double e1 = std::abs(wasserstein1(mu, nu) - 4.0 * g.spacing());
        const double e2 = std::abs(wasserstein1(mu2, nu2) - 0.25 * kTwoPi);
        std::snprintf(buf, sizeof buf, "pair %.2e, split %.2e (tol 1e-3)", e1, e2);
        out.push_back({"w1_atoms", e1 <= 1e-3 && e2 <= 1e-3, buf});
    }

    if (want("jacobian")) {
        const TorusGrid g(2, 16);
        TorusField zero(g, 2);
        FieldTrajectory traj;
        traj.add(0.0, zero);
        traj.add(0.5, zero);
        auto r = jacobian_probe({1.0, 1.0, 0.0}, {0.5, -0.5, 0.0}, traj, 0.5,
                                ScalingRegime::light(0.2));
        const double want_det = std::exp(2.0 * 0.5 / 0.2);
        const double e1 = std::abs(r.det - want_det) / want_det;

        TorusField tg(g, 2);
        double* ta = tg.mutable_component(0);
        double* tb = tg.mutable_component(1);
        for (std::size_t i = 0; i < g.size(); ++i) {
            auto c = g.coords(i);
            ta[i] = 0.04 * std::sin(g.node(c[0])) * std::cos(g.node(c[1]));
            tb[i] = -0.04 * std::cos(g.node(c[0])) * std::sin(g.node(c[1]));
        }
        FieldTrajectory traj2;
        for (int i = 0; i <= 10; ++i) traj2.add(0.05 * i, tg);
        bool all_ok = true;
        CounterRng rng(17);
        for (int k = 0; k < 20; ++k) {
            std::array<double, 3> x{kTwoPi * rng.uniform(1, k),
                                    kTwoPi * rng.uniform(2, k), 0.0};
            std::array<double, 3> v{rng.uniform(3, k) - 0.5, rng.uniform(4, k) - 0.5,
                                    0.0};
            auto rr = jacobian_probe(x, v, traj2, 0.5, ScalingRegime::light(0.25));
            if (!rr.bound_guaranteed || rr.det_scaled < 0.5) all_ok = false;
        }
        std::snprintf(buf, sizeof buf, "free-streaming err %.2e, 20 bound probes %s",
                      e1, all_ok ? "ok" : "FAIL");
        out.push_back({"jacobian", e1 <= 1e-12 && all_ok, buf});
    }

    return out;
}

} // namespace vns
