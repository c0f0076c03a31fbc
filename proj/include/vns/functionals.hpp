#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "vns/field.hpp"
#include "vns/kinetic.hpp"
#include "vns/spectral.hpp"

namespace vns {

/// Poincare-Wirtinger constant on the 2pi-torus in the form
/// |grad u|^2 >= c_P |u - <u>|^2: the lowest nonzero mode has |k| = 1.
inline constexpr double kPoincare = 1.0;

/// Scaled energy: (eps / (sigma^2 gamma)) (1/2) sum w |v|^2 + (1/2)|u|_L2^2.
inline double energy(const ParticleEnsemble& ens, const TorusField& u,
                     const ScalingRegime& regime) {
    const int d = ens.dim;
    double kin = 0.0;
    for (std::size_t i = 0; i < ens.count(); ++i) {
        double v2 = 0.0;
        for (int a = 0; a < d; ++a) v2 += ens.vel[i * d + a] * ens.vel[i * d + a];
        kin += ens.weight[i] * v2;
    }
    const double pref = regime.epsilon / (regime.sigma * regime.sigma * regime.gamma);
    const double un = u.l2_norm();
    return 0.5 * pref * kin + 0.5 * un * un;
}

/// |grad u|_L2^2 from the spectrum.
inline double grad_l2_sq(const TorusField& u) {
    const auto& wt = detail::wave_table(u.grid());
    const std::size_t sz = u.grid().size();
    const auto& spec = u.spectrum();
    double acc = 0.0;
    for (int c = 0; c < u.components(); ++c)
        for (std::size_t i = 0; i < sz; ++i)
            acc += wt.ksq[i] * std::norm(spec[static_cast<std::size_t>(c) * sz + i]);
    return acc;
}

/// Scaled dissipation: |grad u|_L2^2 + (1/gamma) sum w |v/sigma - u(x_i)|^2.
inline double dissipation(const ParticleEnsemble& ens, const TorusField& u,
                          const ScalingRegime& regime) {
    const int d = ens.dim;
    double kin = 0.0;
    for (std::size_t i = 0; i < ens.count(); ++i) {
        double U[3] = {0, 0, 0};
        detail::interp_vector(u, &ens.pos[i * d], U);
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
            const double r = ens.vel[i * d + a] / regime.sigma - U[a];
            r2 += r * r;
        }
        kin += ens.weight[i] * r2;
    }
    return grad_l2_sq(u) + kin / regime.gamma;
}

/// Modulated energy: the kinetic spread about the mean bulk velocity, the
/// fluid spread about its mean, and the mean-velocity mismatch term. Empty
/// ensembles use the zero-mass limit convention (first and third terms 0).
inline double modulated_energy(const ParticleEnsemble& ens, const TorusField& u,
                               const ScalingRegime& regime) {
    const int d = u.grid().dim();
    const double R = ens.total_weight();
    double term1 = 0.0, term3 = 0.0;
    if (R > 0.0) {
        double J[3] = {0, 0, 0};
        for (std::size_t i = 0; i < ens.count(); ++i)
            for (int a = 0; a < d; ++a)
                J[a] += ens.weight[i] * ens.vel[i * d + a] / regime.sigma;
        double bulk[3];
        for (int a = 0; a < d; ++a) bulk[a] = J[a] / R;
        for (std::size_t i = 0; i < ens.count(); ++i) {
            double s = 0.0;
            for (int a = 0; a < d; ++a) {
                const double r = ens.vel[i * d + a] / regime.sigma - bulk[a];
                s += r * r;
            }
            term1 += ens.weight[i] * s;
        }
        term1 *= 0.5 * regime.epsilon / regime.gamma;
        double mism = 0.0;
        for (int a = 0; a < d; ++a) {
            const double delta = bulk[a] - u.mean(a);
            mism += delta * delta;
        }
        term3 = 0.5 * regime.epsilon * R / (regime.gamma + regime.epsilon * R) * mism;
    }
    double mean_sq = 0.0;
    for (int a = 0; a < d; ++a) mean_sq += u.mean(a) * u.mean(a);
    const double un = u.l2_norm();
    const double term2 = 0.5 * std::max(0.0, un * un - mean_sq);
    return term1 + term2 + term3;
}

/// Conditional decay rate of the modulated energy:
/// lambda = min(c_P / (eps (c_P + 4 R)), c_P / 2) with R = |rho|_Linf.
inline double lambda_bound(double rho_linf, const ScalingRegime& regime) {
    if (rho_linf < 0.0) throw std::invalid_argument("lambda_bound: rho_linf < 0");
    return std::min(kPoincare / (regime.epsilon * (kPoincare + 4.0 * rho_linf)),
                    kPoincare / 2.0);
}

/// Higher fluid-kinetic dissipation of order r:
/// sum w |v/sigma - u(x_i)|^r / eps^r (sigma = 1 recovers the fine form).
inline double higher_dissipation(const ParticleEnsemble& ens, const TorusField& u,
                                 double r, const ScalingRegime& regime) {
    if (r < 2.0) throw std::invalid_argument("higher_dissipation: r must be >= 2");
    const int d = ens.dim;
    double acc = 0.0;
    for (std::size_t i = 0; i < ens.count(); ++i) {
        double U[3] = {0, 0, 0};
        detail::interp_vector(u, &ens.pos[i * d], U);
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
            const double rr = ens.vel[i * d + a] / regime.sigma - U[a];
            r2 += rr * rr;
        }
        acc += ens.weight[i] * std::pow(r2, 0.5 * r);
    }
    return acc / std::pow(regime.epsilon, r);
}

/// sum w |v/sigma - u(x_i)|^power, power in {1, 2}: the paper's surrogate for
/// phase-space Wasserstein concentration on the monokinetic limit.
inline double phase_space_concentration(const ParticleEnsemble& ens,
                                        const TorusField& u,
                                        const ScalingRegime& regime, int power) {
    if (power != 1 && power != 2)
        throw std::invalid_argument("phase_space_concentration: power must be 1 or 2");
    const int d = ens.dim;
    double acc = 0.0;
    for (std::size_t i = 0; i < ens.count(); ++i) {
        double U[3] = {0, 0, 0};
        detail::interp_vector(u, &ens.pos[i * d], U);
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
            const double rr = ens.vel[i * d + a] / regime.sigma - U[a];
            r2 += rr * rr;
        }
        acc += ens.weight[i] * (power == 2 ? r2 : std::sqrt(r2));
    }
    return acc;
}

/// Raw velocity moment sum w |v|^power (Dirac-at-zero diagnostic for the
/// light-and-fast regime).
inline double velocity_moment(const ParticleEnsemble& ens, int power) {
    const int d = ens.dim;
    double acc = 0.0;
    for (std::size_t i = 0; i < ens.count(); ++i) {
        double v2 = 0.0;
        for (int a = 0; a < d; ++a) v2 += ens.vel[i * d + a] * ens.vel[i * d + a];
        acc += ens.weight[i] * (power == 2 ? v2 : std::sqrt(v2));
    }
    return acc;
}

/// Relative entropy against a reference pair (u_ref, rho_ref) and its
/// G-field, with the I-term split (fine regime) or the eps-weighted J-term
/// split (light regimes) selected by the preset.
struct EntropyTerms {
    double h = 0.0;
    double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
};

inline EntropyTerms relative_entropy(const ParticleEnsemble& ens,
                                     const TorusField& rho_eps,
                                     const TorusField& u_eps,
                                     const TorusField& u_ref,
                                     const TorusField& rho_ref, const TorusField& G,
                                     const ScalingRegime& regime) {
    const TorusGrid& g = u_ref.grid();
    const int d = g.dim();
    const std::size_t sz = g.size();
    const bool fine = regime.preset == ScalingRegime::Preset::fine;
    const double eps = regime.epsilon;
    const double inv_sigma = 1.0 / regime.sigma;

    // Gradient planes of u_ref for the quadratic terms.
    std::vector<TorusField> grad;
    grad.reserve(static_cast<std::size_t>(d) * d);
    for (int c = 0; c < d; ++c)
        for (int a = 0; a < d; ++a) grad.push_back(spectral_derivative(u_ref, c, a));

    EntropyTerms out;
    double kin = 0.0, t1 = 0.0, t3 = 0.0;
    for (std::size_t i = 0; i < ens.count(); ++i) {
        const double* x = &ens.pos[i * d];
        const double w = ens.weight[i];
        double Ur[3] = {0, 0, 0}, Ue[3] = {0, 0, 0}, Gx[3] = {0, 0, 0};
        detail::interp_vector(u_ref, x, Ur);
        detail::interp_vector(u_eps, x, Ue);
        detail::interp_vector(G, x, Gx);
        double rel[3], rel_eps[3];
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
            const double vs = ens.vel[i * d + a] * (fine ? 1.0 : inv_sigma);
            rel[a] = vs - Ur[a];
            rel_eps[a] = vs - Ue[a];
            r2 += rel[a] * rel[a];
        }
        kin += w * r2;
        double quad = 0.0, dotg = 0.0;
        for (int c = 0; c < d; ++c) {
            for (int a = 0; a < d; ++a)
                quad += rel[c] * rel[a] *
                        detail::interp_scalar(
                            g, grad[static_cast<std::size_t>(c) * d + a].component(0), x);
            dotg += rel_eps[c] * Gx[c];
        }
        t1 -= w * quad;
        t3 += w * dotg;
    }

    // Fluid part on the grid.
    double fl = 0.0, t2 = 0.0, t4 = 0.0;
    for (std::size_t i = 0; i < sz; ++i) {
        double diff[3], g2 = 0.0;
        for (int a = 0; a < d; ++a) {
            diff[a] = u_eps.value(a, i) - u_ref.value(a, i);
            g2 += diff[a] * diff[a];
        }
        fl += g2;
        double quad = 0.0, dotg = 0.0;
        for (int c = 0; c < d; ++c) {
            for (int a = 0; a < d; ++a)
                quad += diff[c] * diff[a] *
                        grad[static_cast<std::size_t>(c) * d + a].value(0, i);
            dotg += diff[c] * G.value(c, i);
        }
        t2 -= quad;
        const double rho_factor =
            fine ? (rho_eps.value(0, i) - rho_ref.value(0, i)) : rho_eps.value(0, i);
        t4 += rho_factor * dotg;
    }
    const double invsz = 1.0 / static_cast<double>(sz);
    fl *= invsz;
    t2 *= invsz;
    t4 *= invsz;

    if (fine) {
        out.h = 0.5 * kin + 0.5 * fl;
        out.t1 = t1;
        out.t2 = t2;
        out.t3 = t3;
        out.t4 = t4;
    } else {
        out.h = 0.5 * eps * kin + 0.5 * fl;
        out.t1 = eps * t1;
        out.t2 = t2;
        out.t3 = eps * t3;
        out.t4 = eps * t4;
    }
    return out;
}

/// One time sample of the quantities entering the order-r dissipation
/// identity: D_r(t), the boundary moment M_r(t) = eps D_r... scaled by
/// eps^{r-1}, and the drive term B_r(t) built from the solver's stage
/// derivative of u.
struct FineKeySample {
    double t = 0.0;
    double d_r = 0.0;  // sum w |v-u|^r / eps^r
    double m_r = 0.0;  // sum w |v-u|^r / eps^{r-1}
    double b_r = 0.0;  // sum w (du/dt + (grad u) v) . (v-u) |v-u|^{r-2} / eps^{r-1}
};

struct FineKeyTrace {
    double r = 2.0;
    double epsilon = 1.0;
    std::vector<FineKeySample> samples;
};

inline FineKeySample fine_key_sample(const ParticleEnsemble& ens, const TorusField& u,
                                     const TorusField& dudt, double r, double eps,
                                     double t) {
    const TorusGrid& g = u.grid();
    const int d = g.dim();
    std::vector<TorusField> grad;
    grad.reserve(static_cast<std::size_t>(d) * d);
    for (int c = 0; c < d; ++c)
        for (int a = 0; a < d; ++a) grad.push_back(spectral_derivative(u, c, a));

    FineKeySample s;
    s.t = t;
    const double inv_eps_r = std::pow(eps, -r);
    const double inv_eps_rm1 = std::pow(eps, -(r - 1.0));
    for (std::size_t i = 0; i < ens.count(); ++i) {
        const double* x = &ens.pos[i * d];
        const double* v = &ens.vel[i * d];
        const double w = ens.weight[i];
        double U[3] = {0, 0, 0}, Ut[3] = {0, 0, 0};
        detail::interp_vector(u, x, U);
        detail::interp_vector(dudt, x, Ut);
        double rel[3], r2 = 0.0;
        for (int a = 0; a < d; ++a) {
            rel[a] = v[a] - U[a];
            r2 += rel[a] * rel[a];
        }
        const double rnorm = std::sqrt(r2);
        const double pow_r = std::pow(rnorm, r);
        const double pow_rm2 = r2 > 0.0 ? std::pow(rnorm, r - 2.0) : (r == 2.0 ? 1.0 : 0.0);
        s.d_r += w * pow_r * inv_eps_r;
        s.m_r += w * pow_r * inv_eps_rm1;
        double drive = 0.0;
        for (int c = 0; c < d; ++c) {
            double conv = Ut[c];
            for (int a = 0; a < d; ++a)
                conv += detail::interp_scalar(
                            g, grad[static_cast<std::size_t>(c) * d + a].component(0), x) *
                        v[a];
            drive += conv * rel[c];
        }
        s.b_r += w * drive * pow_rm2 * inv_eps_rm1;
    }
    return s;
}

/// Residual of the order-r dissipation identity evaluated by trapezoid
/// quadrature on the stored trace:
///   LHS = int D_r dt, RHS = -(1/r)[M_r]_0^T - int B_r dt,
/// reported as |LHS - RHS| / (|LHS| + |RHS| + floor).
inline double fine_key_residual(const FineKeyTrace& trace, double floor = 1e-12) {
    if (trace.samples.size() < 3)
        throw std::invalid_argument("fine_key_residual: trace too short (< 3 samples)");
    double lhs = 0.0, drive = 0.0;
    for (std::size_t i = 1; i < trace.samples.size(); ++i) {
        const auto& a = trace.samples[i - 1];
        const auto& b = trace.samples[i];
        const double dt = b.t - a.t;
        lhs += 0.5 * dt * (a.d_r + b.d_r);
        drive += 0.5 * dt * (a.b_r + b.b_r);
    }
    const double boundary = trace.samples.back().m_r - trace.samples.front().m_r;
    const double rhs = -boundary / trace.r - drive;
    return std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + floor);
}

} // namespace vns
