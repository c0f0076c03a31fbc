#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "vns/errors.hpp"
#include "vns/field.hpp"
#include "vns/fluid.hpp"
#include "vns/kinetic.hpp"
#include "vns/spectral.hpp"

namespace vns {

namespace detail {

inline double catmull_rom(double p0, double p1, double p2, double p3, double f) {
    return p1 + 0.5 * f * (p2 - p0 +
                           f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                f * (3.0 * (p1 - p2) + p3 - p0)));
}

/// Monotone (clipped) bicubic interpolation of a scalar plane at a point:
/// tensor-product Catmull-Rom clamped to the surrounding linear-interpolation
/// bounds, so transport creates no new extrema.
inline double interp_cubic_clamped(const TorusGrid& g, const double* plane,
                                   const double* x) {
    const int n = g.n();
    const double invh = n / kTwoPi;
    int i0[3];
    double f[3];
    const int d = g.dim();
    for (int a = 0; a < d; ++a) {
        double s = x[a] * invh;
        int i = static_cast<int>(std::floor(s));
        f[a] = s - i;
        i %= n;
        if (i < 0) i += n;
        i0[a] = i;
    }
    auto wrapn = [n](int i) { return ((i % n) + n) % n; };

    double value, lo, hi;
    if (d == 2) {
        double col[4];
        for (int j = -1; j <= 2; ++j) {
            const int iy = wrapn(i0[1] + j);
            double row[4];
            for (int i = -1; i <= 2; ++i) {
                std::array<int, 3> c{wrapn(i0[0] + i), iy, 0};
                row[i + 1] = plane[g.index(c)];
            }
            col[j + 1] = catmull_rom(row[0], row[1], row[2], row[3], f[0]);
        }
        value = catmull_rom(col[0], col[1], col[2], col[3], f[1]);
        lo = 1e300;
        hi = -1e300;
        for (int j = 0; j <= 1; ++j)
            for (int i = 0; i <= 1; ++i) {
                const double v = plane[g.index({wrapn(i0[0] + i), wrapn(i0[1] + j), 0})];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    } else {
        double dep[4];
        for (int k = -1; k <= 2; ++k) {
            const int iz = wrapn(i0[2] + k);
            double col[4];
            for (int j = -1; j <= 2; ++j) {
                const int iy = wrapn(i0[1] + j);
                double row[4];
                for (int i = -1; i <= 2; ++i)
                    row[i + 1] = plane[g.index({wrapn(i0[0] + i), iy, iz})];
                col[j + 1] = catmull_rom(row[0], row[1], row[2], row[3], f[0]);
            }
            dep[k + 1] = catmull_rom(col[0], col[1], col[2], col[3], f[1]);
        }
        value = catmull_rom(dep[0], dep[1], dep[2], dep[3], f[2]);
        lo = 1e300;
        hi = -1e300;
        for (int k = 0; k <= 1; ++k)
            for (int j = 0; j <= 1; ++j)
                for (int i = 0; i <= 1; ++i) {
                    const double v = plane[g.index(
                        {wrapn(i0[0] + i), wrapn(i0[1] + j), wrapn(i0[2] + k)})];
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
    }
    return std::min(hi, std::max(lo, value));
}

} // namespace detail

/// Semi-Lagrangian advection of a scalar by a divergence-free velocity:
/// midpoint departure points, monotone cubic interpolation, and a
/// multiplicative mass fix that pins the integral of rho exactly.
inline TorusField semi_lagrangian_transport(const TorusField& rho,
                                            const TorusField& u, double dt) {
    const TorusGrid& g = rho.grid();
    const int d = g.dim();
    const std::size_t sz = g.size();
    const double mass0 = rho.mean();
    TorusField out(g, 1);
    double* dst = out.mutable_component(0);
    const double* src = rho.component(0);
    for (std::size_t idx = 0; idx < sz; ++idx) {
        auto c = g.coords(idx);
        double x[3] = {g.node(c[0]), g.node(c[1]), d > 2 ? g.node(c[2]) : 0.0};
        double u0[3] = {0, 0, 0};
        detail::interp_vector(u, x, u0);
        double xm[3] = {0, 0, 0};
        for (int a = 0; a < d; ++a) xm[a] = wrap_coord(x[a] - 0.5 * dt * u0[a]);
        double um[3] = {0, 0, 0};
        detail::interp_vector(u, xm, um);
        double xd[3] = {0, 0, 0};
        for (int a = 0; a < d; ++a) xd[a] = wrap_coord(x[a] - dt * um[a]);
        dst[idx] = detail::interp_cubic_clamped(g, src, xd);
    }
    const double mass1 = out.mean();
    if (mass1 != 0.0 && mass0 != mass1) {
        const double fix = mass0 / mass1;
        for (std::size_t i = 0; i < sz; ++i) dst[i] *= fix;
    }
    return out;
}

/// Transport-Navier-Stokes state: passive density carried by a fluid obeying
/// the unforced Navier-Stokes equation.
struct TnsState {
    TorusField u;
    TorusField rho;
    double t = 0.0;
};

inline TnsState tns_step(const TnsState& state, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("tns_step: dt must be > 0");
    TnsState next;
    TorusField zero(state.u.grid(), state.u.grid().dim());
    FluidState fs{state.u, state.t};
    FluidState fs1 = ns_step(fs, zero, dt);
    next.u = std::move(fs1.u);
    next.rho = semi_lagrangian_transport(state.rho, state.u, dt);
    next.t = state.t + dt;
    return next;
}

/// Inhomogeneous Navier-Stokes state (total density 1 + rho). The pressure
/// gradient of the latest projection is exported for the relative-entropy
/// G-term.
struct InsState {
    TorusField u;
    TorusField rho;
    double t = 0.0;
    TorusField grad_p;  // set by ins_step
};

namespace detail {

/// Apply L p = div( dealias( beta .* grad p ) ) in spectral space. Inputs and
/// outputs live in the dealiased subspace, where L is symmetric negative.
inline Spectrum variable_poisson_apply(const TorusGrid& g, const Spectrum& p,
                                       const std::vector<double>& beta) {
    const std::size_t sz = g.size();
    const int d = g.dim();
    const auto& wt = wave_table(g);
    const std::complex<double> I(0.0, 1.0);
    TorusField grad(g, d);
    {
        Spectrum gs(sz * d);
        for (int a = 0; a < d; ++a)
            for (std::size_t i = 0; i < sz; ++i)
                gs[static_cast<std::size_t>(a) * sz + i] = I * wt.kd[i][a] * p[i];
        grad.set_spectrum(std::move(gs));
    }
    for (int a = 0; a < d; ++a) {
        double* ga = grad.mutable_component(a);
        for (std::size_t i = 0; i < sz; ++i) ga[i] *= beta[i];
    }
    Spectrum fs = grad.spectrum();
    dealias_spectrum(g, fs, d);
    Spectrum out(sz);
    for (std::size_t i = 0; i < sz; ++i) {
        std::complex<double> acc = 0.0;
        for (int a = 0; a < d; ++a)
            acc += I * wt.kd[i][a] * fs[static_cast<std::size_t>(a) * sz + i];
        out[i] = acc;
    }
    return out;
}

inline double spec_dot(const Spectrum& a, const Spectrum& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return s;
}

} // namespace detail

/// Solve div(beta grad p) = rhs (zero-mean data) by preconditioned conjugate
/// gradients with the constant-coefficient spectral preconditioner. Returns
/// the spectral pressure; throws NumericalError("cg") after 500 iterations.
inline detail::Spectrum variable_poisson_solve(const TorusGrid& g,
                                               const detail::Spectrum& rhs,
                                               const std::vector<double>& beta,
                                               double tol = 1e-10,
                                               int max_iter = 500) {
    const std::size_t sz = g.size();
    const auto& wt = detail::wave_table(g);
    double beta_mean = 0.0;
    for (double b : beta) beta_mean += b;
    beta_mean /= static_cast<double>(beta.size());

    // Solve A p = b with A = -L (symmetric positive on zero-mean functions).
    detail::Spectrum b(sz);
    for (std::size_t i = 0; i < sz; ++i) b[i] = -rhs[i];
    b[0] = 0.0;
    const double bnorm = std::sqrt(detail::spec_dot(b, b));
    detail::Spectrum p(sz, 0.0);
    if (bnorm == 0.0) return p;

    auto precond = [&](const detail::Spectrum& r) {
        detail::Spectrum z(sz, 0.0);
        for (std::size_t i = 1; i < sz; ++i)
            if (wt.ksq[i] > 0.0 && !wt.alias[i]) z[i] = r[i] / (beta_mean * wt.ksq[i]);
        return z;
    };

    detail::Spectrum r = b;
    detail::Spectrum z = precond(r);
    detail::Spectrum d = z;
    double rz = detail::spec_dot(r, z);
    for (int it = 0; it < max_iter; ++it) {
        if (std::sqrt(detail::spec_dot(r, r)) <= tol * bnorm) return p;
        detail::Spectrum Ad = detail::variable_poisson_apply(g, d, beta);
        for (auto& v : Ad) v = -v;
        Ad[0] = 0.0;
        const double dAd = detail::spec_dot(d, Ad);
        if (dAd <= 0.0)
            throw NumericalError("cg", "variable_poisson_solve: operator lost positivity");
        const double alpha = rz / dAd;
        for (std::size_t i = 0; i < sz; ++i) {
            p[i] += alpha * d[i];
            r[i] -= alpha * Ad[i];
        }
        z = precond(r);
        const double rz_new = detail::spec_dot(r, z);
        const double gamma = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < sz; ++i) d[i] = z[i] + gamma * d[i];
    }
    if (std::sqrt(detail::spec_dot(r, r)) <= tol * bnorm) return p;
    throw NumericalError("cg", "variable_poisson_solve: no convergence in 500 iterations");
}

/// Fractional-step update of inhomogeneous Navier-Stokes:
///   (i)   semi-Lagrangian transport of rho,
///   (ii)  explicit momentum predictor for (1+rho) u,
///   (iii) variable-coefficient pressure projection div((1+rho)^-1 grad p)
///         = div u*/dt solved by preconditioned CG,
///   (iv)  velocity correction and Leray re-projection.
inline InsState ins_step(const InsState& state, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("ins_step: dt must be > 0");
    const TorusGrid& g = state.u.grid();
    const int d = g.dim();
    const std::size_t sz = g.size();
    for (double r : state.rho.values())
        if (r < -1e-12)
            throw std::invalid_argument("ins_step: total density must be >= 1");
    check_cfl(state.u, dt, "ins_step");

    InsState next;
    next.t = state.t + dt;
    next.rho = semi_lagrangian_transport(state.rho, state.u, dt);

    // (ii) momentum predictor m* = (1+rho) u + dt [ -div((1+rho) u x u) + lap u ].
    const auto& wt = detail::wave_table(g);
    TorusField flux_div(g, d);
    {
        // T_ab = (1+rho) u_a u_b, then (div T)_a = sum_b d_b T_ab.
        std::vector<TorusField> T;
        T.reserve(static_cast<std::size_t>(d) * d);
        for (int a = 0; a < d; ++a)
            for (int bx = 0; bx < d; ++bx) {
                TorusField t(g, 1);
                double* tp = t.mutable_component(0);
                const double* ua = state.u.component(a);
                const double* ub = state.u.component(bx);
                const double* rp = state.rho.component(0);
                for (std::size_t i = 0; i < sz; ++i)
                    tp[i] = (1.0 + rp[i]) * ua[i] * ub[i];
                auto spec = t.spectrum();
                dealias_spectrum(g, spec, 1);
                t.set_spectrum(std::move(spec));
                T.push_back(std::move(t));
            }
        detail::Spectrum ds(sz * d, 0.0);
        const std::complex<double> I(0.0, 1.0);
        for (int a = 0; a < d; ++a) {
            for (int bx = 0; bx < d; ++bx) {
                const auto& Ts = T[static_cast<std::size_t>(a) * d + bx].spectrum();
                for (std::size_t i = 0; i < sz; ++i)
                    ds[static_cast<std::size_t>(a) * sz + i] += I * wt.kd[i][bx] * Ts[i];
            }
        }
        flux_div.set_spectrum(std::move(ds));
    }
    TorusField lap_u(g, d);
    {
        detail::Spectrum ls = state.u.spectrum();
        for (int a = 0; a < d; ++a)
            for (std::size_t i = 0; i < sz; ++i)
                ls[static_cast<std::size_t>(a) * sz + i] *= -wt.ksq[i];
        lap_u.set_spectrum(std::move(ls));
    }

    TorusField ustar(g, d);
    {
        const double* rp_old = state.rho.component(0);
        const double* rp_new = next.rho.component(0);
        for (int a = 0; a < d; ++a) {
            double* us = ustar.mutable_component(a);
            const double* ua = state.u.component(a);
            const double* fd = flux_div.component(a);
            const double* lp = lap_u.component(a);
            for (std::size_t i = 0; i < sz; ++i) {
                const double mstar = (1.0 + rp_old[i]) * ua[i] + dt * (-fd[i] + lp[i]);
                us[i] = mstar / (1.0 + rp_new[i]);
            }
        }
        auto spec = ustar.spectrum();
        dealias_spectrum(g, spec, d);
        ustar.set_spectrum(std::move(spec));
    }

    // (iii) pressure solve with beta = 1/(1+rho_new).
    std::vector<double> beta(sz);
    {
        const double* rp = next.rho.component(0);
        for (std::size_t i = 0; i < sz; ++i) beta[i] = 1.0 / (1.0 + rp[i]);
    }
    detail::Spectrum rhs(sz, 0.0);
    {
        const auto& us = ustar.spectrum();
        const std::complex<double> I(0.0, 1.0);
        for (std::size_t i = 0; i < sz; ++i) {
            std::complex<double> acc = 0.0;
            for (int a = 0; a < d; ++a)
                acc += I * wt.kd[i][a] * us[static_cast<std::size_t>(a) * sz + i];
            rhs[i] = acc / dt;
        }
    }
    detail::Spectrum p = variable_poisson_solve(g, rhs, beta);

    // (iv) correct and re-project.
    TorusField grad_p(g, d);
    {
        detail::Spectrum gs(sz * d);
        const std::complex<double> I(0.0, 1.0);
        for (int a = 0; a < d; ++a)
            for (std::size_t i = 0; i < sz; ++i)
                gs[static_cast<std::size_t>(a) * sz + i] = I * wt.kd[i][a] * p[i];
        grad_p.set_spectrum(std::move(gs));
    }
    TorusField unew(g, d);
    for (int a = 0; a < d; ++a) {
        double* up = unew.mutable_component(a);
        const double* us = ustar.component(a);
        const double* gp = grad_p.component(a);
        for (std::size_t i = 0; i < sz; ++i) up[i] = us[i] - dt * beta[i] * gp[i];
    }
    next.u = leray_project(unew);
    next.grad_p = std::move(grad_p);
    return next;
}

/// G = (grad p - lap u) / (1 + rho) for the fine-regime relative entropy,
/// assembled from the INS solver's exported pressure gradient.
inline TorusField ins_entropy_g(const InsState& state) {
    const TorusGrid& g = state.u.grid();
    const int d = g.dim();
    const std::size_t sz = g.size();
    const auto& wt = detail::wave_table(g);
    detail::Spectrum ls = state.u.spectrum();
    for (int a = 0; a < d; ++a)
        for (std::size_t i = 0; i < sz; ++i)
            ls[static_cast<std::size_t>(a) * sz + i] *= -wt.ksq[i];
    TorusField lap_u(g, d);
    lap_u.set_spectrum(std::move(ls));
    TorusField G(g, d);
    const double* rp = state.rho.component(0);
    const bool has_gp = state.grad_p.values().size() == sz * static_cast<std::size_t>(d) &&
                        state.grad_p.grid() == g;
    for (int a = 0; a < d; ++a) {
        double* gp = G.mutable_component(a);
        const double* pg = has_gp ? state.grad_p.component(a) : nullptr;
        const double* lp = lap_u.component(a);
        for (std::size_t i = 0; i < sz; ++i) {
            const double num = (pg ? pg[i] : 0.0) - lp[i];
            gp[i] = num / (1.0 + rp[i]);
        }
    }
    return G;
}

/// G = grad p - lap u for the light-regime relative entropy, computed from
/// the plain Navier-Stokes reference velocity.
inline TorusField ns_entropy_g(const TorusField& u) {
    const TorusGrid& g = u.grid();
    const int d = g.dim();
    const std::size_t sz = g.size();
    const auto& wt = detail::wave_table(g);
    TorusField grad_p = ns_pressure_gradient(u, nullptr);
    detail::Spectrum ls = u.spectrum();
    for (int a = 0; a < d; ++a)
        for (std::size_t i = 0; i < sz; ++i)
            ls[static_cast<std::size_t>(a) * sz + i] *= -wt.ksq[i];
    TorusField lap_u(g, d);
    lap_u.set_spectrum(std::move(ls));
    TorusField G(g, d);
    auto& gv = G.mutable_values();
    for (std::size_t i = 0; i < gv.size(); ++i)
        gv[i] = grad_p.values()[i] - lap_u.values()[i];
    return G;
}

} // namespace vns
