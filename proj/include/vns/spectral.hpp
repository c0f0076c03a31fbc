#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "vns/field.hpp"
#include "vns/grid.hpp"

namespace vns {

namespace detail {

/// Per-grid wavenumber tables, built once per (dim, n).
struct WaveTable {
    std::vector<std::array<double, 3>> k;      // signed wavenumbers (Nyquist = +n/2)
    std::vector<std::array<double, 3>> kd;     // derivative wavenumbers (Nyquist = 0)
    std::vector<double> ksq;                   // |k|^2 from signed wavenumbers
    std::vector<bool> alias;                   // true if any |k_a| > n/3

    explicit WaveTable(const TorusGrid& g) {
        const std::size_t sz = g.size();
        k.resize(sz);
        kd.resize(sz);
        ksq.resize(sz);
        alias.resize(sz);
        const double kcut = g.n() / 3.0;
        for (std::size_t idx = 0; idx < sz; ++idx) {
            auto c = g.coords(idx);
            double s = 0.0;
            bool al = false;
            for (int a = 0; a < 3; ++a) {
                if (a < g.dim()) {
                    const double ka = g.wavenumber(c[a]);
                    k[idx][a] = ka;
                    kd[idx][a] = g.deriv_wavenumber(c[a]);
                    s += ka * ka;
                    if (std::abs(ka) > kcut) al = true;
                } else {
                    k[idx][a] = 0.0;
                    kd[idx][a] = 0.0;
                }
            }
            ksq[idx] = s;
            alias[idx] = al;
        }
    }
};

inline const WaveTable& wave_table(const TorusGrid& g) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, WaveTable> tables;
    std::scoped_lock lock(mutex);
    auto key = std::make_pair(g.dim(), g.n());
    auto it = tables.find(key);
    if (it == tables.end()) it = tables.emplace(key, WaveTable(g)).first;
    return it->second;
}

} // namespace detail

/// 2/3-rule dealiasing: zero every mode with any |k_a| > n/3 (in place, on a
/// spectral buffer holding `components` planes).
inline void dealias_spectrum(const TorusGrid& g, std::vector<std::complex<double>>& spec,
                             int components) {
    const auto& wt = detail::wave_table(g);
    const std::size_t sz = g.size();
    for (int c = 0; c < components; ++c) {
        std::complex<double>* s = spec.data() + static_cast<std::size_t>(c) * sz;
        for (std::size_t i = 0; i < sz; ++i)
            if (wt.alias[i]) s[i] = 0.0;
    }
}

inline TorusField dealias(const TorusField& v) {
    auto spec = v.spectrum();
    dealias_spectrum(v.grid(), spec, v.components());
    TorusField out(v.grid(), v.components());
    out.set_spectrum(std::move(spec));
    return out;
}

/// Leray projection onto divergence-free fields: mode-by-mode
/// vhat -= k (k . vhat) / |k|^2; the k = 0 (mean) mode is preserved.
inline TorusField leray_project(const TorusField& v) {
    if (v.components() != v.grid().dim())
        throw std::invalid_argument("leray_project: vector field required");
    v.require_finite("leray_project");
    const TorusGrid& g = v.grid();
    const auto& wt = detail::wave_table(g);
    const std::size_t sz = g.size();
    const int d = g.dim();
    auto spec = v.spectrum();
    for (std::size_t i = 0; i < sz; ++i) {
        if (wt.ksq[i] == 0.0) continue;
        std::complex<double> kdotv = 0.0;
        for (int c = 0; c < d; ++c)
            kdotv += wt.k[i][c] * spec[static_cast<std::size_t>(c) * sz + i];
        const std::complex<double> scale = kdotv / wt.ksq[i];
        for (int c = 0; c < d; ++c)
            spec[static_cast<std::size_t>(c) * sz + i] -= wt.k[i][c] * scale;
    }
    TorusField out(g, d);
    out.set_spectrum(std::move(spec));
    out.set_divergence_free(true);
    return out;
}

/// Heat semigroup e^{t Laplacian}: multiply each mode by exp(-|k|^2 t).
inline TorusField heat_semigroup(const TorusField& v, double t) {
    if (t < 0.0) throw std::invalid_argument("heat_semigroup: t must be >= 0");
    const TorusGrid& g = v.grid();
    const auto& wt = detail::wave_table(g);
    const std::size_t sz = g.size();
    auto spec = v.spectrum();
    for (int c = 0; c < v.components(); ++c) {
        std::complex<double>* s = spec.data() + static_cast<std::size_t>(c) * sz;
        for (std::size_t i = 0; i < sz; ++i) s[i] *= std::exp(-wt.ksq[i] * t);
    }
    TorusField out(g, v.components());
    bool divfree = v.divergence_free();
    out.set_spectrum(std::move(spec));
    out.set_divergence_free(divfree);
    return out;
}

/// Sobolev norm of order s. Homogeneous: (sum_{k != 0} |k|^{2s} |c_k|^2)^{1/2};
/// inhomogeneous uses the weight (1 + |k|^2)^{s/2} including k = 0.
inline double sobolev_norm(const TorusField& v, double s, bool homogeneous) {
    const TorusGrid& g = v.grid();
    const auto& wt = detail::wave_table(g);
    const std::size_t sz = g.size();
    double acc = 0.0;
    const auto& spec = v.spectrum();
    for (int c = 0; c < v.components(); ++c) {
        const std::complex<double>* sp = spec.data() + static_cast<std::size_t>(c) * sz;
        for (std::size_t i = 0; i < sz; ++i) {
            const double ksq = wt.ksq[i];
            if (homogeneous && ksq == 0.0) continue;
            const double w = homogeneous ? std::pow(ksq, s) : std::pow(1.0 + ksq, s);
            acc += w * std::norm(sp[i]);
        }
    }
    return std::sqrt(acc);
}

/// Spectral partial derivative d(component c)/d(axis a) as a scalar field.
inline TorusField spectral_derivative(const TorusField& v, int c, int axis) {
    const TorusGrid& g = v.grid();
    const auto& wt = detail::wave_table(g);
    const std::size_t sz = g.size();
    const auto& spec = v.spectrum();
    std::vector<std::complex<double>> out(sz);
    const std::complex<double>* sp = spec.data() + static_cast<std::size_t>(c) * sz;
    const std::complex<double> I(0.0, 1.0);
    for (std::size_t i = 0; i < sz; ++i) out[i] = I * wt.kd[i][axis] * sp[i];
    TorusField f(g, 1);
    f.set_spectrum(std::move(out));
    return f;
}

/// Max over nodes of the Frobenius norm of the (spectrally computed) gradient.
inline double grad_linf(const TorusField& v) {
    const TorusGrid& g = v.grid();
    const std::size_t sz = g.size();
    std::vector<double> acc(sz, 0.0);
    for (int c = 0; c < v.components(); ++c) {
        for (int a = 0; a < g.dim(); ++a) {
            TorusField dca = spectral_derivative(v, c, a);
            const double* p = dca.component(0);
            for (std::size_t i = 0; i < sz; ++i) acc[i] += p[i] * p[i];
        }
    }
    double m = 0.0;
    for (std::size_t i = 0; i < sz; ++i) m = std::max(m, acc[i]);
    return std::sqrt(m);
}

/// Max modulus of the spectral divergence (diagnostic for the div-free flag).
inline double divergence_max(const TorusField& v) {
    const TorusGrid& g = v.grid();
    const auto& wt = detail::wave_table(g);
    const std::size_t sz = g.size();
    const auto& spec = v.spectrum();
    double m = 0.0;
    for (std::size_t i = 0; i < sz; ++i) {
        std::complex<double> div = 0.0;
        for (int c = 0; c < g.dim(); ++c)
            div += wt.kd[i][c] * spec[static_cast<std::size_t>(c) * sz + i];
        m = std::max(m, std::abs(div));
    }
    return m;
}

/// L2 norm computed from the spectrum (Parseval route).
inline double l2_norm_spectral(const TorusField& v) {
    double acc = 0.0;
    for (const auto& z : v.spectrum()) acc += std::norm(z);
    return std::sqrt(acc);
}

/// L2 distance between two same-shape fields.
inline double l2_distance(const TorusField& a, const TorusField& b) {
    if (a.grid() != b.grid() || a.components() != b.components())
        throw std::invalid_argument("l2_distance: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        const double d = a.values()[i] - b.values()[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(a.grid().size()));
}

/// Homogeneous H^s distance between scalar fields (used for the Hdot^{-1}
/// density metric in the fine regime).
inline double sobolev_distance(const TorusField& a, const TorusField& b, double s) {
    if (a.grid() != b.grid() || a.components() != b.components())
        throw std::invalid_argument("sobolev_distance: shape mismatch");
    TorusField diff(a.grid(), a.components());
    auto& dv = diff.mutable_values();
    for (std::size_t i = 0; i < dv.size(); ++i)
        dv[i] = a.values()[i] - b.values()[i];
    return sobolev_norm(diff, s, true);
}

} // namespace vns
