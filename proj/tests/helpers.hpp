#pragma once

#include <cmath>
#include <functional>

#include "vns/field.hpp"
#include "vns/grid.hpp"
#include "vns/rng.hpp"
#include "vns/spectral.hpp"

namespace vns::test {

/// Fill a scalar field from f(x).
inline TorusField make_scalar(const TorusGrid& g,
                              const std::function<double(double, double, double)>& f) {
    TorusField out(g, 1);
    auto& v = out.mutable_values();
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto c = g.coords(i);
        v[i] = f(g.node(c[0]), g.node(c[1]), g.dim() > 2 ? g.node(c[2]) : 0.0);
    }
    return out;
}

/// Fill a vector field from per-component lambdas.
inline TorusField make_vector(
    const TorusGrid& g,
    const std::function<double(int, double, double, double)>& f) {
    TorusField out(g, g.dim());
    for (int c = 0; c < g.dim(); ++c) {
        double* p = out.mutable_component(c);
        for (std::size_t i = 0; i < g.size(); ++i) {
            auto cc = g.coords(i);
            p[i] = f(c, g.node(cc[0]), g.node(cc[1]), g.dim() > 2 ? g.node(cc[2]) : 0.0);
        }
    }
    return out;
}

/// Random band-limited field: seeded coefficients on modes with |k_a| <= kmax.
inline TorusField random_bandlimited(const TorusGrid& g, int components, int kmax,
                                     std::uint64_t seed) {
    CounterRng rng(seed);
    std::vector<std::complex<double>> spec(g.size() * components, 0.0);
    const std::size_t sz = g.size();
    for (int c = 0; c < components; ++c) {
        std::uint64_t ctr = 0;
        for (std::size_t i = 0; i < sz; ++i) {
            auto cc = g.coords(i);
            bool keep = true;
            for (int a = 0; a < g.dim(); ++a)
                if (std::abs(g.wavenumber(cc[a])) > kmax) keep = false;
            if (!keep) continue;
            const double re = rng.normal(100 + c, ctr++);
            const double im = rng.normal(200 + c, ctr++);
            spec[static_cast<std::size_t>(c) * sz + i] = {re, im};
        }
    }
    TorusField out(g, components);
    out.set_spectrum(std::move(spec));
    // Re-symmetrize by dropping the imaginary part: rebuild from real samples.
    TorusField real_out(g, components);
    real_out.mutable_values() = out.values();
    return real_out;
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

} // namespace vns::test
