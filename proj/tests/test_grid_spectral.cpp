#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "vns/spectral.hpp"

using namespace vns;
using vns::test::make_scalar;
using vns::test::make_vector;
using vns::test::random_bandlimited;

namespace {
const TorusGrid g32(2, 32);
}

TEST_CASE("grid invariants") {
    CHECK_THROWS(TorusGrid(1, 32));
    CHECK_THROWS(TorusGrid(4, 32));
    CHECK_THROWS(TorusGrid(2, 6));
    CHECK_THROWS(TorusGrid(2, 9));
    TorusGrid g(2, 16);
    CHECK(g.size() == 256);
    CHECK(g.wavenumber(0) == 0);
    CHECK(g.wavenumber(8) == 8);    // Nyquist maps to +n/2
    CHECK(g.wavenumber(9) == -7);
    CHECK(g.wavenumber(15) == -1);
    CHECK(g.cell_volume() == Catch::Approx(1.0 / 256.0));
}

TEST_CASE("leray annihilates pure gradients") {
    // v = grad(-cos x1) = (sin x1, 0)
    auto v = make_vector(g32, [](int c, double x, double, double) {
        return c == 0 ? std::sin(x) : 0.0;
    });
    auto p = leray_project(v);
    CHECK(p.max_abs() < 1e-13);
    CHECK(p.divergence_free());
}

TEST_CASE("leray fixes divergence-free fields") {
    auto v = make_vector(g32, [](int c, double x, double y, double) {
        return c == 0 ? std::sin(x) * std::cos(y) : -std::cos(x) * std::sin(y);
    });
    auto p = leray_project(v);
    double m = 0.0;
    for (std::size_t i = 0; i < v.values().size(); ++i)
        m = std::max(m, std::abs(p.values()[i] - v.values()[i]));
    CHECK(m < 1e-13);
}

TEST_CASE("leray mixed mode, hand-computed result") {
    // v = (sin x1 + cos x2, 0): the (1,0) mode is a gradient and dies, the
    // (0,1) mode is orthogonal to its wavevector and survives.
    auto v = make_vector(g32, [](int c, double x, double y, double) {
        return c == 0 ? std::sin(x) + std::cos(y) : 0.0;
    });
    auto p = leray_project(v);
    auto want = make_vector(g32, [](int c, double, double y, double) {
        return c == 0 ? std::cos(y) : 0.0;
    });
    CHECK(l2_distance(p, want) < 1e-13);
}

TEST_CASE("leray preserves the mean mode") {
    auto v = make_vector(g32, [](int c, double x, double, double) {
        return (c == 0 ? 0.7 : -0.2) + (c == 0 ? std::cos(x) : 0.0);
    });
    auto p = leray_project(v);
    CHECK(p.mean(0) == Catch::Approx(0.7).margin(1e-14));
    CHECK(p.mean(1) == Catch::Approx(-0.2).margin(1e-14));
}

TEST_CASE("leray rejects non-finite input") {
    TorusField v(g32, 2);
    v.mutable_values()[3] = std::nan("");
    CHECK_THROWS(leray_project(v));
}

TEST_CASE("heat semigroup on single modes") {
    auto v = make_scalar(g32, [](double x, double, double) { return std::cos(x); });
    auto w = heat_semigroup(v, 1.0);
    auto want = make_scalar(
        g32, [](double x, double, double) { return std::exp(-1.0) * std::cos(x); });
    CHECK(l2_distance(w, want) < 1e-14);

    auto c = make_scalar(g32, [](double, double, double) { return 3.25; });
    auto wc = heat_semigroup(c, 7.0);
    CHECK(l2_distance(wc, c) < 1e-14);

    auto v2 = make_scalar(g32, [](double x, double, double) { return std::cos(2 * x); });
    auto w2 = heat_semigroup(v2, 0.5);
    auto want2 = make_scalar(g32, [](double x, double, double) {
        return std::exp(-2.0) * std::cos(2 * x);
    });
    CHECK(l2_distance(w2, want2) < 1e-14);

    CHECK_THROWS(heat_semigroup(v, -0.1));
}

TEST_CASE("heat semigroup composition property") {
    auto v = random_bandlimited(g32, 1, 5, 42);
    auto a = heat_semigroup(v, 0.3 + 0.4);
    auto b = heat_semigroup(heat_semigroup(v, 0.3), 0.4);
    CHECK(l2_distance(a, b) < 1e-12 * (1.0 + a.l2_norm()));
}

TEST_CASE("sobolev norms") {
    auto v = make_scalar(g32, [](double x, double, double) { return std::cos(x); });
    const double l2 = v.l2_norm();
    CHECK(l2 == Catch::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(sobolev_norm(v, -1.0, true) == Catch::Approx(l2).epsilon(1e-12));

    auto c = make_scalar(g32, [](double, double, double) { return 2.0; });
    CHECK(sobolev_norm(c, 1.5, true) == 0.0);
    CHECK(sobolev_norm(c, -2.0, true) == 0.0);

    auto v2 = make_scalar(g32, [](double x, double, double) { return std::cos(2 * x); });
    CHECK(sobolev_norm(v2, 1.0, true) == Catch::Approx(2.0 * v2.l2_norm()).epsilon(1e-12));
}

TEST_CASE("sobolev s=0 equals L2") {
    auto v = random_bandlimited(g32, 1, 6, 7);
    CHECK(sobolev_norm(v, 0.0, false) == Catch::Approx(v.l2_norm()).epsilon(1e-10));
}

TEST_CASE("grad_linf") {
    auto c = make_vector(g32, [](int, double, double, double) { return 1.5; });
    CHECK(grad_linf(c) == Catch::Approx(0.0).margin(1e-13));

    auto v = make_vector(g32, [](int comp, double x, double, double) {
        return comp == 0 ? std::sin(x) : 0.0;
    });
    CHECK(grad_linf(v) == Catch::Approx(1.0).epsilon(1e-12));

    auto v3 = make_vector(g32, [](int comp, double x, double, double) {
        return comp == 0 ? -2.5 * std::sin(x) : 0.0;
    });
    CHECK(grad_linf(v3) == Catch::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("projector idempotence on random band-limited fields") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto v = random_bandlimited(g32, 2, 9, seed);
        auto p = leray_project(v);
        auto pp = leray_project(p);
        CHECK(l2_distance(pp, p) <= 1e-12 * v.l2_norm());
        CHECK(divergence_max(p) <= 1e-10 * (1.0 + p.max_abs()));
    }
}

TEST_CASE("transform round trip") {
    auto v = random_bandlimited(g32, 2, 10, 11);
    auto spec = v.spectrum();
    TorusField w(g32, 2);
    w.set_spectrum(spec);
    CHECK(l2_distance(w, v) <= 1e-12 * v.l2_norm());
}

TEST_CASE("parseval") {
    auto v = random_bandlimited(g32, 1, 10, 19);
    CHECK(vns::test::rel_err(l2_norm_spectral(v), v.l2_norm()) < 1e-10);
}
