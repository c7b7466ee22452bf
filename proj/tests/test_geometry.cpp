#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "mbwave/geometry.hpp"
#include "mbwave/jet.hpp"
#include "mbwave/rng.hpp"

using namespace mbwave;

TEST_CASE("null coordinates of a known point") {
    NullCoords c = null_coords(SpacetimePoint(3.0, {1.0, 2.0, 2.0}), SpacetimePoint(1.0, {1.0, 0.0, 0.0}));
    CHECK(c.t == doctest::Approx(2.0));
    CHECK(c.r == doctest::Approx(std::sqrt(8.0)));
    CHECK(c.u == doctest::Approx(0.5 * (2.0 - std::sqrt(8.0))));
    CHECK(c.v == doctest::Approx(0.5 * (2.0 + std::sqrt(8.0))));
    CHECK_THROWS_AS(null_coords(SpacetimePoint(0, {1.0}), SpacetimePoint(0, {1.0, 2.0})), std::invalid_argument);
}

TEST_CASE("f equals (r^2 - t^2) / 4 at random points") {
    Rng rng(5);
    for (int i = 0; i < 500; ++i) {
        const double t = rng.uniform(-3, 3), r = rng.uniform(0, 3);
        NullCoords c = null_coords_from_tr(t, r);
        CHECK(std::abs(c.f - 0.25 * (r * r - t * t)) <= 1e-14 * (1 + r * r + t * t));
        CHECK(c.u + c.v == doctest::Approx(t));
        CHECK(c.v - c.u == doctest::Approx(r));
    }
}

TEST_CASE("cone frame is Minkowski orthonormal") {
    // g = -4 du dv, so g(a d_u + b d_v, c d_u + d d_v) = -2 (a d + b c).
    auto g = [](double a, double b, double c, double d) { return -2.0 * (a * d + b * c); };
    Rng rng(9);
    for (int i = 0; i < 300; ++i) {
        const double r = rng.uniform(0.1, 2.0), t = rng.uniform(-0.9, 0.9) * r;
        NullCoords c = null_coords_from_tr(t, r);
        ConeFrame F = cone_frame(c.u, c.v);
        CHECK(g(F.T_u, F.T_v, F.T_u, F.T_v) == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(g(F.N_u, F.N_v, F.N_u, F.N_v) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(g(F.T_u, F.T_v, F.N_u, F.N_v)) <= 1e-12);
    }
    CHECK_THROWS_AS(cone_frame(1.0, 1.0), std::domain_error);
}

TEST_CASE("chronology") {
    SpacetimePoint o(0, {0.0});
    CHECK(chronological_relation(SpacetimePoint(2, {1.0}), o) == Chronology::future);
    CHECK(chronological_relation(SpacetimePoint(-2, {1.0}), o) == Chronology::past);
    CHECK(chronological_relation(SpacetimePoint(0.5, {1.0}), o) == Chronology::none);
    CHECK(in_cone_exterior(SpacetimePoint(0.5, {1.0}), o));
    CHECK_FALSE(in_cone_exterior(SpacetimePoint(1.0, {1.0}), o));  // on the cone, f = 0
}

TEST_CASE("jet derivatives against closed forms") {
    using J = Jet<2>;
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        const double x = rng.uniform(0.2, 2), y = rng.uniform(0.2, 2);
        J X = J::variable(x, 0), Y = J::variable(y, 1);
        J q = sin(X * Y) / Y + exp(X) * log(Y);
        CHECK(q.v == doctest::Approx(std::sin(x * y) / y + std::exp(x) * std::log(y)));
        CHECK(q.d(0) == doctest::Approx(std::cos(x * y) + std::exp(x) * std::log(y)));
        CHECK(q.d(1) == doctest::Approx(x * std::cos(x * y) / y - std::sin(x * y) / (y * y) + std::exp(x) / y));
        CHECK(q.dd(0, 0) == doctest::Approx(-y * std::sin(x * y) + std::exp(x) * std::log(y)));
        CHECK(q.dd(0, 1) == doctest::Approx(-x * std::sin(x * y) + std::exp(x) / y));
        CHECK(q.dd(0, 1) == doctest::Approx(q.dd(1, 0)));
    }
}
