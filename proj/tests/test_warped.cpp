#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "mbwave/rng.hpp"
#include "mbwave/warped.hpp"

using namespace mbwave;

TEST_CASE("warped radius reduces to r without warping") {
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        const double r = rng.uniform(0.2, 1.0), t = rng.uniform(-0.8, 0.8) * r;
        const double u = 0.5 * (t - r), v = 0.5 * (t + r);
        WarpedScalars w0 = warped_scalars(u, v, WarpParams{0.0, 1});
        CHECK(w0.rho == doctest::Approx(r));
        CHECK(w0.f == doctest::Approx(-u * v));
        WarpedScalars w = warped_scalars(u, v, WarpParams{0.05, 2});
        CHECK(w.rho == doctest::Approx(r + 2 * 0.05 * (-u * v)));
    }
}

TEST_CASE("log weight is -2F with F = -a (log f + 2 b sqrt f)") {
    for (double f : {0.01, 0.3, 2.0})
        for (double a : {1.0, 4.0}) {
            const double b = 0.1, F = -a * (std::log(f) + 2 * b * std::sqrt(f));
            CHECK(log_warped_weight(f, a, b) == doctest::Approx(-2 * F));
        }
    CHECK_THROWS_AS(log_warped_weight(0.0, 1, 0.1), std::domain_error);
}

TEST_CASE("conformal map round trip") {
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        const double r = rng.uniform(0.3, 1.0), t = rng.uniform(-0.5, 0.5) * r;
        const double u = 0.5 * (t - r), v = 0.5 * (t + r);
        for (double eps : {0.0, 0.02, 0.05}) {
            ConformalPoint c = conformal_map(u, v, eps);
            ConformalPoint back = conformal_map_inverse(c.ubar, c.vbar, eps);
            CHECK(back.ubar == doctest::Approx(u).epsilon(1e-12));
            CHECK(back.vbar == doctest::Approx(v).epsilon(1e-12));
            if (eps == 0.0) {
                CHECK(c.ubar == doctest::Approx(u));
                CHECK(c.vbar == doctest::Approx(v));
            }
        }
    }
}

TEST_CASE("parameter validation") {
    CarlemanParams cp = CarlemanParams::standard(2.0, 3, 9.0);
    CHECK(cp.b == doctest::Approx(1.0 / 20.0));
    CHECK(cp.eps == doctest::Approx(cp.b / 300.0));
    CarlemanParams bad = cp;
    bad.a = 8.0;  // below n^2
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cp;
    bad.eps = 2 * cp.eps;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("richardson rule") {
    CHECK(richardson_ok(4e-6, 1e-6));
    CHECK_FALSE(richardson_ok(2e-6, 1e-6));
    CHECK(richardson_ok(1e-13, 1e-13));  // already at round-off
}

TEST_CASE("reduced identity suite passes") {
    SuiteOptions o;
    o.points = 60;
    o.seed = 3;
    auto rs = run_identity_suite(o);
    CHECK(rs.size() >= 10);
    for (const auto& r : rs) {
        CAPTURE(r.name);
        CAPTURE(r.n);
        CAPTURE(r.eps);
        CAPTURE(r.max_residual);
        CHECK(r.pass);
        CHECK(r.points > 0);
    }
}

TEST_CASE("reduced Carleman suite passes") {
    CarlemanSuiteOptions o;
    o.points = 20;
    o.random_trig = 5;
    auto rs = run_carleman_suite(o);
    CHECK(!rs.empty());
    for (const auto& r : rs) {
        CAPTURE(r.name);
        CAPTURE(r.n);
        CAPTURE(r.max_residual);
        CAPTURE(r.min_margin);
        CHECK(r.pass);
    }
}

TEST_CASE("sample points lie in the stated exterior band") {
    auto pts = sample_exterior(500, 1.0, 12);
    for (auto p : pts) {
        const double t = p.u + p.v, r = p.v - p.u;
        CHECK(r >= 0.5 - 1e-12);
        CHECK(r <= 0.95 + 1e-12);
        CHECK(std::abs(t) <= 0.4 * r + 1e-12);
        CHECK(-p.u * p.v >= 0.0525 - 1e-12);
    }
}
