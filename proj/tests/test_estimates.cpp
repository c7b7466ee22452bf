#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "mbwave/estimates.hpp"
#include "mbwave/gtc.hpp"

using namespace mbwave;

TEST_CASE("multiplier identity residual decays at order 2") {
    SUBCASE("static") {
        GTC1D dom(Curve::linear(0, 0), Curve::linear(0, 1), 0, 2);
        auto res = multiplier_refinement(dom, 0, 2, SpacetimePoint(1.0, {0.5}),
                                         [](double x) { return std::sin(M_PI * x); }, nullptr, {50, 150}, 3);
        REQUIRE(res.size() == 3);
        CAPTURE(res[0]);
        CAPTURE(res[1]);
        CAPTURE(res[2]);
        CHECK(std::abs(res[0] / res[1]) == doctest::Approx(4.0).epsilon(0.15));
        CHECK(std::abs(res[1] / res[2]) == doctest::Approx(4.0).epsilon(0.15));
    }
    SUBCASE("moving") {
        // phi1 keeps the data at rest in the moving frame; phi1 = 0 breaks corner compatibility
        // and drops the rate to 1
        GTC1D dom(Curve::linear(0, 0), Curve::linear(0.3, 1), 0, 2);
        auto res = multiplier_refinement(dom, 0, 2, SpacetimePoint(1.0, {0.6}),
                                         [](double x) { return std::sin(M_PI * x); },
                                         [](double x) { return -0.3 * M_PI * x * std::cos(M_PI * x); }, {50, 150}, 3);
        CAPTURE(res[0]);
        CAPTURE(res[1]);
        CAPTURE(res[2]);
        CHECK(std::abs(res[0] / res[1]) == doctest::Approx(4.0).epsilon(0.15));
        CHECK(std::abs(res[1] / res[2]) == doctest::Approx(4.0).epsilon(0.15));
    }
}

TEST_CASE("test functions vanish on both curves") {
    GTC1D dom(Curve::linear(-0.2, 0), Curve::sampled({0, 1, 2}, {1, 1.3, 1.4}), 0, 2);
    for (const auto& q : carleman_catalog()) {
        TXFunction phi = vanishing_on(dom, q.q);
        for (double t : {0.1, 0.9, 1.7})
            for (Side s : {Side::left, Side::right}) {
                const double x = dom.curve(s)(t);
                CHECK(std::abs(phi(J2::variable(t, 0), J2::variable(x, 1)).v) <= 1e-13);
            }
    }
}

TEST_CASE("Carleman quadrature terms") {
    GTC1D dom(Curve::linear(0, 0), Curve::linear(0, 1), 0, 2);
    SpacetimePoint P(0.5, {-0.6});
    const double R = carleman_radius(dom, P, 0, 2);
    CHECK(R > 0);
    for (double a : {1.0, 4.0}) {
        CarlemanParams cp = CarlemanParams::standard(R, 1, a);
        CarlemanQuadOptions o;
        o.nx = o.nt = 60;
        for (const auto& q : carleman_catalog()) {
            CarlemanTerms t = carleman_quadrature(vanishing_on(dom, q.q), dom, P, cp, 0, 2, o);
            CAPTURE(q.name);
            CHECK(t.cells > 0);
            CHECK(t.box >= 0);
            CHECK(t.grad > 0);
            CHECK(t.zero > 0);
            CHECK(std::isfinite(t.C_emp));
            CHECK(t.C_emp == doctest::Approx((t.box + t.boundary) / (t.grad + t.zero)));
            CHECK(carleman_csv_row(q.name, a, t).rfind(q.name + ",", 0) == 0);
        }
    }
    CHECK(carleman_csv_header() == "label,a,box,boundary,grad,zero,log_shift,C_emp,cells");
    CHECK(quadrature_stable(1.0, 1.005));
    CHECK_FALSE(quadrature_stable(1.0, 1.02));
}

TEST_CASE("observability ratio of one eigenmode on the static interval") {
    // phi = sin(pi x) cos(pi t) over [0, 2]: each side observes int (pi cos(pi t))^2 dt = pi^2, and
    // E(0) = E(2) = pi^2 / 2 + 1 / 2 with the phi^2 term.
    GTC1D dom(Curve::linear(0, 0), Curve::linear(0, 1), 0, 2);
    Scheme s(dom, {}, 0, 2, {200, 600});
    Field f = solve_forward(s, sample_cauchy(s, [](double x) { return std::sin(M_PI * x); }, nullptr));
    const double one = M_PI * M_PI / (M_PI * M_PI + 1);
    CHECK(observability_ratio(f, {}) == doctest::Approx(one).epsilon(1e-3));
    CHECK(observability_ratio(f, {true, true}) == doctest::Approx(2 * one).epsilon(1e-3));
}

TEST_CASE("ratios are scale invariant and monotone in the observed set") {
    GTC1D dom(Curve::linear(0, 0), Curve::linear(0.5, 0), 1, 4);
    Scheme s(dom, {}, 1, 3.4, {60, 180});
    auto ens = eigenmode_ensemble(s, 6, 4, 9);
    for (std::size_t i = 0; i < ens.size(); ++i) {
        Field f = solve_forward(s, ens[i]);
        CauchyData big = ens[i];
        for (double& x : big.phi0) x *= 37.5;
        for (double& x : big.phi1) x *= 37.5;
        const double r = observability_ratio(f, {});
        CHECK(observability_ratio(solve_forward(s, big), {}) == doctest::Approx(r).epsilon(1e-12));
        CHECK(observability_ratio(f, {true, true}) >= r);
    }
    CHECK(observability_summary(s, ens, {true, true}).min >= observability_summary(s, ens, {}).min);
}

TEST_CASE("ensemble is reproducible from the seed") {
    GTC1D dom(Curve::linear(0, 0), Curve::linear(0.5, 0), 1, 3);
    Scheme s(dom, {}, 1, 2, {50, 150});
    auto a = eigenmode_ensemble(s, 8, 4, 1), b = eigenmode_ensemble(s, 8, 4, 1), c = eigenmode_ensemble(s, 8, 4, 2);
    REQUIRE(a.size() == 8);
    CHECK(a[3].phi0 == b[3].phi0);
    CHECK(a[3].phi1 == b[3].phi1);
    CHECK(a[3].phi0 != c[3].phi0);
    RatioSummary r = observability_summary(s, a, {});
    CHECK(r.ratios.size() == 8);
    CHECK(r.min <= r.median);
    CHECK(r.min > 0);
}

TEST_CASE("default beam sits inside the first slice and travels left") {
    GTC1D dom(Curve::linear(0, 0), Curve::linear(0.5, 0), 1, 4);
    BeamSpec b = default_beam(dom, 1.0, 2.6);
    const double sigma0 = dom.width(1.0) / 20;
    CHECK(b.direction == -1);
    CHECK(b.sigma == doctest::Approx(sigma0));
    CHECK(b.xc > dom.lambda1(1.0));
    CHECK(b.xc <= dom.lambda2(1.0) - kBeamStartGap * sigma0 + 1e-12);
    BeamSpec half = default_beam(dom, 1.0, 2.6, 0.5);
    CHECK(half.sigma == doctest::Approx(0.5 * sigma0));
    CHECK(scan_csv_header().rfind("window,min_ratio,median_ratio,optimal_T_marker", 0) == 0);
}

TEST_CASE("ratios separate across the optimal time") {
    GTC1D dom(Curve::linear(0, 0), Curve::linear(0.5, 0), 1, 4);
    ScanOptions o;
    o.windows = {1.6, 2.4};
    o.grid = {100, 300};
    o.beam_grid = {200, 600};
    o.members = 8;
    o.modes = 4;
    o.optimal_T = 2.0;
    auto rows = timespan_scan(dom, {}, 1.0, o);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].median_ratio > rows[0].median_ratio);
    CHECK(rows[1].min_ratio > rows[0].beam_ratio);
    for (const auto& r : rows) CHECK(r.optimal_T == 2.0);
}
