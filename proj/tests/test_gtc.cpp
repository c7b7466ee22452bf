#include <cmath>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "mbwave/gtc.hpp"

using namespace mbwave;

TEST_CASE("optimal times of the wedge h1 = 0, h2 = 0.5 from tau = 1") {
    OptimalTimes o = optimal_times_lines(0.0, 0.5, 1.0);
    CHECK(o.T_onesided == doctest::Approx(2.0));
    CHECK(o.T_minus == doctest::Approx(0.5));
    CHECK(o.T_plus == doctest::Approx(1.5));
}

TEST_CASE("bisection matches the line closed forms") {
    struct Case {
        double h1, h2, tm;
    };
    for (Case c : {Case{0, 0.5, 1}, Case{-0.25, 0.25, 2}, Case{0, -0.5, -1}}) {
        OptimalTimes cf = optimal_times_lines(c.h1, c.h2, c.tm);
        const double t1 = c.tm + 1.2 * cf.T_onesided + 0.1 * std::abs(c.tm);
        GTC1D dom(Curve::linear(c.h1, 0), Curve::linear(c.h2, 0), c.tm, t1);
        OptimalTimes o = optimal_times_1d(dom, c.tm);
        CAPTURE(c.h1);
        CAPTURE(c.h2);
        CHECK(std::abs(o.T_onesided - cf.T_onesided) <= 1e-10);
        CHECK(std::abs(o.T_minus - cf.T_minus) <= 1e-10);
        CHECK(std::abs(o.T_plus - cf.T_plus) <= 1e-10);
        CHECK(std::abs(o.T2 - cf.T2) <= 1e-10);
    }
}

TEST_CASE("timelike margin is enforced") {
    try {
        GTC1D bad(Curve::linear(0, 0), Curve::linear(1.2, 1), 0, 1);
        FAIL("expected a throw");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("timelike margin violated") != std::string::npos);
    }
    CHECK_THROWS(GTC1D(Curve::linear(0, 1), Curve::linear(0, 0.5), 0, 1));  // crossed curves
}

TEST_CASE("spline through linear data is that line") {
    Curve c = Curve::sampled({0, 0.5, 1.3, 2}, {1, 1.25, 1.65, 2});
    for (double t : {0.1, 0.7, 1.9}) {
        CHECK(c(t) == doctest::Approx(1 + 0.5 * t));
        CHECK(c.d1(t) == doctest::Approx(0.5));
        CHECK(std::abs(c.d2(t)) <= 1e-12);
    }
}

TEST_CASE("outward boundary normal is unit and orthogonal to the curve") {
    GTC1D dom(Curve::linear(-0.3, 0), Curve::linear(0.6, 1), 0, 1);
    for (Side s : {Side::left, Side::right}) {
        BoundaryNormal N = boundary_normal_1d(dom, s, 0.4);
        const double lp = dom.curve(s).d1(0.4);
        CHECK(-N.nu_t * N.nu_t + N.nu[0] * N.nu[0] == doctest::Approx(1.0));
        CHECK(std::abs(-N.nu_t + N.nu[0] * lp) <= 1e-14);  // tangent (1, lambda')
        CHECK((s == Side::right ? N.nu[0] > 0 : N.nu[0] < 0));
    }
}

TEST_CASE("normal derivatives of f_P at worked points") {
    // Static side at x = 2, center at the origin: N f = (x - x0) nu / 2 = 1.
    GTC1D stat(Curve::linear(0, 0), Curve::linear(0, 2), -1, 1);
    CHECK(normal_derivatives(stat, Side::right, 0.0, SpacetimePoint(0, {0.0})).Nf == doctest::Approx(1.0));
    // lambda_2' = 0.6 with t_P = x_P = 1: N r = 1.25, N f = (1 * 1.25 - 1 * 0.75) / 2.
    GTC1D mov(Curve::linear(0, 0), Curve::linear(0.6, 1), 0, 2);
    NormalDerivatives d = normal_derivatives(mov, Side::right, 1.0, SpacetimePoint(0, {0.6}));
    CHECK(d.Nr == doctest::Approx(1.25).epsilon(1e-14));
    CHECK(d.Nf == doctest::Approx(0.25).epsilon(1e-14));
    // Finite difference of f_P along N.
    BoundaryNormal N = boundary_normal_1d(mov, Side::right, 1.0);
    auto f = [](double t, double x) { return 0.25 * (x * x - t * t); };
    const double h = 1e-5, tp = 1.0, xp = 1.0;
    const double fd = (f(tp + h * N.nu_t, xp + h * N.nu[0]) - f(tp - h * N.nu_t, xp - h * N.nu[0])) / (2 * h);
    CHECK(fd == doctest::Approx(d.Nf).epsilon(1e-9));
}

TEST_CASE("region scan invariants on the wedge") {
    GTC1D dom(Curve::linear(0, 0), Curve::linear(0.5, 0), 1, 4);
    SpacetimePoint P = onesided_center(dom, 1.0, 0.1);
    CHECK(P.t == doctest::Approx(1.6));
    CHECK(P.x[0] == doctest::Approx(-0.1));
    RegionScan scan = region_scan(dom, P, 0.05, 1.0, 3.4, 100, 2000);
    CHECK(scan.samples.size() == 200);
    CHECK(scan.Rplus > 0);
    std::size_t left_pd = 0, right_pd = 0;
    for (const auto& r : scan.samples) {
        if (r.in_gamma_Pdelta) (r.side == Side::left ? left_pd : right_pd)++;
        if (r.in_gamma_dagger) CHECK(r.in_gamma_plus);  // delta small
        CHECK(r.in_gamma_dagger == (r.fP > 0 && r.NfP > 0));
        if (r.fP > 0) {
            BoundaryNormal N = boundary_normal_1d(dom, r.side, r.tau);
            CHECK(std::abs(r.NrP - std::sqrt(1 + N.nu_t * N.nu_t) * r.costheta) <= 1e-12);
        }
    }
    CHECK(left_pd == 0);
    CHECK(right_pd > 0);
    CHECK(region_csv_header() == "tau,t,x,fP,NfP,NrP,S,costheta,in_gamma_plus,in_gamma_Pdelta,in_gamma_dagger");
}

TEST_CASE("static interval needs twice its width") {
    GTC1D dom(Curve::linear(0, 0), Curve::linear(0, 1), 0, 5);
    OptimalTimes o = optimal_times_1d(dom, 0.0);
    CHECK(o.T_minus == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(o.T_plus == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(o.T_onesided == doctest::Approx(2.0).epsilon(1e-10));
}
