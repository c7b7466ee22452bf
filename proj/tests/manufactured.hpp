#pragma once

#include <algorithm>
#include <cmath>

#include "mbwave/jet.hpp"
#include "mbwave/solver.hpp"

namespace mbwave::testing {

// phi_e = e^t sin(pi y) on the domain 0 < x < 1 + 0.3 t, with drift and potential.
struct Manufactured {
    Coefficients co;
    Manufactured() {
        co.Xt = [](double, double) { return 0.3; };
        co.Xx = [](double t, double x) { return 0.2 * std::sin(x + t); };
        co.V = [](double, double) { return 0.5; };
    }
    static Jet<2> phi(const Jet<2>& t, const Jet<2>& x) { return exp(t) * sin(M_PI * x / (1 + 0.3 * t)); }
    double forcing(double t, double x) const {
        Jet<2> p = phi(Jet<2>::variable(t, 0), Jet<2>::variable(x, 1));
        return -p.dd(0, 0) + p.dd(1, 1) + co.xt(t, x) * p.d(0) + co.xx(t, x) * p.d(1) + co.v(t, x) * p.v;
    }
    double error(int nx) const {
        GTC1D dom(Curve::linear(0, 0), Curve::linear(0.3, 1), 0, 1);
        Scheme s(dom, co, 0, 1, {nx, 3 * nx});
        auto d = sample_cauchy(s, [](double x) { return phi(Jet<2>(0.0), Jet<2>(x)).v; },
                               [](double x) { return phi(Jet<2>::variable(0.0, 0), Jet<2>(x)).d(0); });
        Field f = solve_forward(s, d, {}, [this](double t, double x) { return forcing(t, x); });
        double err = 0;
        for (int n = 0; n <= f.nt; ++n)
            for (int j = 0; j <= f.nx; ++j)
                err = std::max(err, std::abs(f.at(n, j) - phi(Jet<2>(f.t(n)), Jet<2>(f.x(n, j))).v));
        return err;
    }
};

}  // namespace mbwave::testing
