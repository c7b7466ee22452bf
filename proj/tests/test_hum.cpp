#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "mbwave/hum.hpp"

using namespace mbwave;

namespace {

HUMProblem static_problem(int nx, double t_from = 0.0) {
    HUMProblem p{GTC1D(Curve::linear(0, 0), Curve::linear(0, 1), 0, 2.2), {}, 0, 2.2};
    p.gamma.right = {{t_from, 2.2}};
    p.phi0_minus = [](double x) { return std::sin(M_PI * x); };
    p.grid = {nx, 3 * nx};
    return p;
}

double bdot(const BoundaryData& a, const BoundaryData& b) {
    double s = 0.0;
    for (std::size_t n = 0; n < a.left.size(); ++n) s += a.left[n] * b.left[n] + a.right[n] * b.right[n];
    return s;
}

double bnorm(const BoundaryData& a) { return std::sqrt(bdot(a, a)); }

}  // namespace

TEST_CASE("zero data gives zero control") {
    HUMProblem p = static_problem(40);
    p.phi0_minus = {};
    HUMSolution sol = solve_null_control(p);
    CHECK(bnorm(sol.control) == 0.0);
    CHECK(sol.J == 0.0);
}

TEST_CASE("B and B^T are transposes") {
    HUMOperator op(static_problem(40));
    const int nt = op.scheme().nt(), nx = op.scheme().nx();
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    BoundaryData g{std::vector<double>(nt + 1), std::vector<double>(nt + 1)};
    for (int n = 0; n <= nt; ++n) g.left[n] = nd(rng), g.right[n] = nd(rng);
    State z{std::vector<double>(nx + 1, 0.0), std::vector<double>(nx + 1, 0.0)};
    for (int j = 1; j < nx; ++j) z.w0[j] = nd(rng), z.w1[j] = nd(rng);
    const double lhs = dot(op.B(g), z), rhs = bdot(g, op.Bt(z));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(std::abs(lhs), 1.0));
}

TEST_CASE("Gram operator is symmetric") {
    HUMOperator op(static_problem(40));
    CHECK(gram_symmetry(op, 1e-6, 4, 5) <= 1e-10);
}

TEST_CASE("static null control") {
    HUMSolution sol = solve_null_control(static_problem(60));
    CHECK(sol.converged);
    CHECK(sol.final_energy_rel <= 1e-2);
    // CG decreases J monotonically
    for (std::size_t k = 1; k < sol.J_history.size(); ++k)
        CHECK(sol.J_history[k] <= sol.J_history[k - 1] + 1e-12 * std::abs(sol.J_history[0]));
    CHECK(sol.J < 0.0);
}

TEST_CASE("control vanishes outside the observed region") {
    HUMProblem p = static_problem(40, 0.15);
    HUMOperator op(p);
    HUMSolution sol = solve_null_control(op);
    CHECK(sol.final_energy_rel <= 5e-2);
    for (int n = 0; n <= op.scheme().nt(); ++n) {
        CHECK(sol.control.left[n] == 0.0);
        if (op.scheme().t(n) < 0.15) CHECK(sol.control.right[n] == 0.0);
    }
}

TEST_CASE("null control is linear in the data") {
    HUMProblem p = static_problem(40);
    HUMOperator op(p);
    auto solve = [&](const Profile& phi0) {
        HUMProblem q = p;
        q.phi0_minus = phi0;
        q.cg_tol = 1e-10;
        return solve_null_control(HUMOperator(q)).control;
    };
    BoundaryData g1 = solve([](double x) { return std::sin(M_PI * x); });
    BoundaryData g2 = solve([](double x) { return x * x * (1 - x); });
    BoundaryData g12 = solve([](double x) { return std::sin(M_PI * x) + x * x * (1 - x); });
    BoundaryData diff = g12;
    for (std::size_t n = 0; n < diff.right.size(); ++n) diff.right[n] -= g1.right[n] + g2.right[n];
    CHECK(bnorm(diff) <= 1e-4 * bnorm(g12));
}

TEST_CASE("target on the free trajectory needs almost no control") {
    // sin(pi x) cos(pi t) returns to itself at t = 2
    HUMProblem p{GTC1D(Curve::linear(0, 0), Curve::linear(0, 1), 0, 2.2), {}, 0, 2.0};
    p.gamma.right = {{0.0, 2.0}};
    p.grid = {60, 180};
    p.phi0_minus = [](double x) { return std::sin(M_PI * x); };
    HUMSolution null = solve_null_control(p);
    p.phi0_plus = p.phi0_minus;
    HUMSolution exact = solve_exact_control(p);
    CHECK(exact.control_norm <= 2e-2 * null.control_norm);
}

TEST_CASE("HUM control is minimal among admissible controls") {
    // below about nx = 100 the Tikhonov term leaves a cross term comparable to |k|^2
    HUMOperator op(static_problem(100));
    HUMSolution sol = solve_null_control(op);
    MinimalityReport rep = minimality_check(op, sol, 3, 7);
    CHECK(rep.pass);
    CHECK(rep.worst_relative_deficit <= 1e-6);
    for (double r : rep.scaled_gap_ratio) CHECK(r == doctest::Approx(4.0).epsilon(0.1));

    MinimalityReport none = minimality_check(op, sol, 0, 7);
    CHECK_FALSE(none.pass);
}
