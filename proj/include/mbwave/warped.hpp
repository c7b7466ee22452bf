#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mbwave/geometry.hpp"
#include "mbwave/jet.hpp"

namespace mbwave {

using J2 = Jet<2>;  // variables (u, v)

struct WarpParams {
    double eps = 0.0;
    int n = 1;
};

// Concrete reading of "eps << b << 1/R": eps <= b / (kEpsRatio n), b <= 1 / (kBRatio R).
inline constexpr double kEpsRatio = 100.0;
inline constexpr double kBRatio = 10.0;

struct CarlemanParams {
    double a = 1.0, b = 0.0, eps = 0.0, R = 1.0;
    int n = 1;

    void validate() const;
    // Largest admissible b and eps for the given R, n, a.
    static CarlemanParams standard(double R, int n, double a);
    WarpParams warp() const { return {eps, n}; }
};

struct WarpedScalars {
    double r = 0, f = 0, rho = 0, h = 0, w = 0, xi = 0;
    double F = 0, dF = 0, A = 0, dfA = 0;  // dfA = (f A)'
    double box_f = 0, box_w = 0, box_f_over_rho = 0;
};

WarpedScalars warped_scalars(double u, double v, const WarpParams& wp);
WarpedScalars warped_scalars(double u, double v, const CarlemanParams& cp);

// Jet versions of the scalar fields, used where exact derivatives are required.
J2 jet_f(const J2& u, const J2& v);
J2 jet_rho(const J2& u, const J2& v, double eps);
J2 jet_w(const J2& u, const J2& v, const WarpParams& wp);
J2 jet_F(const J2& f, double a, double b);

struct ConformalPoint {
    double ubar = 0, vbar = 0, xi = 1;
};

ConformalPoint conformal_map(double u, double v, double eps);
ConformalPoint conformal_map_inverse(double ubar, double vbar, double eps);

double warped_weight(double f, double a, double b);
double log_warped_weight(double f, double a, double b);
double carleman_weight(const SpacetimePoint& p, const SpacetimePoint& center, const CarlemanParams& cp);
double log_carleman_weight(double u, double v, const CarlemanParams& cp);

// Multipliers of gbar_ab (first two) and delta^a_b (last two).
struct Christoffels {
    double u_ab = 0, v_ab = 0, a_ub = 0, a_vb = 0;
};
Christoffels warped_christoffels(double u, double v, double eps, int n);

struct HessianF {
    double uv = -1, uu = 0, vv = 0;
    double ab = 0;  // multiplier of gbar_ab
    double TT = 0, NN = 0, TN = 0;
    double box = 0;
    double pi_TT = 0, pi_NN = 0, pi_TN = 0, pi_ab = 0;
};
HessianF warped_hessian_f(double u, double v, double eps, int n);

// Angular jet of a zonal factor Y(theta) = cos(m theta) on S^{n-1}:
// value, |grad Y|^2 and round-sphere Laplacian at the sample angle.
struct AngularJet {
    double Y = 1, G = 0, Lap = 0;
};
AngularJet angular_jet(int n, int m, double theta);

struct TestFunction {
    std::string name;
    std::function<J2(const J2&, const J2&)> q;
};
std::vector<TestFunction> test_catalog();
TestFunction random_trig_function(std::uint64_t seed, int index);

// Warped wave operator of q(u,v) Y(omega) given first and second derivatives of q.
double box_bar(double u, double v, const WarpParams& wp, double q, double qu, double qv, double quv,
               const AngularJet& ang);

struct IdentityResidual {
    double lhs = 0, rhs = 0, scale = 0, residual = 0;  // residual is |lhs - rhs| / scale
};

IdentityResidual pointwise_identity_residual(const TestFunction& psi, const AngularJet& ang, double u,
                                             double v, const CarlemanParams& cp, double h);

struct MarginReport {
    double lhs = 0, rhs = 0, scale = 0, margin = 0;  // margin is (lhs - rhs) / scale
};

MarginReport pointwise_inequality_margin(const TestFunction& psi, const AngularJet& ang, double u,
                                         double v, const CarlemanParams& cp, double h);
MarginReport reversed_inequality_margin(const TestFunction& phi, const AngularJet& ang, double u,
                                        double v, const CarlemanParams& cp, double h);

IdentityResidual conf_wave_identity_residual(const TestFunction& phibar, const AngularJet& ang, double u,
                                             double v, const WarpParams& wp, double h);

// Boundary current on the hypersurface v = kappa u + c for phi = (v - kappa u - c) q.
IdentityResidual dirichlet_current_residual(const TestFunction& q, const AngularJet& ang, double u,
                                            double kappa, double c, const CarlemanParams& cp);

inline double default_fd_step(double r) { return 1e-4 * (r > 1.0 ? r : 1.0); }

struct CheckResult {
    std::string name;
    int n = 1;
    double eps = 0;
    std::string kind;        // "closed", "fd" or "margin"
    double max_residual = 0;  // at the default step
    double min_ratio = 0;     // Richardson ratio residual(h) / residual(h/2), fd only
    double max_ratio = 0;
    double min_margin = 0;    // margin checks only, over test functions with nonzero scale
    std::size_t points = 0;
    bool pass = false;
};

struct SuiteOptions {
    std::vector<int> dims{1, 2, 3};
    std::vector<double> eps_values{0.0, 0.02, 0.05};
    int points = 1000;
    std::uint64_t seed = 1;
    double R = 1.0;
    double closed_tol = 1e-12;
    double fd_tol = 1e-6;
};

// Exterior sample (u, v) with r in [0.5 R, 0.95 R] and |t| <= 0.4 r, so f >= 0.0525 R^2.
struct UVPoint {
    double u, v;
};
std::vector<UVPoint> sample_exterior(std::size_t count, double R, std::uint64_t seed);

std::vector<CheckResult> run_identity_suite(const SuiteOptions& opt);

struct CarlemanSuiteOptions {
    std::vector<int> dims{1, 2, 3};
    std::vector<double> a_factors{1.0, 4.0};  // a = factor * n^2
    int points = 200;
    int random_trig = 100;
    std::uint64_t seed = 7;
    double R = 1.0;
    double identity_tol = 1e-6;
    double margin_tol = 1e-8;
};

std::vector<CheckResult> run_carleman_suite(const CarlemanSuiteOptions& opt);

// Richardson acceptance: ratio near 4, unless the residual is already at round-off.
bool richardson_ok(double r_h, double r_h2, double floor = 1e-11);

}  // namespace mbwave
