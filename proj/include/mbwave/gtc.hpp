#pragma once

#include <string>
#include <vector>

#include "mbwave/geometry.hpp"

namespace mbwave {

inline constexpr double kTimelikeMargin = 1e-6;

// Boundary curve x = lambda(tau): either a line or a natural cubic spline through knots.
class Curve {
public:
    static Curve linear(double slope, double intercept);
    static Curve sampled(std::vector<double> taus, std::vector<double> values);

    double operator()(double tau) const;
    double d1(double tau) const;
    double d2(double tau) const;

    bool is_linear() const { return linear_; }
    double slope() const { return slope_; }
    double intercept() const { return intercept_; }
    const std::vector<double>& knots() const { return taus_; }
    const std::vector<double>& knot_values() const { return vals_; }

private:
    std::size_t segment(double tau) const;

    bool linear_ = true;
    double slope_ = 0.0, intercept_ = 0.0;
    std::vector<double> taus_, vals_, m_;  // m_: second derivatives at knots
};

enum class Side { left, right };

// 1+1D domain bounded by two timelike curves lambda_1 < lambda_2 on [t0, t1].
class GTC1D {
public:
    GTC1D(Curve left, Curve right, double t0, double t1);

    const Curve& curve(Side s) const { return s == Side::left ? l1_ : l2_; }
    double lambda1(double t) const { return l1_(t); }
    double lambda2(double t) const { return l2_(t); }
    double width(double t) const { return l2_(t) - l1_(t); }
    double t0() const { return t0_; }
    double t1() const { return t1_; }
    double max_speed() const { return max_speed_; }
    double min_width() const { return min_width_; }
    bool contains(double t, double x) const;

private:
    Curve l1_, l2_;
    double t0_, t1_;
    double max_speed_ = 0.0, min_width_ = 0.0;
};

// Outward Minkowski unit normal N = nu_t d_t + nu d_x.
struct BoundaryNormal {
    double nu_t = 0.0;
    std::vector<double> nu;
    Side side = Side::right;
};

BoundaryNormal boundary_normal_1d(const GTC1D& dom, Side side, double tau);

struct NormalDerivatives {
    double Nf = 0.0, Nr = 0.0, Nt = 0.0;
};

NormalDerivatives normal_derivatives(const SpacetimePoint& q, const BoundaryNormal& N,
                                     const SpacetimePoint& P);
NormalDerivatives normal_derivatives(const GTC1D& dom, Side side, double tau,
                                     const SpacetimePoint& P);

struct RegionSample {
    double tau = 0.0;
    SpacetimePoint point;
    Side side = Side::right;
    double fP = 0.0, NfP = 0.0, NrP = 0.0, S = 0.0, costheta = 0.0;
    bool in_gamma_plus = false, in_gamma_Pdelta = false, in_gamma_dagger = false;
};

// Evaluate one boundary sample of a general-n boundary point cloud.
RegionSample region_eval(const SpacetimePoint& q, const BoundaryNormal& N,
                         const SpacetimePoint& P, double delta, double Rplus, double tau);

struct RegionScan {
    double Rplus = 0.0;
    std::vector<RegionSample> samples;
};

// R_+ as the sampled sup of r_P over U cap D_P.
double sampled_Rplus(const GTC1D& dom, const SpacetimePoint& P, double ta, double tb,
                     int density = 10000);

RegionScan region_scan(const GTC1D& dom, const SpacetimePoint& P, double delta, double ta,
                       double tb, int samples_per_side, int rplus_density = 10000);

std::string region_csv_header();

struct OptimalTimes {
    double T_minus = 0.0, T_plus = 0.0, T_onesided = 0.0, T1 = 0.0, T2 = 0.0;
};

OptimalTimes optimal_times_1d(const GTC1D& dom, double tau_minus);

// Closed forms for lines through the origin.
OptimalTimes optimal_times_lines(double h1, double h2, double tau_minus);

// Center used for the one-sided estimate: on the leftward null line from (tau_-, lambda_2(tau_-)),
// a time gap past the crossing of lambda_1.
SpacetimePoint onesided_center(const GTC1D& dom, double tau_minus, double gap);

}  // namespace mbwave
