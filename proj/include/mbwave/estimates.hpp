#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mbwave/solver.hpp"
#include "mbwave/warped.hpp"

namespace mbwave {

// A quadrature value reported at two resolutions.
struct EstimateReport {
    std::string name;
    double lhs = 0, rhs = 0, margin = 0;           // finest grid
    double lhs_coarse = 0, rhs_coarse = 0, margin_coarse = 0;
    int nx = 0, nt = 0;
    std::uint64_t seed = 0;
    bool converged = true;  // finest two values agree to 1%
};

// Flags an estimate whose two finest values differ by more than 1%.
bool quadrature_stable(double coarse, double fine, double rel = 0.01);

// Multiplier identity for free waves with zero Dirichlet data (1+1D, S = grad f):
//   [int (t_P/4)(phi_t^2 + phi_x^2) + (x_P/2) phi_t phi_x dx]_{tau_-}^{tau_+} = 1/2 int Nf (N phi)^2 ds.
struct MultiplierTerms {
    double slice_minus = 0, slice_plus = 0, boundary = 0;
    double residual = 0;  // slice_plus - slice_minus - boundary
};

MultiplierTerms multiplier_identity(const Field& f, const GTC1D& dom, const SpacetimePoint& P);

// Residual at successive grid doublings starting from (nx, nt).
std::vector<double> multiplier_refinement(const GTC1D& dom, double ta, double tb, const SpacetimePoint& P,
                                          const std::function<double(double)>& phi0,
                                          const std::function<double(double)>& phi1, GridSpec coarsest,
                                          int levels);

// Scalar function of (t, x) with exact second derivatives: variable 0 is t, variable 1 is x.
using TXFunction = std::function<J2(const J2& t, const J2& x)>;

struct NamedTX {
    std::string name;
    TXFunction q;
};

std::vector<NamedTX> carleman_catalog();

// q times (x - lambda_1)(lambda_2 - x), which vanishes on both boundary curves.
TXFunction vanishing_on(const GTC1D& dom, const TXFunction& q);

// Terms of the integrated Carleman estimate over U cap D_P, each scaled by exp(-log_shift) where
// log_shift is the largest log weight on the quadrature grid.
struct CarlemanTerms {
    double box = 0;       // (1/a) int zeta f |box phi|^2
    double boundary = 0;  // int zeta [(1 - eps r) Nf + eps f Nr] |N phi|^2
    double grad = 0;      // eps int zeta r^-1 (|u phi_u|^2 + |v phi_v|^2)
    double zero = 0;      // b a^2 int zeta f^-1/2 phi^2
    double log_shift = 0;
    double C_emp = 0;     // (box + C' boundary) / (grad + zero)
    std::size_t cells = 0;
};

struct CarlemanQuadOptions {
    int nt = 200, nx = 200;
    double Cprime = 1.0;
    double fmin_factor = 1e-6;  // collar f_P >= fmin_factor R^2
};

CarlemanTerms carleman_quadrature(const TXFunction& phi, const GTC1D& dom, const SpacetimePoint& P,
                                  const CarlemanParams& cp, double ta, double tb, const CarlemanQuadOptions& opt);

// R = 1.01 sup r_P over sampled U cap D_P.
double carleman_radius(const GTC1D& dom, const SpacetimePoint& P, double ta, double tb);

EstimateReport carleman_quadrature_check(const TXFunction& phi, const GTC1D& dom, const SpacetimePoint& P,
                                         const CarlemanParams& cp, double ta, double tb,
                                         CarlemanQuadOptions opt);

std::string carleman_csv_header();
std::string carleman_csv_row(const std::string& label, double a, const CarlemanTerms& t);

// Observation on the chosen sides: sum of int |N phi|^2 ds.
struct ObservedSides {
    bool left = false, right = true;
};

double boundary_observation(const Field& f, ObservedSides sides);

// Ratio of the boundary observation to E(tau_-) + E(tau_+), energies with the phi^2 term.
double observability_ratio(const Field& f, ObservedSides sides);

// Random combinations of the first `modes` Dirichlet eigenfunctions of the slice at tau_-.
std::vector<CauchyData> eigenmode_ensemble(const Scheme& s, int members, int modes, std::uint64_t seed);

// exp(-(x - xc)^2 / sigma^2) cos(k (x - xc)) with phi_1 = +-d_x phi_0 so that it travels along
// a single null direction (leftward for direction = -1).
CauchyData gaussian_beam(const Scheme& s, double xc, double sigma, double k, int direction);

struct RatioSummary {
    double min = 0, median = 0;
    std::vector<double> ratios;
};

RatioSummary observability_summary(const Scheme& s, const std::vector<CauchyData>& ensemble, ObservedSides sides);

struct BeamSpec {
    double xc = 0, sigma = 0, k = 0;
    int direction = -1;
};

// Left-moving beam for a right-observed window [ta, tb]. With sigma0 = width(ta) / 20, the center
// ray reflects off lambda_1 and is still 2 sigma0 short of lambda_2 at tb; the start is clamped to at
// least 5 sigma0 inside lambda_2(ta). sigma = sigma_scale * sigma0, k = 40 pi.
BeamSpec default_beam(const GTC1D& dom, double ta, double tb, double sigma_scale = 1.0);
inline constexpr double kBeamEndGap = 2.0, kBeamStartGap = 5.0;  // in units of sigma0

struct ScanRow {
    double window = 0, min_ratio = 0, median_ratio = 0, beam_ratio = 0;
    double optimal_T = 0;  // same in every row, so plots can draw the threshold
};

struct ScanOptions {
    std::vector<double> windows;
    GridSpec grid{400, 1200};
    // The beam has its own grid: at 400 cells the dispersion floor (~1e-5) hides the narrow-beam tail.
    GridSpec beam_grid{800, 2400};
    int members = 32, modes = 10;
    std::uint64_t seed = 1;
    ObservedSides sides;
    double optimal_T = 0;
};

// min_ratio includes the beam; median_ratio is over the random ensemble.
std::vector<ScanRow> timespan_scan(const GTC1D& dom, const Coefficients& co, double ta, const ScanOptions& opt);

std::string scan_csv_header();
std::string scan_csv_row(const ScanRow& r);

}  // namespace mbwave
