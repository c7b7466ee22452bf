#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbwave/estimates.hpp"
#include "mbwave/gtc.hpp"
#include "mbwave/hum.hpp"
#include "mbwave/solver.hpp"
#include "mbwave/warped.hpp"

namespace mbwave {

// Rejected config; what() names the line/column (syntax) or the dotted field path (semantics).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Slice profile in x on the slice at a given time.
//   zero
//   sine:     amp sin(mode pi (x - lambda_1) / L)
//   gaussian: amp exp(-((x - center) / sigma)^2) cos(k (x - center))
struct ProfileSpec {
    std::string kind = "zero";
    int mode = 1;
    double amp = 1.0, center = 0.0, sigma = 0.1, k = 0.0;

    bool is_zero() const { return kind == "zero"; }
};

Profile make_profile(const ProfileSpec& spec, const GTC1D& dom, double t);
// Velocity profile; kind "comoving" is the velocity that keeps phi0 at rest in the moving frame,
// which satisfies the corner compatibility on both curves.
Profile make_velocity(const ProfileSpec& v, const ProfileSpec& phi0, const GTC1D& dom, double t);

struct SimulateSection {
    ProfileSpec phi0{"sine"}, phi1;
    int stride_t = 0, stride_x = 0;  // 0 picks about 200 x 100 samples
    double multiplier_tol = 1e-3;    // checked only when a center is given
};

struct IdentitySection {
    std::vector<int> dims{1, 2, 3};
    std::vector<double> eps_values{0.0, 0.02, 0.05};
    int points = 1000;
    double R = 1.0;
};

struct CarlemanSection {
    std::vector<int> dims{1, 2, 3};
    std::vector<double> a_factors{1.0, 4.0};
    int points = 200, random_trig = 100;
    double R = 1.0;
};

struct ScanSection {
    std::vector<double> windows{1.2, 1.6, 2.0, 2.4, 2.8};
    int members = 32, modes = 10;
    int beam_nx = 800;
    bool observe_left = false, observe_right = true;
    int quad_nx = 200, quad_nt = 200;  // Carleman quadrature grid
};

struct HumSection {
    ObservedRegion gamma;
    ProfileSpec phi0_minus{"sine"}, phi1_minus, phi0_plus, phi1_plus;
    double rho_reg = 1e-8, cg_tol = 1e-6;
    int cg_max_iter = 3000;
    Pairing pairing = Pairing::h1;
    double tolerance = 1e-2;  // relative final energy (or final-state error)
    int minimality_count = 0;
};

struct RegionSection {
    int samples_per_side = 200;
};

struct ExperimentConfig {
    Curve left = Curve::linear(0, 0), right = Curve::linear(0, 1);
    double t0 = 0, t1 = 1;
    std::string coefficients = "zero";
    Coefficients coeffs;
    double ta = 0, tb = 1;
    std::optional<SpacetimePoint> center;
    double delta = 0.1;
    std::optional<double> carleman_a;  // 1D quadrature parameters; b and eps take the largest admissible
    GridSpec grid{400, 1200};
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    SimulateSection simulate;
    IdentitySection identity;
    CarlemanSection carleman;
    ScanSection scan;
    HumSection hum;
    RegionSection region;

    GTC1D domain() const { return GTC1D(left, right, t0, t1); }
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace mbwave
