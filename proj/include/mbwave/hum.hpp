#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "mbwave/solver.hpp"

namespace mbwave {

using Profile = std::function<double(double)>;  // a function of x on one slice

struct ObservedRegion {
    std::vector<std::pair<double, double>> left, right;  // closed tau-intervals per side
    bool empty() const { return left.empty() && right.empty(); }
};

// Dual pairing used by CG: plain Euclidean on (position, velocity), or preconditioned with
// diag(alpha I, beta K^-1) where K is the Dirichlet Laplacian of the initial slice.
enum class Pairing { l2, h1 };

struct HUMProblem {
    GTC1D dom;
    Coefficients coeffs;
    double ta = 0, tb = 0;
    ObservedRegion gamma;
    Profile phi0_minus, phi1_minus;  // initial data at ta (empty means zero)
    Profile phi0_plus, phi1_plus;    // target at tb (empty means rest)
    double rho_reg = 1e-8;           // Tikhonov weight on the pairing norm, relative to |M^-1 G|
    double cg_tol = 1e-6;
    int cg_max_iter = 3000;
    GridSpec grid{400, 1200};
    Pairing pairing = Pairing::h1;

    void validate() const;
};

// Interior state on the first two levels as (w0, (w1 - w0) / dt), each of length nx + 1 with zero ends.
struct State {
    std::vector<double> w0, w1;
};

struct HUMSolution {
    BoundaryData control;  // zero outside gamma
    State dual;            // CG solution z
    State initial;         // state the control must cancel
    std::vector<double> residual_history, J_history;
    int iterations = 0;
    bool converged = false;
    double rho = 0, gram_norm = 0;
    double J = 0;
    double control_norm = 0;      // L2(gamma) norm with arclength weights
    double final_energy_rel = 0;  // E(tb) / E(ta) of the closed loop (null control), or the
                                  // energy of the final-state error over E(target) (exact control)
    CauchyData achieved_final;
    CflInfo cfl;
};

// Matrix-free discrete HUM operators on one grid.
class HUMOperator {
public:
    explicit HUMOperator(const HUMProblem& p);

    const Scheme& scheme() const { return s_; }
    const HUMProblem& problem() const { return p_; }
    const std::vector<double>& chi(Side side) const { return side == Side::left ? chi_l_ : chi_r_; }
    const std::vector<double>& arclength(Side side) const { return side == Side::left ? m_l_ : m_r_; }

    State B(const BoundaryData& g) const;            // backward march from rest
    BoundaryData Bt(const State& z) const;           // exact transpose
    State precondition(const State& r) const;        // M^-1; identity for the l2 pairing
    State pairing_apply(const State& z) const;       // M
    BoundaryData DBt(const State& z) const;          // weighted, supported in gamma
    State gram(const State& z, double rho) const;    // B D B^T z + rho M z
    double norm2(const BoundaryData& g) const;       // sum g^2 m / chi over gamma

    // Largest eigenvalue of M^-1 B D B^T by power iteration.
    double estimate_gram_norm(int iters, std::uint64_t seed) const;

    // Initial state from Cauchy data with zero boundary values.
    State initial_state(const Profile& phi0, const Profile& phi1) const;
    // Levels 0 and 1 of the free backward evolution of the target.
    Field backward_free(const Profile& phi0, const Profile& phi1) const;
    Field closed_loop(const Profile& phi0, const Profile& phi1, const BoundaryData& g) const;

private:
    HUMProblem p_;
    Scheme s_;
    std::vector<double> chi_l_, chi_r_, m_l_, m_r_;
    double pc_alpha_ = 1, pc_beta_ = 1;

    State from_levels(const std::vector<double>& a, const std::vector<double>& b) const;
};

double dot(const State& a, const State& b);

// Dual vector of the linear part of J on the initial slice, as (r0, r1) with
// <r, (psi0, psi1)> = <phi1 - 2 beta phi0_x - beta_x phi0 - X^t phi0, psi0> - <phi0, psi1>.
State hum_rhs(const HUMOperator& op, const Profile& phi0, const Profile& phi1);

struct CGResult {
    State x;
    std::vector<double> residual_history, J_history;
    int iterations = 0;
    bool converged = false;
};

// Preconditioned CG; M applies the inverse preconditioner (empty means none).
CGResult conjugate_gradient(const std::function<State(const State&)>& A, const State& b, double tol, int max_iter,
                            const std::function<State(const State&)>& M = {});

HUMSolution solve_null_control(const HUMProblem& p);
HUMSolution solve_exact_control(const HUMProblem& p);
HUMSolution solve_null_control(const HUMOperator& op);
HUMSolution solve_exact_control(const HUMOperator& op);
HUMSolution solve_null_control(const HUMOperator& op, const HUMProblem& p, const State& y);

// Largest relative asymmetry |<Gx,y> - <x,Gy>| / max(|<Gx,y>|, tiny) over random pairs.
double gram_symmetry(const HUMOperator& op, double rho, int pairs, std::uint64_t seed);

struct MinimalityReport {
    double hum_norm2 = 0;
    std::vector<double> perturbed_norm2;  // scale 1 perturbations
    std::vector<double> scaled_gap_ratio; // gap(2 k) / gap(k), ideally 4
    double worst_relative_deficit = 0;    // max over perturbations of (hum - perturbed) / hum, <= 0 ideally
    double max_cross = 0;                 // |<g, k>| / (|g| |k|) in the control norm
    bool pass = false;
};

// Perturbations k = n - D B^T G^-1 B n of random boundary noise n drive zero data to (nearly) zero.
// Each k is scaled to 1% of the control, so the |k|^2 gain (1e-4 relative) dwarfs the cross term
// left by a loose projection.
MinimalityReport minimality_check(const HUMOperator& op, const HUMSolution& sol, int count, std::uint64_t seed,
                                  double tol = 1e-6, double projection_tol = 1e-4);

}  // namespace mbwave
