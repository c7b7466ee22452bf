#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mbwave/gtc.hpp"

namespace mbwave {

using Fn2 = std::function<double(double, double)>;  // (t, x)

// Lower-order terms of P = box + X^alpha d_alpha + V. Empty members are zero.
struct Coefficients {
    Fn2 Xt, Xx, V, divX;

    bool zero_drift() const { return !Xt && !Xx; }
    double xt(double t, double x) const { return Xt ? Xt(t, x) : 0.0; }
    double xx(double t, double x) const { return Xx ? Xx(t, x) : 0.0; }
    double v(double t, double x) const { return V ? V(t, x) : 0.0; }
    // Analytic if supplied, else centered differences with step 1e-5.
    double div(double t, double x) const;

    static Coefficients constant(double xt, double xx, double v);
};

struct CoefficientBounds {
    double M0 = 0.0, M1 = 0.0;
};

struct GridSpec {
    int nx = 400;
    int nt = 1200;
};

struct CflInfo {
    double dt_max = 0.0;
    int nt_requested = 0;
    int nt_used = 0;
    bool raised = false;
};

// Certificate dt <= 0.5 dy min L (1 - max|lambda'|) on [ta, tb].
double cfl_dt_max(const GTC1D& dom, double ta, double tb, int nx);

// Grid values w(t_n, y_j) of the transformed unknown; row-major in n.
struct Field {
    double ta = 0, tb = 0, dt = 0, dy = 0;
    int nx = 0, nt = 0;
    std::vector<double> w;
    std::vector<double> lam1, len, dlam1, dlen;  // per level
    CflInfo cfl;

    double& at(int n, int j) { return w[static_cast<std::size_t>(n) * (nx + 1) + j]; }
    double at(int n, int j) const { return w[static_cast<std::size_t>(n) * (nx + 1) + j]; }
    double t(int n) const { return ta + n * dt; }
    double x(int n, int j) const { return lam1[n] + j * dy * len[n]; }
    std::vector<double> level(int n) const;
};

struct CauchyData {
    std::vector<double> phi0, phi1;  // physical (phi, d_t phi) at the nodes of one level
};

// Dirichlet values per level; empty vectors mean zero.
struct BoundaryData {
    std::vector<double> left, right;
    double at(Side s, int n) const;
};

// Row stencil: a[dn + 1][dj + 1] multiplies w(n + dn, j + dj).
using Stencil = std::array<std::array<double, 3>, 3>;

// Discretization of L (box + X d + V) w = L F on the transformed grid.
class Scheme {
public:
    Scheme(const GTC1D& dom, Coefficients coeffs, double ta, double tb, GridSpec grid);

    int nx() const { return nx_; }
    int nt() const { return nt_; }
    double dt() const { return dt_; }
    double dy() const { return dy_; }
    double ta() const { return ta_; }
    double tb() const { return tb_; }
    double t(int n) const { return ta_ + n * dt_; }
    double x(int n, int j) const { return lam1_[n] + j * dy_ * len_[n]; }
    double length(int n) const { return len_[n]; }
    double speed(int n, double y) const { return dlam1_[n] + y * dlen_[n]; }
    double boundary_slope(Side s, int n) const { return s == Side::left ? dlam1_[n] : dlam1_[n] + dlen_[n]; }
    const CflInfo& cfl() const { return cfl_; }
    const GTC1D& domain() const { return dom_; }
    const Coefficients& coefficients() const { return co_; }
    CoefficientBounds bounds() const;

    Stencil stencil(int n, int j) const;
    // Rows j = 1..nx-1 of level n into out[j]; same values as stencil(n, j).
    void stencils(int n, std::vector<Stencil>& out) const;

    Field blank() const;

    // Precompute the level LU factors used by march_backward and adjoint_march. Worth it when the
    // same scheme is marched many times (HUM); costs 4 (nt + 1)(nx - 1) doubles.
    void cache_factorizations();

    // Two-level start from physical Cauchy data at level 0 (forward) or level nt (backward).
    void start_forward(Field& f, const CauchyData& d, const BoundaryData& g, const Fn2& forcing) const;
    void start_backward(Field& f, const CauchyData& d, const BoundaryData& g, const Fn2& forcing) const;

    // March the scheme rows; levels 0,1 (resp. nt-1, nt) must already be set.
    void march_forward(Field& f, const BoundaryData& g, const Fn2& forcing) const;
    void march_backward(Field& f, const BoundaryData& g, const Fn2& forcing) const;

    // Row residuals of a full grid function (rows n = 1..nt-1, interior j), and the exact transpose.
    std::vector<double> apply(const std::vector<double>& u) const;
    std::vector<double> apply_transpose(const std::vector<double>& rows) const;

    // Transposed march: solve P_U^T lam = r where P_U acts on interior levels 0..nt-2 and r is
    // nonzero only on levels 0, 1. Returns lam on rows (stored at their level, zero elsewhere).
    Field adjoint_march(const std::vector<double>& r0, const std::vector<double>& r1) const;

    // Boundary-node pairing of row multipliers: (P_b^T lam) per side and level.
    BoundaryData boundary_transpose(const Field& lam) const;

private:
    GTC1D dom_;
    Coefficients co_;
    double ta_, tb_, dt_, dy_;
    int nx_, nt_;
    CflInfo cfl_;
    std::vector<double> lam1_, len_, dlam1_, dlen_, ddlam1_, ddlen_, invlen_;
    std::vector<double> back_w_, back_ip_, adj_w_, adj_ip_;
    double idt2_ = 0, idy2_ = 0, i2dt_ = 0, i2dy_ = 0, i2dtdy_ = 0;

    Stencil stencil_at(int n, int j, double Xt, double Xx, double V) const;

    void fill_meta(Field& f) const;
    void start_level(Field& f, int n0, int n1, double sdt, const CauchyData& d, const BoundaryData& g,
                     const Fn2& forcing) const;
};

Field solve_forward(const Scheme& s, const CauchyData& d, const BoundaryData& g = {}, const Fn2& forcing = {});

// Adjoint field for data (z0, z1) at tau_-: the exact transpose of the backward boundary-to-state map.
Field solve_adjoint(const Scheme& s, const std::vector<double>& z0, const std::vector<double>& z1);

// Sample physical Cauchy data on level 0 of the grid.
CauchyData sample_cauchy(const Scheme& s, const std::function<double(double)>& phi0,
                         const std::function<double(double)>& phi1, int level = 0);

// Physical (phi, d_t phi) recovered from the grid at a level.
CauchyData cauchy_at(const Field& f, int n);

// d_x phi at a level, second order everywhere (one-sided at the ends).
std::vector<double> dx_level(const Field& f, int n);
// d_t phi at a level: centered inside, one-sided second order at the first/last level.
std::vector<double> dt_level(const Field& f, int n);

struct BoundaryTrace {
    Side side = Side::right;
    std::vector<double> tau, dphi_dx, Nphi, weight;  // weight = sqrt(1 - lambda'^2) times trapezoid dt
};

BoundaryTrace neumann_trace(const Field& f, Side side, double tol = 0.0);

// Trapezoid quadrature of |d phi|^2 + M0 phi^2 over the slice.
double energy(const Field& f, int n, double M0 = 0.0);
double localized_energy(const Field& f, int n, const SpacetimePoint& P, double M0 = 0.0);
int level_of(const Field& f, double tau);

// x = lambda_1 + y L written at every (stride) node as t,x,value rows.
void write_field_csv(std::ostream& os, const Field& f, int stride_t = 1, int stride_x = 1);
void write_field_binary(std::ostream& os, const Field& f);
Field read_field_binary(std::istream& is);

}  // namespace mbwave
