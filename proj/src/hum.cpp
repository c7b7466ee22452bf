#include "mbwave/hum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mbwave/rng.hpp"

namespace mbwave {

void HUMProblem::validate() const {
    if (!(tb > ta)) throw std::invalid_argument("control window must be positive");
    if (gamma.empty()) throw std::invalid_argument("observed region gamma is empty");
    if (!(rho_reg >= 0.0)) throw std::invalid_argument("rho_reg must be >= 0");
    if (!(cg_tol > 0.0) || cg_max_iter < 1) throw std::invalid_argument("bad CG settings");
    for (const auto* v : {&gamma.left, &gamma.right})
        for (auto [a, b] : *v)
            if (!(b > a)) throw std::invalid_argument("gamma intervals must have positive length");
}

namespace {

// 0, 0, 0.25, 0.75, 1, ..., 1, 0.75, 0.25, 0, 0 over the nodes of each interval.
std::vector<double> taper(const Scheme& s, const std::vector<std::pair<double, double>>& iv) {
    const int nt = s.nt();
    std::vector<double> chi(nt + 1, 0.0);
    // Three zero levels at each end keep the one-sided time stencils of the end slices free of control.
    static const double ramp[5] = {0.0, 0.0, 0.0, 0.25, 0.75};
    for (auto [a, b] : iv) {
        int first = -1, last = -1;
        for (int n = 0; n <= nt; ++n)
            if (s.t(n) >= a - 1e-12 && s.t(n) <= b + 1e-12) {
                if (first < 0) first = n;
                last = n;
            }
        if (first < 0) continue;
        for (int n = first; n <= last; ++n) {
            int k = std::min(n - first, last - n);
            chi[n] = std::max(chi[n], k < 5 ? ramp[k] : 1.0);
        }
    }
    for (int n : {0, 1, 2, nt - 2, nt - 1, nt}) chi[n] = 0.0;
    return chi;
}

std::vector<double> arclength_weights(const Scheme& s, Side side) {
    std::vector<double> m(s.nt() + 1);
    for (int n = 0; n <= s.nt(); ++n) {
        double lp = s.boundary_slope(side, n);
        m[n] = std::sqrt(1 - lp * lp) * s.dt() * ((n == 0 || n == s.nt()) ? 0.5 : 1.0);
    }
    return m;
}

State zero_state(int nx) { return {std::vector<double>(nx + 1, 0.0), std::vector<double>(nx + 1, 0.0)}; }

void axpy(double a, const State& x, State& y) {
    for (std::size_t i = 0; i < x.w0.size(); ++i) {
        y.w0[i] += a * x.w0[i];
        y.w1[i] += a * x.w1[i];
    }
}

State random_state(int nx, Rng& rng) {
    State s = zero_state(nx);
    for (int j = 1; j < nx; ++j) {
        s.w0[j] = rng.normal();
        s.w1[j] = rng.normal();
    }
    return s;
}

}  // namespace

double dot(const State& a, const State& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.w0.size(); ++i) s += a.w0[i] * b.w0[i] + a.w1[i] * b.w1[i];
    return s;
}

HUMOperator::HUMOperator(const HUMProblem& p) : p_(p), s_(p.dom, p.coeffs, p.ta, p.tb, p.grid) {
    p_.validate();
    s_.cache_factorizations();
    chi_l_ = taper(s_, p_.gamma.left);
    chi_r_ = taper(s_, p_.gamma.right);
    m_l_ = arclength_weights(s_, Side::left);
    m_r_ = arclength_weights(s_, Side::right);
    if (p_.pairing == Pairing::h1) {
        // Match the preconditioned Gram to the identity on the gravest mode of each block.
        const int nx = s_.nx();
        State ep = zero_state(nx), ev = zero_state(nx);
        for (int j = 1; j < nx; ++j) ep.w0[j] = ev.w1[j] = std::sin(M_PI * j * s_.dy());
        pc_alpha_ = dot(ep, ep) / dot(ep, gram(ep, 0.0));
        pc_beta_ = 1.0;
        State kv = precondition(ev);  // K^-1 ev while beta = 1
        pc_beta_ = dot(ev, ev) / dot(kv, gram(ev, 0.0));
    }
}

State HUMOperator::precondition(const State& r) const {
    if (p_.pairing == Pairing::l2) return r;
    const int nx = s_.nx(), m = nx - 1;
    State out = zero_state(nx);
    for (int j = 1; j < nx; ++j) out.w0[j] = pc_alpha_ * r.w0[j];
    const double dx = s_.dy() * s_.length(0), k = 1.0 / (dx * dx);
    std::vector<double> c(m), d(m);
    // K = tridiag(-1, 2, -1) / dx^2, solved by the Thomas algorithm.
    double denom = 2 * k;
    c[0] = -k / denom;
    d[0] = r.w1[1] / denom;
    for (int i = 1; i < m; ++i) {
        denom = 2 * k + k * c[i - 1];
        c[i] = -k / denom;
        d[i] = (r.w1[i + 1] + k * d[i - 1]) / denom;
    }
    for (int i = m - 2; i >= 0; --i) d[i] -= c[i] * d[i + 1];
    for (int j = 1; j < nx; ++j) out.w1[j] = pc_beta_ * d[j - 1];
    return out;
}

State HUMOperator::pairing_apply(const State& z) const {
    if (p_.pairing == Pairing::l2) return z;
    const int nx = s_.nx();
    const double dx = s_.dy() * s_.length(0), k = 1.0 / (dx * dx);
    State out = zero_state(nx);
    for (int j = 1; j < nx; ++j) {
        out.w0[j] = z.w0[j] / pc_alpha_;
        out.w1[j] = k * (2 * z.w1[j] - z.w1[j - 1] - z.w1[j + 1]) / pc_beta_;
    }
    return out;
}

State HUMOperator::from_levels(const std::vector<double>& a, const std::vector<double>& b) const {
    State out = zero_state(s_.nx());
    for (int j = 1; j < s_.nx(); ++j) {
        out.w0[j] = a[j];
        out.w1[j] = (b[j] - a[j]) / s_.dt();
    }
    return out;
}

State HUMOperator::B(const BoundaryData& g) const {
    Field f = s_.blank();
    const int nt = s_.nt(), nx = s_.nx();
    for (int n : {nt - 1, nt}) {
        f.at(n, 0) = g.at(Side::left, n);
        f.at(n, nx) = g.at(Side::right, n);
    }
    s_.march_backward(f, g, {});
    return from_levels(f.level(0), f.level(1));
}

BoundaryData HUMOperator::Bt(const State& z) const {
    // Transpose of (a, b) -> (a, (b - a) / dt) is (p, q) -> (p - q / dt, q / dt).
    std::vector<double> r0(z.w0.size()), r1(z.w0.size());
    for (std::size_t j = 0; j < r0.size(); ++j) {
        r0[j] = z.w0[j] - z.w1[j] / s_.dt();
        r1[j] = z.w1[j] / s_.dt();
    }
    BoundaryData b = s_.boundary_transpose(s_.adjoint_march(r0, r1));
    for (double& x : b.left) x = -x;
    for (double& x : b.right) x = -x;
    return b;
}

BoundaryData HUMOperator::DBt(const State& z) const {
    BoundaryData b = Bt(z);
    for (int n = 0; n <= s_.nt(); ++n) {
        b.left[n] *= chi_l_[n] > 0 ? chi_l_[n] / m_l_[n] : 0.0;
        b.right[n] *= chi_r_[n] > 0 ? chi_r_[n] / m_r_[n] : 0.0;
    }
    return b;
}

State HUMOperator::gram(const State& z, double rho) const {
    State g = B(DBt(z));
    if (rho != 0.0) axpy(rho, pairing_apply(z), g);
    return g;
}

double HUMOperator::norm2(const BoundaryData& g) const {
    double s = 0.0;
    for (int n = 0; n <= s_.nt(); ++n) {
        if (chi_l_[n] > 0) s += g.at(Side::left, n) * g.at(Side::left, n) * m_l_[n] / chi_l_[n];
        if (chi_r_[n] > 0) s += g.at(Side::right, n) * g.at(Side::right, n) * m_r_[n] / chi_r_[n];
    }
    return s;
}

double HUMOperator::estimate_gram_norm(int iters, std::uint64_t seed) const {
    Rng rng(seed);
    State x = random_state(s_.nx(), rng);
    double lam = 0.0;
    for (int k = 0; k < iters; ++k) {
        double nx = std::sqrt(dot(x, x));
        if (nx == 0.0) return 0.0;
        for (auto& v : x.w0) v /= nx;
        for (auto& v : x.w1) v /= nx;
        State y = precondition(gram(x, 0.0));
        lam = dot(x, y);
        x = std::move(y);
    }
    return lam;
}

State HUMOperator::initial_state(const Profile& phi0, const Profile& phi1) const {
    Field f = s_.blank();
    s_.start_forward(f, sample_cauchy(s_, phi0, phi1, 0), {}, {});
    return from_levels(f.level(0), f.level(1));
}

Field HUMOperator::backward_free(const Profile& phi0, const Profile& phi1) const {
    Field f = s_.blank();
    s_.start_backward(f, sample_cauchy(s_, phi0, phi1, s_.nt()), {}, {});
    s_.march_backward(f, {}, {});
    return f;
}

Field HUMOperator::closed_loop(const Profile& phi0, const Profile& phi1, const BoundaryData& g) const {
    return solve_forward(s_, sample_cauchy(s_, phi0, phi1, 0), g);
}

State hum_rhs(const HUMOperator& op, const Profile& phi0, const Profile& phi1) {
    const Scheme& s = op.scheme();
    const int nx = s.nx();
    CauchyData d = sample_cauchy(s, phi0, phi1, 0);
    std::vector<double> px(nx + 1);
    const double dx = s.dy() * s.length(0);
    for (int j = 1; j < nx; ++j) px[j] = (d.phi0[j + 1] - d.phi0[j - 1]) / (2 * dx);
    px[0] = (-3 * d.phi0[0] + 4 * d.phi0[1] - d.phi0[2]) / (2 * dx);
    px[nx] = (3 * d.phi0[nx] - 4 * d.phi0[nx - 1] + d.phi0[nx - 2]) / (2 * dx);
    const double bx = s.boundary_slope(Side::right, 0) - s.boundary_slope(Side::left, 0);
    const double betax = bx / s.length(0);
    State r = zero_state(nx);
    for (int j = 0; j <= nx; ++j) {
        const double w = dx * ((j == 0 || j == nx) ? 0.5 : 1.0);
        const double beta = s.speed(0, j * s.dy());
        const double xt = s.coefficients().xt(s.t(0), s.x(0, j));
        r.w0[j] = w * (d.phi1[j] - 2 * beta * px[j] - betax * d.phi0[j] - xt * d.phi0[j]);
        r.w1[j] = -w * d.phi0[j];
    }
    return r;
}

CGResult conjugate_gradient(const std::function<State(const State&)>& A, const State& b, double tol, int max_iter,
                            const std::function<State(const State&)>& M) {
    CGResult res;
    res.x = zero_state(static_cast<int>(b.w0.size()) - 1);
    const double bn = std::sqrt(dot(b, b));
    res.residual_history.push_back(bn == 0.0 ? 0.0 : 1.0);
    res.J_history.push_back(0.0);
    if (bn == 0.0) {
        res.converged = true;
        return res;
    }
    State r = b;
    State zr = M ? M(r) : r;
    State p = zr;
    double rz = dot(r, zr);
    for (int k = 0; k < max_iter; ++k) {
        State Ap = A(p);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0.0)) break;
        const double alpha = rz / pAp;
        axpy(alpha, p, res.x);
        axpy(-alpha, Ap, r);
        const double rn = std::sqrt(dot(r, r));
        res.iterations = k + 1;
        res.residual_history.push_back(rn / bn);
        // J(x) = x.Ax/2 - b.x = -(x.b + x.r)/2 along CG iterates
        res.J_history.push_back(-0.5 * (dot(res.x, b) + dot(res.x, r)));
        if (rn <= tol * bn) {
            res.converged = true;
            break;
        }
        zr = M ? M(r) : r;
        const double rz_new = dot(r, zr);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < p.w0.size(); ++i) {
            p.w0[i] = zr.w0[i] + beta * p.w0[i];
            p.w1[i] = zr.w1[i] + beta * p.w1[i];
        }
    }
    return res;
}

HUMSolution solve_null_control(const HUMOperator& op, const HUMProblem& p, const State& y) {
    HUMSolution sol;
    sol.cfl = op.scheme().cfl();
    sol.initial = y;
    sol.gram_norm = op.estimate_gram_norm(20, 12345);
    sol.rho = p.rho_reg * sol.gram_norm;
    CGResult cg = conjugate_gradient([&](const State& z) { return op.gram(z, sol.rho); }, y, p.cg_tol, p.cg_max_iter,
                                     [&](const State& r) { return op.precondition(r); });
    sol.dual = cg.x;
    sol.residual_history = cg.residual_history;
    sol.J_history = cg.J_history;
    sol.iterations = cg.iterations;
    sol.converged = cg.converged;
    sol.J = cg.J_history.back();
    sol.control = op.DBt(sol.dual);
    sol.control_norm = std::sqrt(op.norm2(sol.control));
    return sol;
}

HUMSolution solve_null_control(const HUMProblem& p) { return solve_null_control(HUMOperator(p)); }

HUMSolution solve_exact_control(const HUMProblem& p) { return solve_exact_control(HUMOperator(p)); }

HUMSolution solve_null_control(const HUMOperator& op) {
    const HUMProblem& p = op.problem();
    HUMSolution sol = solve_null_control(op, p, op.initial_state(p.phi0_minus, p.phi1_minus));
    Field f = op.closed_loop(p.phi0_minus, p.phi1_minus, sol.control);
    const double e0 = energy(f, 0);
    sol.final_energy_rel = e0 > 0 ? energy(f, f.nt) / e0 : energy(f, f.nt);
    sol.achieved_final = cauchy_at(f, f.nt);
    return sol;
}

HUMSolution solve_exact_control(const HUMOperator& op) {
    const HUMProblem& p = op.problem();
    Field alpha = op.backward_free(p.phi0_plus, p.phi1_plus);
    State y = op.initial_state(p.phi0_minus, p.phi1_minus);
    const double dt = op.scheme().dt();
    for (int j = 1; j < op.scheme().nx(); ++j) {
        y.w0[j] -= alpha.at(0, j);
        y.w1[j] -= (alpha.at(1, j) - alpha.at(0, j)) / dt;
    }
    HUMSolution sol = solve_null_control(op, p, y);
    Field u = op.closed_loop(p.phi0_minus, p.phi1_minus, sol.control);
    sol.achieved_final = cauchy_at(u, u.nt);
    Field diff = u;
    for (std::size_t i = 0; i < diff.w.size(); ++i) diff.w[i] -= alpha.w[i];
    const double et = energy(alpha, alpha.nt);
    sol.final_energy_rel = et > 0 ? energy(diff, diff.nt) / et : energy(diff, diff.nt);
    return sol;
}

double gram_symmetry(const HUMOperator& op, double rho, int pairs, std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int k = 0; k < pairs; ++k) {
        State x = random_state(op.scheme().nx(), rng), y = random_state(op.scheme().nx(), rng);
        const double a = dot(op.gram(x, rho), y), b = dot(x, op.gram(y, rho));
        worst = std::max(worst, std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}));
    }
    return worst;
}

MinimalityReport minimality_check(const HUMOperator& op, const HUMSolution& sol, int count, std::uint64_t seed,
                                  double tol, double projection_tol) {
    MinimalityReport rep;
    const Scheme& s = op.scheme();
    const int nt = s.nt();
    rep.hum_norm2 = op.norm2(sol.control);
    const double gnorm = std::sqrt(rep.hum_norm2);
    Rng rng(seed);
    rep.worst_relative_deficit = -std::numeric_limits<double>::infinity();
    auto combine = [&](double a, const BoundaryData& k) {
        BoundaryData g = sol.control;
        for (int n = 0; n <= nt; ++n) {
            g.left[n] += a * k.left[n];
            g.right[n] += a * k.right[n];
        }
        return g;
    };
    for (int c = 0; c < count; ++c) {
        BoundaryData noise;
        noise.left.assign(nt + 1, 0.0);
        noise.right.assign(nt + 1, 0.0);
        for (int n = 0; n <= nt; ++n) {
            noise.left[n] = op.chi(Side::left)[n] * rng.normal();
            noise.right[n] = op.chi(Side::right)[n] * rng.normal();
        }
        CGResult cg = conjugate_gradient([&](const State& z) { return op.gram(z, sol.rho); }, op.B(noise),
                                         projection_tol, 3000, [&](const State& r) { return op.precondition(r); });
        BoundaryData proj = op.DBt(cg.x);
        BoundaryData k = noise;
        for (int n = 0; n <= nt; ++n) {
            k.left[n] -= proj.left[n];
            k.right[n] -= proj.right[n];
        }
        // Scale to 1% of the control so the cross term is visible against |k|^2.
        const double kn = std::sqrt(op.norm2(k));
        if (kn == 0.0) continue;
        const double sc = gnorm > 0 ? 1e-2 * gnorm / kn : 1.0 / kn;
        for (int n = 0; n <= nt; ++n) {
            k.left[n] *= sc;
            k.right[n] *= sc;
        }
        const double n1 = op.norm2(combine(1.0, k)), n2 = op.norm2(combine(2.0, k));
        rep.perturbed_norm2.push_back(n1);
        const double gap1 = n1 - rep.hum_norm2, gap2 = n2 - rep.hum_norm2;
        rep.scaled_gap_ratio.push_back(gap1 != 0.0 ? gap2 / gap1 : 0.0);
        const double denom = rep.hum_norm2 > 0 ? rep.hum_norm2 : 1.0;
        rep.worst_relative_deficit = std::max(rep.worst_relative_deficit, -gap1 / denom);
        double cross = 0.0;
        for (Side side : {Side::left, Side::right})
            for (int n = 0; n <= nt; ++n) {
                const double chi = op.chi(side)[n];
                if (chi > 0) cross += sol.control.at(side, n) * k.at(side, n) * op.arclength(side)[n] / chi;
            }
        const double kk = std::sqrt(op.norm2(k));
        if (gnorm > 0 && kk > 0) rep.max_cross = std::max(rep.max_cross, std::abs(cross) / (gnorm * kk));
    }
    rep.pass = !rep.perturbed_norm2.empty() && rep.worst_relative_deficit <= tol;
    return rep;
}

}  // namespace mbwave
