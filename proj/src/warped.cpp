#include "mbwave/warped.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mbwave/rng.hpp"

namespace mbwave {

namespace {

double relres(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

struct QVal {
    double q, qu, qv, quv;
};

J2 eval_q(const TestFunction& tf, double u, double v) {
    return tf.q(J2::variable(u, 0), J2::variable(v, 1));
}

// Mixed derivative by central differences of the exact gradient, symmetrized.
double fd_mixed(const std::function<J2(double, double)>& fn, double u, double v, double h) {
    double a = (fn(u + h, v).g[1] - fn(u - h, v).g[1]) / (2 * h);
    double b = (fn(u, v + h).g[0] - fn(u, v - h).g[0]) / (2 * h);
    return 0.5 * (a + b);
}

QVal fd_q(const std::function<J2(double, double)>& fn, double u, double v, double h) {
    J2 j = fn(u, v);
    return {j.v, j.g[0], j.g[1], fd_mixed(fn, u, v, h)};
}

double A_of(double f, double a, double b) {
    double sf = std::sqrt(f);
    return a * a / f + b * a * (2 * a - 0.5) / sf + b * b * a * a;
}

}  // namespace

void CarlemanParams::validate() const {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (!(R > 0.0)) throw std::invalid_argument("R must be positive");
    if (a < static_cast<double>(n) * n) throw std::invalid_argument("a must satisfy a >= n^2");
    if (b < 0.0 || b > 1.0 / (kBRatio * R) * (1 + 1e-12))
        throw std::invalid_argument("b must satisfy 0 <= b <= 1/(10 R)");
    if (eps < 0.0 || eps > b / (kEpsRatio * n) * (1 + 1e-12))
        throw std::invalid_argument("eps must satisfy 0 <= eps <= b/(100 n)");
}

CarlemanParams CarlemanParams::standard(double R, int n, double a) {
    CarlemanParams cp;
    cp.R = R;
    cp.n = n;
    cp.a = a;
    cp.b = 1.0 / (kBRatio * R);
    cp.eps = cp.b / (kEpsRatio * n);
    cp.validate();
    return cp;
}

WarpedScalars warped_scalars(double u, double v, const WarpParams& wp) {
    const double e = wp.eps, n = wp.n;
    WarpedScalars s;
    s.r = v - u;
    s.f = -u * v;
    s.rho = s.r + 2 * e * s.f;
    if (!(s.rho > 0.0)) throw std::domain_error("warped radius must be positive");
    const double q = s.f / s.rho;
    s.h = 0.5 + e * q / 2;
    s.w = (n - 1) / 4 + (n - 2) * e * q / 2;
    s.xi = (1 + e * u) * (1 - e * v);
    s.box_f = (n + 1) / 2 + (n - 1) * e * q;
    s.box_f_over_rho = (n - 1) / (2 * s.rho) * (1 - 2 * e * q) - (n - 3) * s.f / (s.rho * s.rho * s.rho);
    s.box_w = -(n - 2) * e / 2 *
              ((n - 3) * s.f / (s.rho * s.rho * s.rho) - (n - 1) / (2 * s.rho) * (1 - 2 * e * q));
    s.F = s.dF = s.A = s.dfA = std::numeric_limits<double>::quiet_NaN();
    return s;
}

WarpedScalars warped_scalars(double u, double v, const CarlemanParams& cp) {
    WarpedScalars s = warped_scalars(u, v, cp.warp());
    if (!(s.f > 0.0)) throw std::domain_error("Carleman quantities require f > 0");
    const double a = cp.a, b = cp.b, sf = std::sqrt(s.f);
    s.F = -a * (std::log(s.f) + 2 * b * sf);
    s.dF = -a * (1 / s.f + b / sf);
    s.A = A_of(s.f, a, b);
    s.dfA = 0.5 * b * a * (2 * a - 0.5) / sf + b * b * a * a;
    return s;
}

J2 jet_f(const J2& u, const J2& v) { return -(u * v); }

J2 jet_rho(const J2& u, const J2& v, double eps) { return (v - u) + 2 * eps * jet_f(u, v); }

J2 jet_w(const J2& u, const J2& v, const WarpParams& wp) {
    return J2((wp.n - 1) / 4.0) + (wp.n - 2) * wp.eps / 2 * (jet_f(u, v) / jet_rho(u, v, wp.eps));
}

J2 jet_F(const J2& f, double a, double b) { return -a * (log(f) + 2 * b * sqrt(f)); }

ConformalPoint conformal_map(double u, double v, double eps) {
    double du = 1 + eps * u, dv = 1 - eps * v;
    if (!(du > 0.0 && dv > 0.0)) throw std::domain_error("conformal map undefined at this point");
    return {u / du, v / dv, du * dv};
}

ConformalPoint conformal_map_inverse(double ubar, double vbar, double eps) {
    double du = 1 - eps * ubar, dv = 1 + eps * vbar;
    if (!(du > 0.0 && dv > 0.0)) throw std::domain_error("inverse conformal map undefined");
    double u = ubar / du, v = vbar / dv;
    return {u, v, (1 + eps * u) * (1 - eps * v)};
}

double log_warped_weight(double f, double a, double b) {
    if (!(f > 0.0)) throw std::domain_error("weight requires f > 0");
    return 2 * a * std::log(f) + 4 * a * b * std::sqrt(f);
}

double warped_weight(double f, double a, double b) { return std::exp(log_warped_weight(f, a, b)); }

double log_carleman_weight(double u, double v, const CarlemanParams& cp) {
    const double f = -u * v, e = cp.eps;
    if (!(f > 0.0)) throw std::domain_error("weight requires f > 0");
    const double xi = (1 + e * u) * (1 - e * v);
    const double xim = (1 - e * u) * (1 + e * v);
    if (!(xi > 0.0 && xim > 0.0)) throw std::domain_error("weight undefined at this point");
    return 2 * cp.a * (std::log(f / xi) + 2 * cp.b * std::sqrt(f) / std::sqrt(xim));
}

double carleman_weight(const SpacetimePoint& p, const SpacetimePoint& center, const CarlemanParams& cp) {
    NullCoords c = null_coords(p, center);
    return std::exp(log_carleman_weight(c.u, c.v, cp));
}

Christoffels warped_christoffels(double u, double v, double eps, int) {
    const double rho = (v - u) - 2 * eps * u * v;
    if (!(rho > 0.0)) throw std::domain_error("warped radius must be positive");
    return {(1 - 2 * eps * u) / (2 * rho), -(1 + 2 * eps * v) / (2 * rho), -(1 + 2 * eps * v) / rho,
            (1 - 2 * eps * u) / rho};
}

HessianF warped_hessian_f(double u, double v, double eps, int n) {
    WarpedScalars s = warped_scalars(u, v, WarpParams{eps, n});
    HessianF H;
    H.ab = 0.5 + eps * s.f / s.rho;
    H.TT = -0.5;
    H.NN = 0.5;
    H.TN = 0.0;
    H.box = s.box_f;
    H.pi_TT = eps * s.f / (2 * s.rho);
    H.pi_NN = -H.pi_TT;
    H.pi_TN = 0.0;
    H.pi_ab = H.pi_TT;
    return H;
}

AngularJet angular_jet(int n, int m, double theta) {
    if (n <= 1 || m == 0) return {1.0, 0.0, 0.0};
    const double c = std::cos(m * theta), s = std::sin(m * theta);
    AngularJet a;
    a.Y = c;
    a.G = m * m * s * s;
    a.Lap = -m * m * c - (n - 2) * (std::cos(theta) / std::sin(theta)) * m * s;
    return a;
}

std::vector<TestFunction> test_catalog() {
    std::vector<TestFunction> c;
    c.push_back({"zero", [](const J2&, const J2&) { return J2(0.0); }});
    c.push_back({"one", [](const J2&, const J2&) { return J2(1.0); }});
    c.push_back({"u2v", [](const J2& u, const J2& v) { return u * u * v; }});
    c.push_back({"quad", [](const J2& u, const J2& v) { return 1.0 + u * u + 2.0 * v * v - u * v; }});
    c.push_back({"cubic", [](const J2& u, const J2& v) {
                     return 1.0 + u - 2.0 * v + 3.0 * u * v + u * u - v * v * v;
                 }});
    c.push_back({"cubic2", [](const J2& u, const J2& v) { return u * u * u - 2.0 * u * v * v + v; }});
    return c;
}

TestFunction random_trig_function(std::uint64_t seed, int index) {
    Rng g(seed * 1000003ULL + static_cast<std::uint64_t>(index));
    double p[8];
    for (int i = 0; i < 6; ++i) p[i] = g.uniform(-3.0, 3.0);
    p[6] = g.uniform(0.0, 2 * M_PI);
    p[7] = g.uniform(0.0, 2 * M_PI);
    return {"trig" + std::to_string(index), [=](const J2& u, const J2& v) {
                return sin(p[0] * u + p[1] * v + p[6]) + p[4] / 3.0 * cos(p[2] * u + p[3] * v + p[7]) *
                                                             sin(p[5] * u + 0.5);
            }};
}

double box_bar(double u, double v, const WarpParams& wp, double q, double qu, double qv, double quv,
               const AngularJet& ang) {
    const double e = wp.eps, rho = (v - u) - 2 * e * u * v;
    double radial = -quv - (wp.n - 1) / (2 * rho) * ((1 - 2 * e * u) * qu - (1 + 2 * e * v) * qv);
    return radial * ang.Y + q * ang.Lap / (rho * rho);
}

namespace {

// Current components split into the five pieces of its definition, so that
// finite-difference error can be measured against the size of each piece.
struct Current {
    std::array<double, 5> u{}, v{};
    double Pu() const { return u[0] + u[1] + u[2] + u[3] + u[4]; }
    double Pv() const { return v[0] + v[1] + v[2] + v[3] + v[4]; }
};

Current current(const TestFunction& tf, const AngularJet& ang, double u, double v, const CarlemanParams& cp) {
    const WarpParams wp = cp.warp();
    J2 q = eval_q(tf, u, v);
    J2 w = jet_w(J2::variable(u, 0), J2::variable(v, 1), wp);
    const double f = -u * v, rho = (v - u) + 2 * cp.eps * f;
    const double psi = q.v * ang.Y, pu = q.g[0] * ang.Y, pv = q.g[1] * ang.Y;
    const double S = 0.5 * (u * pu + v * pv);
    const double grad2 = -pu * pv + q.v * q.v * ang.G / (rho * rho);
    const double A = A_of(f, cp.a, cp.b);
    Current c;
    c.u = {S * pu, 0.5 * v * grad2, w.v * psi * pu, -0.5 * A * v * psi * psi, -0.5 * w.g[0] * psi * psi};
    c.v = {S * pv, 0.5 * u * grad2, w.v * psi * pv, -0.5 * A * u * psi * psi, -0.5 * w.g[1] * psi * psi};
    return c;
}

// Divergence of the current, null derivatives by central differences with step h.
double current_div(const TestFunction& tf, const AngularJet& ang, double u, double v, const CarlemanParams& cp,
                   double h, double* magnitude = nullptr) {
    const double e = cp.eps, n = cp.n;
    Current c0 = current(tf, ang, u, v, cp);
    Current up = current(tf, ang, u + h, v, cp), um = current(tf, ang, u - h, v, cp);
    Current vp = current(tf, ang, u, v + h, cp), vm = current(tf, ang, u, v - h, cp);
    double dsum = 0.0, dmag = 0.0;
    for (int k = 0; k < 5; ++k) {
        double d1 = (up.v[k] - um.v[k]) / (2 * h), d2 = (vp.u[k] - vm.u[k]) / (2 * h);
        dsum += d1 + d2;
        dmag += std::abs(d1) + std::abs(d2);
    }
    const double rho = (v - u) - 2 * e * u * v;
    WarpedScalars s = warped_scalars(u, v, cp.warp());
    J2 q = eval_q(tf, u, v);
    double Swq = 0.5 * (u * q.g[0] + v * q.g[1]) + s.w * q.v;
    double angular = Swq * q.v * (ang.G + ang.Y * ang.Lap) / (rho * rho);
    const double chr = (n - 1) * ((1 - 2 * e * u) * c0.Pu() - (1 + 2 * e * v) * c0.Pv()) / (2 * rho);
    if (magnitude) *magnitude = 0.5 * dmag + std::abs(chr) + std::abs(angular);
    return -0.5 * dsum - chr + angular;
}

double current_div_richardson(const TestFunction& tf, const AngularJet& ang, double u, double v,
                              const CarlemanParams& cp, double h) {
    double d1 = current_div(tf, ang, u, v, cp, h);
    double d2 = current_div(tf, ang, u, v, cp, h / 2);
    return (4 * d2 - d1) / 3;
}

struct PsiJets {
    double q, psi, pu, pv, Lpsi, Swpsi;
};

PsiJets psi_jets(const TestFunction& tf, const AngularJet& ang, double u, double v, const CarlemanParams& cp) {
    J2 uj = J2::variable(u, 0), vj = J2::variable(v, 1);
    J2 q = tf.q(uj, vj);
    J2 F = jet_F(jet_f(uj, vj), cp.a, cp.b);
    J2 eFq = exp(F) * q;
    double box = box_bar(u, v, cp.warp(), eFq.v, eFq.g[0], eFq.g[1], eFq.dd(0, 1), ang);
    WarpedScalars s = warped_scalars(u, v, cp.warp());
    PsiJets p;
    p.q = q.v;
    p.psi = q.v * ang.Y;
    p.pu = q.g[0] * ang.Y;
    p.pv = q.g[1] * ang.Y;
    p.Lpsi = std::exp(-F.v) * box;
    p.Swpsi = 0.5 * (u * p.pu + v * p.pv) + s.w * p.psi;
    return p;
}

}  // namespace

IdentityResidual pointwise_identity_residual(const TestFunction& tf, const AngularJet& ang, double u, double v,
                                             const CarlemanParams& cp, double h) {
    WarpedScalars s = warped_scalars(u, v, cp);
    PsiJets p = psi_jets(tf, ang, u, v, cp);
    ConeFrame fr = cone_frame(u, v);
    const double Tpsi = fr.T_u * p.pu + fr.T_v * p.pv;
    const double Npsi = fr.N_u * p.pu + fr.N_v * p.pv;
    const double slash = p.q * p.q * ang.G / (s.rho * s.rho);
    const double k = cp.eps * s.f / s.rho;

    const double t1 = -p.Lpsi * p.Swpsi;
    double t2mag = 0.0;
    const double t2 = current_div(tf, ang, u, v, cp, h, &t2mag);
    const double r1 = -2 * s.dF * p.Swpsi * p.Swpsi;
    const double r2 = k / 2 * (Tpsi * Tpsi + slash + Npsi * Npsi);  // magnitude only
    const double r2s = k / 2 * (Tpsi * Tpsi + slash - Npsi * Npsi);
    const double r3 = -k * s.dF * p.psi * p.Swpsi;
    const double r4 = 0.5 * (s.dfA + k * s.A - s.box_w) * p.psi * p.psi;

    IdentityResidual res;
    res.lhs = t1 + t2;
    res.rhs = r1 + r2s + r3 + r4;
    res.scale = std::abs(t1) + t2mag + std::abs(r1) + std::abs(r2) + std::abs(r3) + std::abs(r4);
    res.residual = res.scale > 0 ? std::abs(res.lhs - res.rhs) / res.scale : 0.0;
    return res;
}

MarginReport pointwise_inequality_margin(const TestFunction& tf, const AngularJet& ang, double u, double v,
                                         const CarlemanParams& cp, double h) {
    WarpedScalars s = warped_scalars(u, v, cp);
    PsiJets p = psi_jets(tf, ang, u, v, cp);
    ConeFrame fr = cone_frame(u, v);
    const double Tpsi = fr.T_u * p.pu + fr.T_v * p.pv;
    const double Npsi = fr.N_u * p.pu + fr.N_v * p.pv;
    const double Ntil = Npsi - (cp.n - 1) / 4.0 / std::sqrt(s.f) * p.psi;
    const double slash = p.q * p.q * ang.G / (s.rho * s.rho);

    const double l1 = s.f * p.Lpsi * p.Lpsi / (4 * cp.a);
    const double l2 = current_div_richardson(tf, ang, u, v, cp, h);
    const double r1 = cp.eps * s.f / (2 * s.rho) * (Tpsi * Tpsi + slash);
    const double r2 = 0.25 * cp.a * Ntil * Ntil;
    const double r3 = 0.25 * cp.b * cp.a * cp.a / std::sqrt(s.f) * p.psi * p.psi;

    MarginReport m;
    m.lhs = l1 + l2;
    m.rhs = r1 + r2 + r3;
    m.scale = std::abs(l1) + std::abs(l2) + r1 + r2 + r3;
    m.margin = m.scale > 0 ? (m.lhs - m.rhs) / m.scale : 0.0;
    return m;
}

MarginReport reversed_inequality_margin(const TestFunction& phi, const AngularJet& ang, double u, double v,
                                        const CarlemanParams& cp, double h) {
    WarpedScalars s = warped_scalars(u, v, cp);
    const double a = cp.a, b = cp.b;
    TestFunction psi{phi.name + "_conj", [q = phi.q, a, b](const J2& uu, const J2& vv) {
                         return exp(-jet_F(jet_f(uu, vv), a, b)) * q(uu, vv);
                     }};
    J2 pj = eval_q(phi, u, v);
    const double ph = pj.v * ang.Y, pu = pj.g[0] * ang.Y, pv = pj.g[1] * ang.Y;
    const double box = box_bar(u, v, cp.warp(), pj.v, pj.g[0], pj.g[1], pj.dd(0, 1), ang);
    const double z = std::exp(-2 * s.F);
    const double slash = pj.v * pj.v * ang.G / (s.rho * s.rho);

    const double l1 = s.f * z * box * box / (4 * a);
    const double l2 = current_div_richardson(psi, ang, u, v, cp, h);
    const double r1 = cp.eps / (16 * s.rho) * z * (u * u * pu * pu + v * v * pv * pv + s.f * slash);
    const double r2 = 0.125 * b * a * a / std::sqrt(s.f) * z * ph * ph;

    MarginReport m;
    m.lhs = l1 + l2;
    m.rhs = r1 + r2;
    m.scale = std::abs(l1) + std::abs(l2) + r1 + r2;
    m.margin = m.scale > 0 ? (m.lhs - m.rhs) / m.scale : 0.0;
    return m;
}

IdentityResidual conf_wave_identity_residual(const TestFunction& phibar, const AngularJet& ang, double u,
                                             double v, const WarpParams& wp, double h) {
    const double e = wp.eps, n = wp.n;
    ConformalPoint tp = conformal_map(u, v, e);

    auto X = [&](double ub, double vb) {
        J2 U = J2::variable(ub, 0), V = J2::variable(vb, 1);
        J2 us = U / (1.0 - e * U), vs = V / (1.0 + e * V);
        J2 xi = (1.0 + e * us) * (1.0 - e * vs);
        return pow(xi, (n - 1) / 2) * phibar.q(U, V);
    };
    auto Phi = [&](double uu, double vv) {
        J2 U = J2::variable(uu, 0), V = J2::variable(vv, 1);
        return phibar.q(U / (1.0 + e * U), V / (1.0 - e * V));
    };

    QVal x = fd_q(X, tp.ubar, tp.vbar, h);
    QVal p = fd_q(Phi, u, v, h);
    const double rho_t = (tp.vbar - tp.ubar) - 2 * e * tp.ubar * tp.vbar;
    IdentityResidual res;
    res.lhs = box_bar(tp.ubar, tp.vbar, wp, x.q, x.qu, x.qv, x.quv, ang) +
              (n - 1) * (n - 1) * e / (2 * rho_t) * x.q * ang.Y;
    res.rhs = std::pow(tp.xi, (n + 3) / 2) * box_bar(u, v, WarpParams{0.0, wp.n}, p.q, p.qu, p.qv, p.quv, ang);
    res.scale = std::max({1.0, std::abs(res.lhs), std::abs(res.rhs)});
    res.residual = std::abs(res.lhs - res.rhs) / res.scale;
    return res;
}

IdentityResidual dirichlet_current_residual(const TestFunction& q, const AngularJet& ang, double u, double kappa,
                                            double c, const CarlemanParams& cp) {
    if (!(kappa > 0.0)) throw std::invalid_argument("test hypersurface must be timelike (kappa > 0)");
    const double v = kappa * u + c;
    const double a = cp.a, b = cp.b;
    TestFunction psi{"conj", [q = q.q, a, b, kappa, c](const J2& uu, const J2& vv) {
                         return exp(-jet_F(jet_f(uu, vv), a, b)) * (vv - kappa * uu - c) * q(uu, vv);
                     }};
    TestFunction phi{"phi", [q = q.q, kappa, c](const J2& uu, const J2& vv) {
                         return (vv - kappa * uu - c) * q(uu, vv);
                     }};
    Current P = current(psi, ang, u, v, cp);
    const double Pu = P.Pu(), Pv = P.Pv();
    const double sk = std::sqrt(kappa);
    const double Nu = -0.5 / sk, Nv = 0.5 * sk;
    J2 pj = eval_q(phi, u, v);
    const double Nf = Nu * (-v) + Nv * (-u);
    const double Nphi = (Nu * pj.g[0] + Nv * pj.g[1]) * ang.Y;
    WarpedScalars s = warped_scalars(u, v, cp);
    IdentityResidual res;
    res.lhs = Pu * Nu + Pv * Nv;
    res.rhs = 0.5 * std::exp(-2 * s.F) * Nf * Nphi * Nphi;
    res.scale = std::max({std::abs(res.lhs), std::abs(res.rhs), std::numeric_limits<double>::min()});
    res.residual = std::abs(res.lhs - res.rhs) / res.scale;
    return res;
}

bool richardson_ok(double r_h, double r_h2, double floor) {
    if (r_h <= floor) return true;
    double ratio = r_h / std::max(r_h2, std::numeric_limits<double>::min());
    return ratio >= 3.0 && ratio <= 5.0;
}

std::vector<UVPoint> sample_exterior(std::size_t count, double R, std::uint64_t seed) {
    Rng g(seed);
    std::vector<UVPoint> pts;
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        double r = R * g.uniform(0.5, 0.95);
        double t = r * g.uniform(-0.4, 0.4);
        pts.push_back({0.5 * (t - r), 0.5 * (t + r)});
    }
    return pts;
}

namespace {

struct Acc {
    CheckResult c;
    double min_ratio = std::numeric_limits<double>::infinity();
    double max_ratio = 0.0;
    bool ok = true;

    Acc(std::string name, int n, double eps, std::string kind) {
        c.name = std::move(name);
        c.n = n;
        c.eps = eps;
        c.kind = std::move(kind);
    }
    void closed(double r, double tol) {
        c.max_residual = std::max(c.max_residual, r);
        ++c.points;
        if (!(r <= tol)) ok = false;
    }
    void fd(double r_h, double r_h2, double tol, double floor = 1e-9) {
        c.max_residual = std::max(c.max_residual, r_h);
        ++c.points;
        if (!(r_h <= tol)) ok = false;
        if (r_h > floor) {
            double ratio = r_h / std::max(r_h2, std::numeric_limits<double>::min());
            min_ratio = std::min(min_ratio, ratio);
            max_ratio = std::max(max_ratio, ratio);
            if (!richardson_ok(r_h, r_h2, floor)) ok = false;
        }
    }
    CheckResult done() {
        c.min_ratio = std::isfinite(min_ratio) ? min_ratio : std::numeric_limits<double>::quiet_NaN();
        c.max_ratio = std::isfinite(min_ratio) ? max_ratio : std::numeric_limits<double>::quiet_NaN();
        c.pass = ok;
        return c;
    }
};

J2 jf(double u, double v) { return jet_f(J2::variable(u, 0), J2::variable(v, 1)); }

}  // namespace

std::vector<CheckResult> run_identity_suite(const SuiteOptions& opt) {
    std::vector<CheckResult> out;
    auto pts = sample_exterior(static_cast<std::size_t>(opt.points), opt.R, opt.seed);
    auto cat = test_catalog();
    const double ctol = opt.closed_tol, ftol = opt.fd_tol;

    for (int n : opt.dims) {
        for (double e : opt.eps_values) {
            const WarpParams wp{e, n};
            Acc frame("frame_metric", n, e, "closed"), grad("f_grad", n, e, "closed"),
                hess("f_hess", n, e, "closed"), pi("deformation", n, e, "closed"), wdef("w_def", n, e, "closed"),
                fA("fA_prime", n, e, "closed"), chr("christoffel", n, e, "closed"),
                conf("conformal_scalars", n, e, "closed"), inv("conformal_inverse", n, e, "closed"),
                wt("weight_relation", n, e, "closed"), zf("weight_F", n, e, "closed"),
                cmp("conformal_comparison", n, e, "closed");
            Acc dfr("f_rho_deriv", n, e, "fd"), bf("box_f", n, e, "fd"), bfr("box_f_over_rho", n, e, "fd"),
                bw("box_w", n, e, "fd"), chf("christoffel_fd", n, e, "fd"), cw("conf_wave", n, e, "fd");

            for (std::size_t i = 0; i < pts.size(); ++i) {
                const double u = pts[i].u, v = pts[i].v;
                WarpedScalars s = warped_scalars(u, v, wp);
                const double h = default_fd_step(s.r);

                // Frame algebra: gbar(X,Y) = -2 (X^u Y^v + X^v Y^u).
                ConeFrame fr = cone_frame(u, v);
                auto gb = [](double xu, double xv, double yu, double yv) { return -2 * (xu * yv + xv * yu); };
                frame.closed(relres(gb(fr.T_u, fr.T_v, fr.T_u, fr.T_v), -1.0), ctol);
                frame.closed(relres(gb(fr.N_u, fr.N_v, fr.N_u, fr.N_v), 1.0), ctol);
                frame.closed(relres(gb(fr.T_u, fr.T_v, fr.N_u, fr.N_v), 0.0), ctol);

                // Gradient of f: raise with gbar^{uv} = -1/2.
                J2 f = jf(u, v);
                double gu = -0.5 * f.g[1], gv = -0.5 * f.g[0];
                grad.closed(relres(gu, 0.5 * u), ctol);
                grad.closed(relres(gv, 0.5 * v), ctol);
                grad.closed(relres(-f.g[0] * f.g[1], s.f), ctol);
                grad.closed(relres(fr.N_u * f.g[0] + fr.N_v * f.g[1], std::sqrt(s.f)), ctol);

                // Hessian from jet second derivatives and the Christoffel symbols.
                Christoffels G = warped_christoffels(u, v, e, n);
                HessianF H = warped_hessian_f(u, v, e, n);
                double Huv = f.dd(0, 1), Huu = f.dd(0, 0), Hvv = f.dd(1, 1);
                double Hab = -(G.u_ab * f.g[0] + G.v_ab * f.g[1]);
                auto hq = [&](double xu, double xv, double yu, double yv) {
                    return Huu * xu * yu + Hvv * xv * yv + Huv * (xu * yv + xv * yu);
                };
                hess.closed(relres(Huv, H.uv), ctol);
                hess.closed(relres(Huu, H.uu) + relres(Hvv, H.vv), ctol);
                hess.closed(relres(Hab, H.ab), ctol);
                hess.closed(relres(hq(fr.T_u, fr.T_v, fr.T_u, fr.T_v), H.TT), ctol);
                hess.closed(relres(hq(fr.N_u, fr.N_v, fr.N_u, fr.N_v), H.NN), ctol);
                hess.closed(relres(hq(fr.T_u, fr.T_v, fr.N_u, fr.N_v), H.TN), ctol);
                hess.closed(relres(-Huv + (n - 1) * Hab, H.box), ctol);

                pi.closed(relres(hq(fr.T_u, fr.T_v, fr.T_u, fr.T_v) + s.h, H.pi_TT), ctol);
                pi.closed(relres(hq(fr.N_u, fr.N_v, fr.N_u, fr.N_v) - s.h, H.pi_NN), ctol);
                pi.closed(relres(Hab - s.h, H.pi_ab), ctol);

                wdef.closed(relres(0.5 * s.box_f - s.h, s.w), ctol);

                {
                    CarlemanParams cp = CarlemanParams::standard(opt.R, n, 4.0 * n * n);
                    WarpedScalars c = warped_scalars(u, v, cp);
                    J2 fv = J2::variable(s.f, 0);
                    J2 A = cp.a * cp.a / fv + cp.b * cp.a * (2 * cp.a - 0.5) / sqrt(fv) + cp.b * cp.b * cp.a * cp.a;
                    J2 fAj = fv * A;
                    J2 Fj = jet_F(fv, cp.a, cp.b);
                    fA.closed(relres(fAj.g[0], c.dfA), ctol);
                    fA.closed(relres(Fj.g[0], c.dF), ctol);
                    fA.closed(relres(c.A, A.v), ctol);

                    // Carleman weight equals the warped weight at f o Phi up to the eps -> -eps factor.
                    double xim = (1 - e * u) * (1 + e * v);
                    CarlemanParams ce = cp;
                    ce.eps = e;
                    double lz = log_carleman_weight(u, v, ce);
                    double fb = s.f / s.xi;
                    double expect = log_warped_weight(fb, cp.a, cp.b) +
                                    4 * cp.a * cp.b * (std::sqrt(s.f / xim) - std::sqrt(fb));
                    wt.closed(relres(lz, expect), ctol);

                    // e^{-2F} against the warped weight, f drawn across (0, R^2).
                    double fr2 = opt.R * opt.R * (0.001 + 0.998 * ((i * 2654435761u) % 100000) / 1e5);
                    double z1 = std::exp(-2 * jet_F(J2(fr2), cp.a, cp.b).v);
                    double z2 = warped_weight(fr2, cp.a, cp.b);
                    zf.closed(std::abs(z1 - z2) / z2, ctol);
                }

                // Christoffel symbols from exact derivatives of rho^2.
                {
                    J2 rho = jet_rho(J2::variable(u, 0), J2::variable(v, 1), e);
                    J2 rho2 = rho * rho;
                    chr.closed(relres(0.25 * rho2.g[1] / (rho.v * rho.v), G.u_ab), ctol);
                    chr.closed(relres(0.25 * rho2.g[0] / (rho.v * rho.v), G.v_ab), ctol);
                    chr.closed(relres(0.5 * rho2.g[0] / (rho.v * rho.v), G.a_ub), ctol);
                    chr.closed(relres(0.5 * rho2.g[1] / (rho.v * rho.v), G.a_vb), ctol);
                }

                if (s.xi > 0 && 1 + e * u > 0 && 1 - e * v > 0) {
                    ConformalPoint cpnt = conformal_map(u, v, e);
                    double fb = -cpnt.ubar * cpnt.vbar;
                    double rb = (cpnt.vbar - cpnt.ubar) + 2 * e * fb;
                    conf.closed(relres(fb, s.f / cpnt.xi), ctol);
                    conf.closed(relres(rb, s.r / cpnt.xi), ctol);
                    ConformalPoint back = conformal_map_inverse(cpnt.ubar, cpnt.vbar, e);
                    inv.closed(relres(back.ubar, u) + relres(back.vbar, v) + relres(back.xi, cpnt.xi), ctol);
                    // Comparison ratios stay in [1/2, 2] when eps <= 1/(10 R).
                    if (e <= 1.0 / (kBRatio * opt.R)) {
                        double q1 = cpnt.ubar / u, q2 = cpnt.vbar / v, q3 = fb / s.f;
                        bool in = true;
                        for (double q : {q1, q2, q3}) in = in && q >= 0.5 && q <= 2.0;
                        cmp.closed(in ? 0.0 : 1.0, 0.0);
                    }
                }

                // FD checks.
                auto fr_fn = [&](double uu, double vv) {
                    J2 U = J2::variable(uu, 0), V = J2::variable(vv, 1);
                    return jet_f(U, V) / jet_rho(U, V, e);
                };
                auto fd1 = [&](double hh) {
                    double du = (fr_fn(u + hh, v).v - fr_fn(u - hh, v).v) / (2 * hh);
                    double dv = (fr_fn(u, v + hh).v - fr_fn(u, v - hh).v) / (2 * hh);
                    double rr = s.rho * s.rho;
                    return relres(du, -v * v / rr) + relres(dv, u * u / rr);
                };
                dfr.fd(fd1(h), fd1(h / 2), ftol);

                const AngularJet radial{};
                auto boxfd = [&](const std::function<J2(double, double)>& fn, double hh) {
                    QVal q = fd_q(fn, u, v, hh);
                    return box_bar(u, v, wp, q.q, q.qu, q.qv, q.quv, radial);
                };
                auto f_fn = [](double uu, double vv) { return jf(uu, vv); };
                auto w_fn = [&](double uu, double vv) {
                    return jet_w(J2::variable(uu, 0), J2::variable(vv, 1), wp);
                };
                bf.fd(relres(boxfd(f_fn, h), s.box_f), relres(boxfd(f_fn, h / 2), s.box_f), ftol);
                bfr.fd(relres(boxfd(fr_fn, h), s.box_f_over_rho), relres(boxfd(fr_fn, h / 2), s.box_f_over_rho),
                       ftol);
                bw.fd(relres(boxfd(w_fn, h), s.box_w), relres(boxfd(w_fn, h / 2), s.box_w), ftol);

                auto chfd = [&](double hh) {
                    auto r2 = [&](double uu, double vv) {
                        double r = (vv - uu) - 2 * e * uu * vv;
                        return r * r;
                    };
                    double du = (r2(u + hh, v) - r2(u - hh, v)) / (2 * hh);
                    double dv = (r2(u, v + hh) - r2(u, v - hh)) / (2 * hh);
                    double rr = s.rho * s.rho;
                    return relres(0.25 * dv / rr, G.u_ab) + relres(0.25 * du / rr, G.v_ab) +
                           relres(0.5 * du / rr, G.a_ub) + relres(0.5 * dv / rr, G.a_vb);
                };
                chf.fd(chfd(h), chfd(h / 2), ftol);

                const TestFunction tf = random_trig_function(opt.seed, static_cast<int>(i % 50));
                AngularJet ang = angular_jet(n, static_cast<int>(i % 3), 0.3 + 2.5 * ((i * 7919) % 1000) / 1000.0);
                cw.fd(conf_wave_identity_residual(tf, ang, u, v, wp, h).residual,
                      conf_wave_identity_residual(tf, ang, u, v, wp, h / 2).residual, ftol);
            }
            for (Acc* a : {&frame, &grad, &hess, &pi, &wdef, &fA, &chr, &conf, &inv, &wt, &zf, &cmp, &dfr, &bf, &bfr, &bw,
                           &chf, &cw})
                out.push_back(a->done());
        }
    }
    return out;
}

std::vector<CheckResult> run_carleman_suite(const CarlemanSuiteOptions& opt) {
    std::vector<CheckResult> out;
    auto pts = sample_exterior(static_cast<std::size_t>(opt.points), opt.R, opt.seed);
    const auto cat = test_catalog();
    std::vector<TestFunction> trig;
    for (int k = 0; k < opt.random_trig; ++k) trig.push_back(random_trig_function(opt.seed, k));

    for (int n : opt.dims) {
        for (double af : opt.a_factors) {
            CarlemanParams cp = CarlemanParams::standard(opt.R, n, af * n * n);
            Acc id("carleman_identity", n, cp.eps, "fd"), idt("carleman_identity_trig", n, cp.eps, "fd"),
                mg("carleman_margin", n, cp.eps, "margin"), rv("carleman_rev_margin", n, cp.eps, "margin"),
                dc("dirichlet_current", n, cp.eps, "closed");
            double min_m = std::numeric_limits<double>::infinity(), min_r = min_m;
            auto margins = [&](const TestFunction& tf, const AngularJet& ang, double u, double v, double h) {
                auto m1 = pointwise_inequality_margin(tf, ang, u, v, cp, h);
                auto m2 = reversed_inequality_margin(tf, ang, u, v, cp, h);
                if (m1.scale > 0) min_m = std::min(min_m, m1.margin);
                if (m2.scale > 0) min_r = std::min(min_r, m2.margin);
                if (m1.margin < -opt.margin_tol) mg.ok = false;
                if (m2.margin < -opt.margin_tol) rv.ok = false;
                ++mg.c.points;
                ++rv.c.points;
            };
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const double u = pts[i].u, v = pts[i].v;
                const double h = default_fd_step(v - u);
                const double theta = 0.3 + 2.5 * ((i * 7919) % 1000) / 1000.0;
                for (int m = 0; m < (n >= 2 ? 3 : 1); ++m) {
                    AngularJet ang = angular_jet(n, m, theta);
                    for (const auto& tf : cat) {
                        auto r1 = pointwise_identity_residual(tf, ang, u, v, cp, h);
                        auto r2 = pointwise_identity_residual(tf, ang, u, v, cp, h / 2);
                        id.fd(r1.residual, r2.residual, opt.identity_tol, 1e-10);
                        margins(tf, ang, u, v, h);
                    }
                }
                // Random trigonometric family: order-2 decay only, on a rotating subset.
                for (std::size_t k = i % 4; k < trig.size(); k += 4) {
                    AngularJet ang = angular_jet(n, static_cast<int>(k % 3), theta);
                    auto r1 = pointwise_identity_residual(trig[k], ang, u, v, cp, h);
                    auto r2 = pointwise_identity_residual(trig[k], ang, u, v, cp, h / 2);
                    idt.fd(r1.residual, r2.residual, std::numeric_limits<double>::infinity(), 1e-10);
                    margins(trig[k], ang, u, v, h);
                }
                // Dirichlet boundary current on v = kappa u + c through this point.
                double kappa = 0.5 + (i % 5) * 0.4;
                double c = v - kappa * u;
                AngularJet ang = angular_jet(n, static_cast<int>(i % 3), theta);
                dc.closed(dirichlet_current_residual(cat[2 + i % 4], ang, u, kappa, c, cp).residual, 1e-10);
            }
            mg.c.min_margin = min_m;
            rv.c.min_margin = min_r;
            for (Acc* a : {&id, &idt, &mg, &rv, &dc}) out.push_back(a->done());
        }
    }
    return out;
}

}  // namespace mbwave
