#include "mbwave/gtc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace mbwave {

Curve Curve::linear(double slope, double intercept) {
    Curve c;
    c.linear_ = true;
    c.slope_ = slope;
    c.intercept_ = intercept;
    return c;
}

Curve Curve::sampled(std::vector<double> taus, std::vector<double> values) {
    if (taus.size() != values.size() || taus.size() < 2)
        throw std::invalid_argument("spline needs at least two knots with matching values");
    for (std::size_t i = 1; i < taus.size(); ++i)
        if (!(taus[i] > taus[i - 1])) throw std::invalid_argument("spline knots must increase");
    Curve c;
    c.linear_ = false;
    c.taus_ = std::move(taus);
    c.vals_ = std::move(values);
    const std::size_t n = c.taus_.size();
    c.m_.assign(n, 0.0);
    if (n > 2) {
        // Natural spline: tridiagonal system for interior second derivatives.
        std::vector<double> a(n, 0.0), b(n, 0.0), cc(n, 0.0), d(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double h0 = c.taus_[i] - c.taus_[i - 1], h1 = c.taus_[i + 1] - c.taus_[i];
            a[i] = h0;
            b[i] = 2.0 * (h0 + h1);
            cc[i] = h1;
            d[i] = 6.0 * ((c.vals_[i + 1] - c.vals_[i]) / h1 - (c.vals_[i] - c.vals_[i - 1]) / h0);
        }
        for (std::size_t i = 2; i + 1 < n; ++i) {
            double w = a[i] / b[i - 1];
            b[i] -= w * cc[i - 1];
            d[i] -= w * d[i - 1];
        }
        for (std::size_t i = n - 2; i >= 1; --i) {
            c.m_[i] = (d[i] - cc[i] * c.m_[i + 1]) / b[i];
            if (i == 1) break;
        }
    }
    return c;
}

std::size_t Curve::segment(double tau) const {
    const double eps = 1e-12 * (1.0 + std::abs(taus_.back() - taus_.front()));
    if (tau < taus_.front() - eps || tau > taus_.back() + eps)
        throw std::out_of_range("curve evaluated outside its knot range");
    auto it = std::upper_bound(taus_.begin(), taus_.end(), tau);
    std::size_t i = static_cast<std::size_t>(it - taus_.begin());
    if (i == 0) i = 1;
    if (i >= taus_.size()) i = taus_.size() - 1;
    return i - 1;
}

double Curve::operator()(double tau) const {
    if (linear_) return slope_ * tau + intercept_;
    std::size_t i = segment(tau);
    double h = taus_[i + 1] - taus_[i];
    double A = (taus_[i + 1] - tau) / h, B = (tau - taus_[i]) / h;
    return A * vals_[i] + B * vals_[i + 1] +
           ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
}

double Curve::d1(double tau) const {
    if (linear_) return slope_;
    std::size_t i = segment(tau);
    double h = taus_[i + 1] - taus_[i];
    double A = (taus_[i + 1] - tau) / h, B = (tau - taus_[i]) / h;
    return (vals_[i + 1] - vals_[i]) / h - (3.0 * A * A - 1.0) / 6.0 * h * m_[i] +
           (3.0 * B * B - 1.0) / 6.0 * h * m_[i + 1];
}

double Curve::d2(double tau) const {
    if (linear_) return 0.0;
    std::size_t i = segment(tau);
    double h = taus_[i + 1] - taus_[i];
    double A = (taus_[i + 1] - tau) / h, B = (tau - taus_[i]) / h;
    return A * m_[i] + B * m_[i + 1];
}

GTC1D::GTC1D(Curve left, Curve right, double t0, double t1)
    : l1_(std::move(left)), l2_(std::move(right)), t0_(t0), t1_(t1) {
    if (!(t1 > t0)) throw std::invalid_argument("domain window must have t1 > t0");
    const int n = 2000;
    max_speed_ = 0.0;
    min_width_ = INFINITY;
    std::vector<double> ts;
    for (int i = 0; i <= n; ++i) ts.push_back(t0 + (t1 - t0) * i / n);
    for (const Curve* c : {&l1_, &l2_})
        for (double k : c->knots())
            if (k >= t0 && k <= t1) ts.push_back(k);
    for (double t : ts) {
        double w = l2_(t) - l1_(t);
        if (!(w > 0.0)) throw std::invalid_argument("curves must satisfy lambda_1 < lambda_2");
        double s = std::max(std::abs(l1_.d1(t)), std::abs(l2_.d1(t)));
        if (s > 1.0 - kTimelikeMargin)
            throw std::invalid_argument("timelike margin violated: |lambda'| = " + std::to_string(s));
        max_speed_ = std::max(max_speed_, s);
        min_width_ = std::min(min_width_, w);
    }
}

bool GTC1D::contains(double t, double x) const {
    return t >= t0_ && t <= t1_ && x > l1_(t) && x < l2_(t);
}

BoundaryNormal boundary_normal_1d(const GTC1D& dom, Side side, double tau) {
    double lp = dom.curve(side).d1(tau);
    if (std::abs(lp) >= 1.0) throw std::domain_error("boundary is not timelike");
    double s = 1.0 / std::sqrt(1.0 - lp * lp);
    BoundaryNormal N;
    N.side = side;
    if (side == Side::left) {
        N.nu_t = -lp * s;
        N.nu = {-s};
    } else {
        N.nu_t = lp * s;
        N.nu = {s};
    }
    return N;
}

NormalDerivatives normal_derivatives(const SpacetimePoint& q, const BoundaryNormal& N,
                                     const SpacetimePoint& P) {
    NullCoords c = null_coords(q, P);
    if (c.r == 0.0) throw std::domain_error("normal derivative of r_P undefined at r_P = 0");
    double dot = 0.0;
    for (std::size_t i = 0; i < q.dim(); ++i) dot += N.nu[i] * (q.x[i] - P.x[i]);
    NormalDerivatives d;
    d.Nr = dot / c.r;
    d.Nt = N.nu_t;
    d.Nf = 0.5 * (c.r * d.Nr - c.t * N.nu_t);
    return d;
}

NormalDerivatives normal_derivatives(const GTC1D& dom, Side side, double tau,
                                     const SpacetimePoint& P) {
    double x = side == Side::left ? dom.lambda1(tau) : dom.lambda2(tau);
    return normal_derivatives(SpacetimePoint(tau, {x}), boundary_normal_1d(dom, side, tau), P);
}

RegionSample region_eval(const SpacetimePoint& q, const BoundaryNormal& N,
                         const SpacetimePoint& P, double delta, double Rplus, double tau) {
    RegionSample s;
    s.tau = tau;
    s.point = q;
    s.side = N.side;
    NullCoords c = null_coords(q, P);
    s.fP = c.f;
    if (c.r == 0.0) return s;
    NormalDerivatives d = normal_derivatives(q, N, P);
    s.NfP = d.Nf;
    s.NrP = d.Nr;
    double nu_norm = 0.0;
    for (double x : N.nu) nu_norm += x * x;
    nu_norm = std::sqrt(nu_norm);
    s.costheta = d.Nr / nu_norm;
    double d2 = delta * delta;
    s.S = (1.0 - d2 * c.r / Rplus) * d.Nf + (d2 * c.f / Rplus) * d.Nr;
    bool inD = c.f > 0.0;
    s.in_gamma_plus = inD && s.S > 0.0;
    double tn = c.t * N.nu_t;
    double sgn = (tn > 0.0) - (tn < 0.0);
    double thr = std::pow(1.0 - d2, sgn) * tn / (c.r * std::sqrt(1.0 + N.nu_t * N.nu_t));
    s.in_gamma_Pdelta = inD && s.costheta > thr;
    s.in_gamma_dagger = inD && d.Nf > 0.0;
    return s;
}

double sampled_Rplus(const GTC1D& dom, const SpacetimePoint& P, double ta, double tb, int density) {
    int m = std::max(2, static_cast<int>(std::sqrt(static_cast<double>(density))));
    double R = 0.0;
    for (int i = 0; i <= m; ++i) {
        double t = ta + (tb - ta) * i / m;
        double l1 = dom.lambda1(t), l2 = dom.lambda2(t);
        for (int j = 0; j <= m; ++j) {
            double x = l1 + (l2 - l1) * j / m;
            NullCoords c = null_coords(SpacetimePoint(t, {x}), P);
            if (c.f > 0.0) R = std::max(R, c.r);
        }
    }
    return R;
}

RegionScan region_scan(const GTC1D& dom, const SpacetimePoint& P, double delta, double ta,
                       double tb, int samples_per_side, int rplus_density) {
    if (!(tb > ta) || samples_per_side < 1) throw std::invalid_argument("empty region-scan window");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
    RegionScan out;
    out.Rplus = sampled_Rplus(dom, P, ta, tb, rplus_density);
    if (!(out.Rplus > 0.0)) throw std::invalid_argument("U cap D_P is empty on the window");
    for (Side side : {Side::left, Side::right}) {
        for (int i = 0; i < samples_per_side; ++i) {
            double tau = samples_per_side == 1 ? ta : ta + (tb - ta) * i / (samples_per_side - 1);
            double x = side == Side::left ? dom.lambda1(tau) : dom.lambda2(tau);
            out.samples.push_back(region_eval(SpacetimePoint(tau, {x}),
                                              boundary_normal_1d(dom, side, tau), P, delta,
                                              out.Rplus, tau));
        }
    }
    return out;
}

std::string region_csv_header() {
    return "tau,t,x,fP,NfP,NrP,S,costheta,in_gamma_plus,in_gamma_Pdelta,in_gamma_dagger";
}

namespace {

// Root of an increasing function g on (0, inf), bracketed by doubling.
double increasing_root(const std::function<double(double)>& g, double step, const char* what) {
    double lo = 0.0, hi = step;
    try {
        if (!(g(0.0) < 0.0)) throw std::domain_error(std::string(what) + ": no crossing ahead");
        while (g(hi) < 0.0) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e3) throw std::domain_error(std::string(what) + ": no intersection within window");
        }
    } catch (const std::out_of_range&) {
        throw std::domain_error(std::string(what) + ": no intersection within window");
    }
    for (int it = 0; it < 300 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        double mid = 0.5 * (lo + hi);
        if (g(mid) < 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

OptimalTimes optimal_times_1d(const GTC1D& dom, double tm) {
    const Curve& l1 = dom.curve(Side::left);
    const Curve& l2 = dom.curve(Side::right);
    double step = 1e-3 * std::max(1e-3, dom.width(tm));
    OptimalTimes o;
    double x2 = l2(tm), x1 = l1(tm);
    o.T_minus = increasing_root([&](double T) { return l1(tm + T) - (x2 - T); }, step, "T_-");
    double ta = tm + o.T_minus, xa = l1(ta);
    o.T_plus = increasing_root([&](double T) { return (xa + T) - l2(ta + T); }, step, "T_+");
    o.T_onesided = o.T_minus + o.T_plus;
    o.T1 = o.T_minus;
    o.T2 = increasing_root([&](double T) { return (x1 + T) - l2(tm + T); }, step, "T_2");
    return o;
}

OptimalTimes optimal_times_lines(double h1, double h2, double tm) {
    double dh = std::abs(h2 - h1) * std::abs(tm);
    OptimalTimes o;
    o.T_onesided = 2.0 * dh / ((1.0 + h1) * (1.0 - h2));
    o.T1 = dh / (1.0 + h1);
    o.T2 = dh / (1.0 - h2);
    o.T_minus = o.T1;
    o.T_plus = o.T_onesided - o.T_minus;
    return o;
}

SpacetimePoint onesided_center(const GTC1D& dom, double tm, double gap) {
    OptimalTimes o = optimal_times_1d(dom, tm);
    double t0 = tm + o.T_minus + gap;
    return SpacetimePoint(t0, {dom.lambda2(tm) - (t0 - tm)});
}

}  // namespace mbwave
