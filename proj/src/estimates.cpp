#include "mbwave/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mbwave/io.hpp"
#include "mbwave/rng.hpp"

namespace mbwave {

bool quadrature_stable(double coarse, double fine, double rel) {
    double s = std::max(std::abs(coarse), std::abs(fine));
    return s == 0.0 || std::abs(coarse - fine) <= rel * s;
}

namespace {

double slice_multiplier(const Field& f, int n, const SpacetimePoint& P) {
    auto pt = dt_level(f, n);
    auto px = dx_level(f, n);
    const double tp = f.t(n) - P.t;
    double s = 0.0;
    for (int j = 0; j <= f.nx; ++j) {
        double xp = f.x(n, j) - P.x[0];
        double e = 0.25 * tp * (pt[j] * pt[j] + px[j] * px[j]) + 0.5 * xp * pt[j] * px[j];
        s += (j == 0 || j == f.nx) ? 0.5 * e : e;
    }
    return s * f.dy * f.len[n];
}

}  // namespace

MultiplierTerms multiplier_identity(const Field& f, const GTC1D& dom, const SpacetimePoint& P) {
    if (P.dim() != 1) throw std::invalid_argument("multiplier identity is 1+1 dimensional");
    MultiplierTerms m;
    m.slice_minus = slice_multiplier(f, 0, P);
    m.slice_plus = slice_multiplier(f, f.nt, P);
    const double tol = 1e-13;
    for (Side side : {Side::left, Side::right}) {
        BoundaryTrace tr = neumann_trace(f, side, tol);
        for (std::size_t i = 0; i < tr.tau.size(); ++i) {
            double Nf = normal_derivatives(dom, side, tr.tau[i], P).Nf;
            m.boundary += 0.5 * Nf * tr.Nphi[i] * tr.Nphi[i] * tr.weight[i];
        }
    }
    m.residual = m.slice_plus - m.slice_minus - m.boundary;
    return m;
}

std::vector<double> multiplier_refinement(const GTC1D& dom, double ta, double tb, const SpacetimePoint& P,
                                          const std::function<double(double)>& phi0,
                                          const std::function<double(double)>& phi1, GridSpec g, int levels) {
    std::vector<double> out;
    for (int k = 0; k < levels; ++k) {
        Scheme s(dom, {}, ta, tb, {g.nx << k, g.nt << k});
        Field f = solve_forward(s, sample_cauchy(s, phi0, phi1));
        out.push_back(multiplier_identity(f, dom, P).residual);
    }
    return out;
}

std::vector<NamedTX> carleman_catalog() {
    return {
        {"one", [](const J2&, const J2&) { return J2(1.0); }},
        {"affine", [](const J2& t, const J2& x) { return 1.0 + 0.5 * t - 0.3 * x; }},
        {"tx", [](const J2& t, const J2& x) { return 1.0 + t * x; }},
        {"trig", [](const J2& t, const J2& x) { return cos(3.0 * x) * sin(2.0 * t + 0.3) + 1.5; }},
        {"osc", [](const J2& t, const J2& x) { return sin(7.0 * x - 2.0 * t); }},
    };
}

namespace {

J2 curve_jet(const Curve& c, const J2& t) { return t.chain(c(t.v), c.d1(t.v), c.d2(t.v)); }

}  // namespace

TXFunction vanishing_on(const GTC1D& dom, const TXFunction& q) {
    return [dom, q](const J2& t, const J2& x) {
        return (x - curve_jet(dom.curve(Side::left), t)) * (curve_jet(dom.curve(Side::right), t) - x) * q(t, x);
    };
}

double carleman_radius(const GTC1D& dom, const SpacetimePoint& P, double ta, double tb) {
    return 1.01 * sampled_Rplus(dom, P, ta, tb);
}

CarlemanTerms carleman_quadrature(const TXFunction& phi, const GTC1D& dom, const SpacetimePoint& P,
                                  const CarlemanParams& cp, double ta, double tb, const CarlemanQuadOptions& opt) {
    cp.validate();
    if (cp.n != 1 || P.dim() != 1) throw std::invalid_argument("quadrature check is 1+1 dimensional");
    const double fmin = opt.fmin_factor * cp.R * cp.R;
    const double dt = (tb - ta) / opt.nt, dy = 1.0 / opt.nx;

    struct Cell {
        double lz, box, grad, zero;
    };
    std::vector<Cell> cells;
    double shift = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < opt.nt; ++i) {
        const double t = ta + (i + 0.5) * dt;
        const double l1 = dom.lambda1(t), L = dom.width(t);
        for (int j = 0; j < opt.nx; ++j) {
            const double x = l1 + (j + 0.5) * dy * L;
            const double tp = t - P.t, xp = x - P.x[0], r = std::abs(xp);
            const double u = 0.5 * (tp - r), v = 0.5 * (tp + r), f = -u * v;
            if (f < fmin) continue;
            J2 p = phi(J2::variable(t, 0), J2::variable(x, 1));
            const double sg = xp > 0 ? 1.0 : -1.0;
            const double pu = p.d(0) - sg * p.d(1), pv = p.d(0) + sg * p.d(1);
            const double box = -p.dd(0, 0) + p.dd(1, 1);
            const double area = dt * dy * L;
            Cell c;
            c.lz = log_carleman_weight(u, v, cp);
            c.box = area * f * box * box / cp.a;
            c.grad = area * cp.eps / r * (u * u * pu * pu + v * v * pv * pv);
            c.zero = area * cp.b * cp.a * cp.a / std::sqrt(f) * p.v * p.v;
            shift = std::max(shift, c.lz);
            cells.push_back(c);
        }
    }
    if (cells.empty()) throw std::invalid_argument("U cap D_P is empty on the quadrature grid");

    struct BNode {
        double lz, val;
    };
    std::vector<BNode> bn;
    for (Side side : {Side::left, Side::right}) {
        const Curve& cv = dom.curve(side);
        for (int i = 0; i < opt.nt; ++i) {
            const double t = ta + (i + 0.5) * dt, x = cv(t);
            const double tp = t - P.t, xp = x - P.x[0], r = std::abs(xp);
            const double u = 0.5 * (tp - r), v = 0.5 * (tp + r), f = -u * v;
            if (f < fmin) continue;
            BoundaryNormal N = boundary_normal_1d(dom, side, t);
            NormalDerivatives nd = normal_derivatives(dom, side, t, P);
            J2 p = phi(J2::variable(t, 0), J2::variable(x, 1));
            const double Nphi = N.nu_t * p.d(0) + N.nu[0] * p.d(1);
            const double lp = cv.d1(t);
            const double ds = std::sqrt(1 - lp * lp) * dt;
            const double coef = (1 - cp.eps * r) * nd.Nf + cp.eps * f * nd.Nr;
            bn.push_back({log_carleman_weight(u, v, cp), coef * Nphi * Nphi * ds});
            shift = std::max(shift, bn.back().lz);
        }
    }

    CarlemanTerms T;
    T.log_shift = shift;
    T.cells = cells.size();
    for (const Cell& c : cells) {
        double w = std::exp(c.lz - shift);
        T.box += w * c.box;
        T.grad += w * c.grad;
        T.zero += w * c.zero;
    }
    for (const BNode& b : bn) T.boundary += std::exp(b.lz - shift) * b.val;
    double den = T.grad + T.zero;
    T.C_emp = den > 0 ? (T.box + opt.Cprime * T.boundary) / den : std::numeric_limits<double>::infinity();
    return T;
}

EstimateReport carleman_quadrature_check(const TXFunction& phi, const GTC1D& dom, const SpacetimePoint& P,
                                         const CarlemanParams& cp, double ta, double tb, CarlemanQuadOptions opt) {
    EstimateReport rep;
    rep.name = "carleman_quadrature";
    CarlemanTerms c = carleman_quadrature(phi, dom, P, cp, ta, tb, opt);
    opt.nt *= 2;
    opt.nx *= 2;
    CarlemanTerms fn = carleman_quadrature(phi, dom, P, cp, ta, tb, opt);
    // Both grids share the finer shift so the values are comparable.
    double adj = std::exp(c.log_shift - fn.log_shift);
    rep.lhs_coarse = (c.box + opt.Cprime * c.boundary) * adj;
    rep.rhs_coarse = (c.grad + c.zero) * adj;
    rep.margin_coarse = c.C_emp;
    rep.lhs = fn.box + opt.Cprime * fn.boundary;
    rep.rhs = fn.grad + fn.zero;
    rep.margin = fn.C_emp;
    rep.nx = opt.nx;
    rep.nt = opt.nt;
    rep.converged = quadrature_stable(rep.lhs_coarse, rep.lhs) && quadrature_stable(rep.rhs_coarse, rep.rhs);
    return rep;
}

std::string carleman_csv_header() { return "label,a,box,boundary,grad,zero,log_shift,C_emp,cells"; }

std::string carleman_csv_row(const std::string& label, double a, const CarlemanTerms& t) {
    return label + ',' + fmt17(a) + ',' + fmt17(t.box) + ',' + fmt17(t.boundary) + ',' + fmt17(t.grad) + ',' +
           fmt17(t.zero) + ',' + fmt17(t.log_shift) + ',' + fmt17(t.C_emp) + ',' + std::to_string(t.cells);
}

double boundary_observation(const Field& f, ObservedSides sides) {
    double s = 0.0;
    for (Side side : {Side::left, Side::right}) {
        if ((side == Side::left && !sides.left) || (side == Side::right && !sides.right)) continue;
        BoundaryTrace tr = neumann_trace(f, side, 1e-13);
        for (std::size_t i = 0; i < tr.tau.size(); ++i) s += tr.Nphi[i] * tr.Nphi[i] * tr.weight[i];
    }
    return s;
}

double observability_ratio(const Field& f, ObservedSides sides) {
    double e = energy(f, 0, 1.0) + energy(f, f.nt, 1.0);
    if (!(e > 0.0)) throw std::invalid_argument("observability ratio of a zero solution");
    return boundary_observation(f, sides) / e;
}

std::vector<CauchyData> eigenmode_ensemble(const Scheme& s, int members, int modes, std::uint64_t seed) {
    if (members < 1) throw std::invalid_argument("empty ensemble");
    Rng rng(seed);
    const double L = s.length(0);
    std::vector<CauchyData> out;
    for (int m = 0; m < members; ++m) {
        std::vector<double> a(modes), b(modes);
        for (int k = 0; k < modes; ++k) {
            a[k] = rng.normal();
            b[k] = rng.normal();
        }
        CauchyData d;
        for (int j = 0; j <= s.nx(); ++j) {
            const double y = j * s.dy();
            double p0 = 0, p1 = 0;
            for (int k = 1; k <= modes; ++k) {
                double sk = std::sin(k * M_PI * y);
                p0 += a[k - 1] * sk;
                p1 += b[k - 1] * (k * M_PI / L) * sk;
            }
            d.phi0.push_back(p0);
            d.phi1.push_back(p1);
        }
        d.phi0.front() = d.phi0.back() = 0.0;
        out.push_back(std::move(d));
    }
    return out;
}

CauchyData gaussian_beam(const Scheme& s, double xc, double sigma, double k, int direction) {
    CauchyData d;
    for (int j = 0; j <= s.nx(); ++j) {
        const double z = s.x(0, j) - xc;
        const double g = std::exp(-z * z / (sigma * sigma));
        const double p0 = g * std::cos(k * z);
        const double dp = g * (-2 * z / (sigma * sigma) * std::cos(k * z) - k * std::sin(k * z));
        d.phi0.push_back(p0);
        // phi = p0(x + t) travels left: phi_t = +phi_x.
        d.phi1.push_back(direction < 0 ? dp : -dp);
    }
    d.phi0.front() = d.phi0.back() = 0.0;
    return d;
}

RatioSummary observability_summary(const Scheme& s, const std::vector<CauchyData>& ensemble, ObservedSides sides) {
    if (ensemble.empty()) throw std::invalid_argument("empty ensemble");
    RatioSummary r;
    r.ratios.assign(ensemble.size(), 0.0);
    parallel_for(ensemble.size(), [&](std::size_t i) { r.ratios[i] = observability_ratio(solve_forward(s, ensemble[i]), sides); });
    std::vector<double> sorted = r.ratios;
    std::sort(sorted.begin(), sorted.end());
    r.min = sorted.front();
    std::size_t m = sorted.size();
    r.median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    return r;
}

namespace {

// Position at tb of the null ray leaving (ta, x0) leftward and reflecting once off lambda_1.
double reflected_ray_at(const GTC1D& dom, double ta, double tb, double x0) {
    auto gap = [&](double t) { return x0 - (t - ta) - dom.lambda1(t); };
    if (gap(tb) > 0) return x0 - (tb - ta);
    double lo = ta, hi = tb;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (gap(mid) > 0 ? lo : hi) = mid;
    }
    return dom.lambda1(hi) + (tb - hi);
}

}  // namespace

BeamSpec default_beam(const GTC1D& dom, double ta, double tb, double sigma_scale) {
    BeamSpec b;
    const double sigma0 = dom.width(ta) / 20.0;
    const double target = dom.lambda2(tb) - kBeamEndGap * sigma0;
    double lo = dom.lambda1(ta), hi = dom.lambda2(ta) - kBeamStartGap * sigma0;
    // The ray ends further right the further left it starts.
    if (reflected_ray_at(dom, ta, tb, hi) >= target) {
        b.xc = hi;
    } else {
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (lo + hi);
            (reflected_ray_at(dom, ta, tb, mid) > target ? lo : hi) = mid;
        }
        b.xc = 0.5 * (lo + hi);
    }
    b.sigma = sigma0 * sigma_scale;
    b.k = 40.0 * M_PI;
    b.direction = -1;
    return b;
}

std::vector<ScanRow> timespan_scan(const GTC1D& dom, const Coefficients& co, double ta, const ScanOptions& opt) {
    if (opt.windows.empty()) throw std::invalid_argument("sweep window empty");
    std::vector<ScanRow> rows;
    for (double w : opt.windows) {
        Scheme s(dom, co, ta, ta + w, opt.grid);
        Scheme sb(dom, co, ta, ta + w, opt.beam_grid);
        const BeamSpec bs = default_beam(dom, ta, ta + w);
        RatioSummary sum = observability_summary(s, eigenmode_ensemble(s, opt.members, opt.modes, opt.seed), opt.sides);
        ScanRow r;
        r.window = w;
        r.beam_ratio = observability_ratio(solve_forward(sb, gaussian_beam(sb, bs.xc, bs.sigma, bs.k, bs.direction)), opt.sides);
        r.median_ratio = sum.median;
        r.min_ratio = std::min(sum.min, r.beam_ratio);
        r.optimal_T = opt.optimal_T;
        rows.push_back(r);
    }
    return rows;
}

std::string scan_csv_header() { return "window,min_ratio,median_ratio,optimal_T_marker,beam_ratio"; }

std::string scan_csv_row(const ScanRow& r) {
    return fmt17(r.window) + ',' + fmt17(r.min_ratio) + ',' + fmt17(r.median_ratio) + ',' + fmt17(r.optimal_T) + ',' +
           fmt17(r.beam_ratio);
}

}  // namespace mbwave
