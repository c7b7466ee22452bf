#include "mbwave/solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "mbwave/io.hpp"

namespace mbwave {

static_assert(std::endian::native == std::endian::little, "binary dumps assume a little-endian host");

double Coefficients::div(double t, double x) const {
    if (divX) return divX(t, x);
    const double h = 1e-5;
    double d = 0.0;
    if (Xt) d += (Xt(t + h, x) - Xt(t - h, x)) / (2 * h);
    if (Xx) d += (Xx(t, x + h) - Xx(t, x - h)) / (2 * h);
    return d;
}

Coefficients Coefficients::constant(double xt, double xx, double v) {
    Coefficients c;
    if (xt != 0.0) c.Xt = [xt](double, double) { return xt; };
    if (xx != 0.0) c.Xx = [xx](double, double) { return xx; };
    if (v != 0.0) c.V = [v](double, double) { return v; };
    c.divX = [](double, double) { return 0.0; };
    return c;
}

double BoundaryData::at(Side s, int n) const {
    const auto& v = s == Side::left ? left : right;
    return v.empty() ? 0.0 : v[static_cast<std::size_t>(n)];
}

double cfl_dt_max(const GTC1D& dom, double ta, double tb, int nx) {
    const int m = 2000;
    double minL = dom.width(ta), maxs = 0.0;
    for (int i = 0; i <= m; ++i) {
        double t = ta + (tb - ta) * i / m;
        minL = std::min(minL, dom.width(t));
        maxs = std::max({maxs, std::abs(dom.curve(Side::left).d1(t)), std::abs(dom.curve(Side::right).d1(t))});
    }
    return 0.5 * (1.0 / nx) * minL * (1.0 - maxs);
}

std::vector<double> Field::level(int n) const {
    auto b = w.begin() + static_cast<std::ptrdiff_t>(n) * (nx + 1);
    return std::vector<double>(b, b + nx + 1);
}

Scheme::Scheme(const GTC1D& dom, Coefficients coeffs, double ta, double tb, GridSpec grid)
    : dom_(std::move(dom)), co_(std::move(coeffs)), ta_(ta), tb_(tb) {
    if (!(tb > ta)) throw std::invalid_argument("time window must be nonempty");
    if (ta < dom_.t0() - 1e-12 || tb > dom_.t1() + 1e-12)
        throw std::invalid_argument("time window outside the domain description");
    if (grid.nx < 4) throw std::invalid_argument("grid needs nx >= 4");
    if (grid.nt < 2) throw std::invalid_argument("grid needs nt >= 2");
    nx_ = grid.nx;
    dy_ = 1.0 / nx_;
    cfl_.dt_max = cfl_dt_max(dom_, ta, tb, nx_);
    cfl_.nt_requested = grid.nt;
    int need = static_cast<int>(std::ceil((tb - ta) / cfl_.dt_max - 1e-9));
    nt_ = std::max(grid.nt, need);
    cfl_.nt_used = nt_;
    cfl_.raised = nt_ > grid.nt;
    dt_ = (tb - ta) / nt_;
    idt2_ = 1.0 / (dt_ * dt_);
    idy2_ = 1.0 / (dy_ * dy_);
    i2dt_ = 1.0 / (2 * dt_);
    i2dy_ = 1.0 / (2 * dy_);
    i2dtdy_ = 1.0 / (2 * dt_ * dy_);

    const auto& c1 = dom_.curve(Side::left);
    const auto& c2 = dom_.curve(Side::right);
    for (int n = 0; n <= nt_; ++n) {
        double t = std::min(ta_ + n * dt_, tb_);
        lam1_.push_back(c1(t));
        len_.push_back(c2(t) - c1(t));
        dlam1_.push_back(c1.d1(t));
        dlen_.push_back(c2.d1(t) - c1.d1(t));
        ddlam1_.push_back(c1.d2(t));
        ddlen_.push_back(c2.d2(t) - c1.d2(t));
        invlen_.push_back(1.0 / len_.back());
    }
}

CoefficientBounds Scheme::bounds() const {
    CoefficientBounds b;
    const int sn = std::max(1, nt_ / 200), sj = std::max(1, nx_ / 100);
    for (int n = 0; n <= nt_; n += sn)
        for (int j = 0; j <= nx_; j += sj) {
            double t = this->t(n), x = this->x(n, j);
            b.M0 = std::max(b.M0, std::abs(co_.v(t, x)));
            b.M1 = std::max({b.M1, std::abs(co_.xt(t, x)), std::abs(co_.xx(t, x))});
        }
    return b;
}

Stencil Scheme::stencil_at(int n, int j, double Xt, double Xx, double V) const {
    const double y = j * dy_, L = len_[n], iL = invlen_[n];
    const double c = dlam1_[n] + y * dlen_[n];
    const double ct = ddlam1_[n] + y * ddlen_[n];
    const double cp = c + 0.5 * dy_ * dlen_[n], cm = c - 0.5 * dy_ * dlen_[n];
    const double kp = (1 - cp * cp) * iL, km = (1 - cm * cm) * iL;
    const double mix = c * i2dtdy_;
    const double b = (ct + Xx - c * Xt) * i2dy_;
    Stencil a{};
    a[2][1] = -L * idt2_ + L * Xt * i2dt_;
    a[2][2] = mix;
    a[2][0] = -mix;
    a[0][1] = -L * idt2_ - L * Xt * i2dt_;
    a[0][2] = -mix;
    a[0][0] = mix;
    a[1][1] = 2 * L * idt2_ - (kp + km) * idy2_ + L * V;
    a[1][2] = kp * idy2_ + b;
    a[1][0] = km * idy2_ - b;
    return a;
}

Stencil Scheme::stencil(int n, int j) const {
    double Xt = 0, Xx = 0, V = 0;
    if (!co_.zero_drift() || co_.V) {
        const double t = this->t(n), x = lam1_[n] + j * dy_ * len_[n];
        Xt = co_.xt(t, x);
        Xx = co_.xx(t, x);
        V = co_.v(t, x);
    }
    return stencil_at(n, j, Xt, Xx, V);
}

void Scheme::stencils(int n, std::vector<Stencil>& out) const {
    out.resize(nx_ + 1);
    if (!co_.zero_drift() || co_.V) {
        for (int j = 1; j < nx_; ++j) out[j] = stencil(n, j);
        return;
    }
    // Zero drift: the dropped products are exact zeros, so this matches stencil_at bit for bit.
    const double L = len_[n], iL = invlen_[n], d1 = dlam1_[n], dl = dlen_[n], dd1 = ddlam1_[n], ddl = ddlen_[n];
    const double hd = 0.5 * dy_ * dl, side = -L * idt2_, ctr = 2 * L * idt2_;
    for (int j = 1; j < nx_; ++j) {
        const double y = j * dy_;
        const double c = d1 + y * dl, ct = dd1 + y * ddl;
        const double cp = c + hd, cm = c - hd;
        const double kp = (1 - cp * cp) * iL, km = (1 - cm * cm) * iL;
        const double mix = c * i2dtdy_, b = ct * i2dy_;
        Stencil& a = out[j];
        a[2][1] = side;
        a[2][2] = mix;
        a[2][0] = -mix;
        a[0][1] = side;
        a[0][2] = -mix;
        a[0][0] = mix;
        a[1][1] = ctr - (kp + km) * idy2_;
        a[1][2] = kp * idy2_ + b;
        a[1][0] = km * idy2_ - b;
    }
}

void Scheme::fill_meta(Field& f) const {
    f.ta = ta_;
    f.tb = tb_;
    f.dt = dt_;
    f.dy = dy_;
    f.nx = nx_;
    f.nt = nt_;
    f.lam1 = lam1_;
    f.len = len_;
    f.dlam1 = dlam1_;
    f.dlen = dlen_;
    f.cfl = cfl_;
}

Field Scheme::blank() const {
    Field f;
    fill_meta(f);
    f.w.assign(static_cast<std::size_t>(nt_ + 1) * (nx_ + 1), 0.0);
    return f;
}

namespace {

// Tridiagonal LU: diag becomes the reciprocal pivots and w the eliminated multipliers.
void tri_factor(const double* sub, double* diag, const double* sup, double* w, std::size_t m) {
    diag[0] = 1.0 / diag[0];
    w[0] = 0.0;
    for (std::size_t i = 1; i < m; ++i) {
        w[i] = sub[i] * diag[i - 1];
        diag[i] = 1.0 / (diag[i] - w[i] * sup[i - 1]);
    }
}

void tri_solve(const double* w, const double* ipiv, const double* sup, double* d, std::size_t m) {
    for (std::size_t i = 1; i < m; ++i) d[i] -= w[i] * d[i - 1];
    d[m - 1] *= ipiv[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) d[i] = (d[i] - sup[i] * d[i + 1]) * ipiv[i];
}

// Thomas algorithm; sub[0] and sup[m-1] are ignored. Clobbers diag and sub.
void thomas(std::vector<double>& sub, std::vector<double>& diag, std::vector<double>& sup, std::vector<double>& d) {
    const std::size_t m = diag.size();
    tri_factor(sub.data(), diag.data(), sup.data(), sub.data(), m);
    tri_solve(sub.data(), diag.data(), sup.data(), d.data(), m);
}

double ddy_end(const double* w, int nx, double dy, bool right) {
    if (right) return (3 * w[nx] - 4 * w[nx - 1] + w[nx - 2]) / (2 * dy);
    return (-3 * w[0] + 4 * w[1] - w[2]) / (2 * dy);
}

}  // namespace

void Scheme::start_level(Field& f, int n0, int n1, double sdt, const CauchyData& d, const BoundaryData& g,
                         const Fn2& forcing) const {
    if (d.phi0.size() != static_cast<std::size_t>(nx_ + 1) || d.phi1.size() != static_cast<std::size_t>(nx_ + 1))
        throw std::invalid_argument("Cauchy data must have nx + 1 samples");
    for (int j = 0; j <= nx_; ++j) f.at(n0, j) = d.phi0[j];
    f.at(n0, 0) = g.at(Side::left, n0);
    f.at(n0, nx_) = g.at(Side::right, n0);

    const double L = len_[n0], t = this->t(n0);
    const double* w = &f.w[static_cast<std::size_t>(n0) * (nx_ + 1)];
    std::vector<double> wy(nx_ + 1), W(nx_ + 1);
    for (int j = 1; j < nx_; ++j) wy[j] = (w[j + 1] - w[j - 1]) / (2 * dy_);
    wy[0] = ddy_end(w, nx_, dy_, false);
    wy[nx_] = ddy_end(w, nx_, dy_, true);
    for (int j = 0; j <= nx_; ++j) W[j] = d.phi1[j] + speed(n0, j * dy_) * wy[j] / L;

    for (int j = 1; j < nx_; ++j) {
        const double y = j * dy_, c = speed(n0, y), ct = ddlam1_[n0] + y * ddlen_[n0];
        const double cp = c + 0.5 * dy_ * dlen_[n0], cm = c - 0.5 * dy_ * dlen_[n0];
        const double kp = (1 - cp * cp) / L, km = (1 - cm * cm) / L;
        const double x = lam1_[n0] + y * L;
        const double lap = (kp * (w[j + 1] - w[j]) - km * (w[j] - w[j - 1])) / (dy_ * dy_);
        double M = 2 * c * (W[j + 1] - W[j - 1]) / (2 * dy_) + ct * wy[j] + lap;
        M += L * co_.xt(t, x) * d.phi1[j] + co_.xx(t, x) * wy[j] + L * co_.v(t, x) * w[j];
        if (forcing) M -= L * forcing(t, x);
        f.at(n1, j) = w[j] + sdt * W[j] + sdt * sdt / (2 * L) * M;
    }
    f.at(n1, 0) = g.at(Side::left, n1);
    f.at(n1, nx_) = g.at(Side::right, n1);
}

void Scheme::start_forward(Field& f, const CauchyData& d, const BoundaryData& g, const Fn2& forcing) const {
    start_level(f, 0, 1, dt_, d, g, forcing);
}

void Scheme::start_backward(Field& f, const CauchyData& d, const BoundaryData& g, const Fn2& forcing) const {
    start_level(f, nt_, nt_ - 1, -dt_, d, g, forcing);
}

void Scheme::march_forward(Field& f, const BoundaryData& g, const Fn2& forcing) const {
    const int m = nx_ - 1;
    std::vector<double> sub(m), diag(m), sup(m), rhs(m);
    std::vector<Stencil> st;
    for (int n = 1; n < nt_; ++n) {
        stencils(n, st);
        f.at(n + 1, 0) = g.at(Side::left, n + 1);
        f.at(n + 1, nx_) = g.at(Side::right, n + 1);
        for (int j = 1; j < nx_; ++j) {
            const Stencil& a = st[j];
            double r = forcing ? len_[n] * forcing(t(n), x(n, j)) : 0.0;
            for (int dj = -1; dj <= 1; ++dj) {
                r -= a[0][dj + 1] * f.at(n - 1, j + dj);
                r -= a[1][dj + 1] * f.at(n, j + dj);
            }
            if (j == 1) r -= a[2][0] * f.at(n + 1, 0);
            if (j == nx_ - 1) r -= a[2][2] * f.at(n + 1, nx_);
            sub[j - 1] = a[2][0];
            diag[j - 1] = a[2][1];
            sup[j - 1] = a[2][2];
            rhs[j - 1] = r;
        }
        thomas(sub, diag, sup, rhs);
        for (int j = 1; j < nx_; ++j) f.at(n + 1, j) = rhs[j - 1];
    }
}

void Scheme::march_backward(Field& f, const BoundaryData& g, const Fn2& forcing) const {
    const int m = nx_ - 1;
    std::vector<double> sub(m), diag(m), sup(m), rhs(m);
    std::vector<Stencil> st;
    for (int n = nt_ - 1; n >= 1; --n) {
        stencils(n, st);
        f.at(n - 1, 0) = g.at(Side::left, n - 1);
        f.at(n - 1, nx_) = g.at(Side::right, n - 1);
        for (int j = 1; j < nx_; ++j) {
            const Stencil& a = st[j];
            double r = forcing ? len_[n] * forcing(t(n), x(n, j)) : 0.0;
            for (int dj = -1; dj <= 1; ++dj) {
                r -= a[2][dj + 1] * f.at(n + 1, j + dj);
                r -= a[1][dj + 1] * f.at(n, j + dj);
            }
            if (j == 1) r -= a[0][0] * f.at(n - 1, 0);
            if (j == nx_ - 1) r -= a[0][2] * f.at(n - 1, nx_);
            sub[j - 1] = a[0][0];
            diag[j - 1] = a[0][1];
            sup[j - 1] = a[0][2];
            rhs[j - 1] = r;
        }
        if (!back_w_.empty()) {
            const std::size_t off = static_cast<std::size_t>(n) * m;
            tri_solve(&back_w_[off], &back_ip_[off], sup.data(), rhs.data(), m);
        } else {
            thomas(sub, diag, sup, rhs);
        }
        for (int j = 1; j < nx_; ++j) f.at(n - 1, j) = rhs[j - 1];
    }
}

void Scheme::cache_factorizations() {
    const std::size_t m = nx_ - 1, levels = nt_ + 1;
    back_w_.assign(levels * m, 0.0);
    back_ip_.assign(levels * m, 0.0);
    adj_w_.assign(levels * m, 0.0);
    adj_ip_.assign(levels * m, 0.0);
    std::vector<Stencil> st;
    std::vector<double> sub(m), sup(m);
    for (int n = 1; n < nt_; ++n) {
        stencils(n, st);
        const std::size_t off = static_cast<std::size_t>(n) * m;
        for (std::size_t i = 0; i < m; ++i) {
            const int j = static_cast<int>(i) + 1;
            sub[i] = st[j][0][0];
            back_ip_[off + i] = st[j][0][1];
            sup[i] = st[j][0][2];
        }
        tri_factor(sub.data(), &back_ip_[off], sup.data(), &back_w_[off], m);
        // The adjoint solves the transpose of the same level matrix.
        for (std::size_t i = 0; i < m; ++i) {
            const int j = static_cast<int>(i) + 1;
            sub[i] = j > 1 ? st[j - 1][0][2] : 0.0;
            adj_ip_[off + i] = st[j][0][1];
            sup[i] = j < nx_ - 1 ? st[j + 1][0][0] : 0.0;
        }
        tri_factor(sub.data(), &adj_ip_[off], sup.data(), &adj_w_[off], m);
    }
}

std::vector<double> Scheme::apply(const std::vector<double>& u) const {
    const std::size_t W = nx_ + 1;
    if (u.size() != W * (nt_ + 1)) throw std::invalid_argument("grid function size mismatch");
    std::vector<double> out(u.size(), 0.0);
    for (int n = 1; n < nt_; ++n)
        for (int j = 1; j < nx_; ++j) {
            Stencil a = stencil(n, j);
            double s = 0.0;
            for (int dn = -1; dn <= 1; ++dn)
                for (int dj = -1; dj <= 1; ++dj) s += a[dn + 1][dj + 1] * u[(n + dn) * W + j + dj];
            out[n * W + j] = s;
        }
    return out;
}

std::vector<double> Scheme::apply_transpose(const std::vector<double>& rows) const {
    const std::size_t W = nx_ + 1;
    if (rows.size() != W * (nt_ + 1)) throw std::invalid_argument("grid function size mismatch");
    std::vector<double> out(rows.size(), 0.0);
    for (int n = 1; n < nt_; ++n)
        for (int j = 1; j < nx_; ++j) {
            const double lam = rows[n * W + j];
            if (lam == 0.0) continue;
            Stencil a = stencil(n, j);
            for (int dn = -1; dn <= 1; ++dn)
                for (int dj = -1; dj <= 1; ++dj) out[(n + dn) * W + j + dj] += a[dn + 1][dj + 1] * lam;
        }
    return out;
}

Field Scheme::adjoint_march(const std::vector<double>& r0, const std::vector<double>& r1) const {
    if (r0.size() != static_cast<std::size_t>(nx_ + 1) || r1.size() != static_cast<std::size_t>(nx_ + 1))
        throw std::invalid_argument("adjoint data must have nx + 1 samples");
    Field lam = blank();
    const int m = nx_ - 1;
    std::vector<Stencil> prev(nx_ + 1), cur(nx_ + 1), next(nx_ + 1);
    auto load = [&](std::vector<Stencil>& s, int n) { stencils(n, s); };
    std::vector<double> sub(m), diag(m), sup(m), rhs(m);
    // Column level col couples rows col+1 (dn=-1), col (dn=0) and col-1 (dn=+1).
    for (int col = 0; col <= nt_ - 2; ++col) {
        if (col >= 2) prev.swap(cur);
        if (col >= 1) cur.swap(next);
        load(next, col + 1);
        const double* lc = col >= 1 ? &lam.at(col, 0) : nullptr;
        const double* lp = col >= 2 ? &lam.at(col - 1, 0) : nullptr;
        for (int i = 1; i < nx_; ++i) {
            double r = col == 0 ? r0[i] : (col == 1 ? r1[i] : 0.0);
            // Row j touches column i through entry dj = i - j; lam is zero at j = 0 and j = nx.
            if (lc) r -= cur[i - 1][1][2] * lc[i - 1] + cur[i][1][1] * lc[i] + cur[i + 1][1][0] * lc[i + 1];
            if (lp) r -= prev[i - 1][2][2] * lp[i - 1] + prev[i][2][1] * lp[i] + prev[i + 1][2][0] * lp[i + 1];
            rhs[i - 1] = r;
            diag[i - 1] = next[i][0][1];
            sub[i - 1] = i > 1 ? next[i - 1][0][2] : 0.0;
            sup[i - 1] = i < nx_ - 1 ? next[i + 1][0][0] : 0.0;
        }
        if (!adj_w_.empty()) {
            const std::size_t off = static_cast<std::size_t>(col + 1) * m;
            tri_solve(&adj_w_[off], &adj_ip_[off], sup.data(), rhs.data(), m);
        } else {
            thomas(sub, diag, sup, rhs);
        }
        for (int i = 1; i < nx_; ++i) lam.at(col + 1, i) = rhs[i - 1];
    }
    return lam;
}

BoundaryData Scheme::boundary_transpose(const Field& lam) const {
    BoundaryData out;
    out.left.assign(nt_ + 1, 0.0);
    out.right.assign(nt_ + 1, 0.0);
    for (int n = 1; n < nt_; ++n) {
        Stencil al = stencil(n, 1), ar = stencil(n, nx_ - 1);
        const double ll = lam.at(n, 1), lr = lam.at(n, nx_ - 1);
        for (int dn = -1; dn <= 1; ++dn) {
            out.left[n + dn] += al[dn + 1][0] * ll;
            out.right[n + dn] += ar[dn + 1][2] * lr;
        }
    }
    return out;
}

Field solve_forward(const Scheme& s, const CauchyData& d, const BoundaryData& g, const Fn2& forcing) {
    Field f = s.blank();
    s.start_forward(f, d, g, forcing);
    s.march_forward(f, g, forcing);
    return f;
}

Field solve_adjoint(const Scheme& s, const std::vector<double>& z0, const std::vector<double>& z1) {
    return s.adjoint_march(z0, z1);
}

CauchyData sample_cauchy(const Scheme& s, const std::function<double(double)>& phi0,
                         const std::function<double(double)>& phi1, int level) {
    CauchyData d;
    for (int j = 0; j <= s.nx(); ++j) {
        double x = s.x(level, j);
        d.phi0.push_back(phi0 ? phi0(x) : 0.0);
        d.phi1.push_back(phi1 ? phi1(x) : 0.0);
    }
    return d;
}

std::vector<double> dx_level(const Field& f, int n) {
    const double* w = &f.w[static_cast<std::size_t>(n) * (f.nx + 1)];
    std::vector<double> out(f.nx + 1);
    const double L = f.len[n];
    for (int j = 1; j < f.nx; ++j) out[j] = (w[j + 1] - w[j - 1]) / (2 * f.dy * L);
    out[0] = ddy_end(w, f.nx, f.dy, false) / L;
    out[f.nx] = ddy_end(w, f.nx, f.dy, true) / L;
    return out;
}

std::vector<double> dt_level(const Field& f, int n) {
    std::vector<double> wt(f.nx + 1);
    for (int j = 0; j <= f.nx; ++j) {
        if (n == 0)
            wt[j] = (-3 * f.at(0, j) + 4 * f.at(1, j) - f.at(2, j)) / (2 * f.dt);
        else if (n == f.nt)
            wt[j] = (3 * f.at(n, j) - 4 * f.at(n - 1, j) + f.at(n - 2, j)) / (2 * f.dt);
        else
            wt[j] = (f.at(n + 1, j) - f.at(n - 1, j)) / (2 * f.dt);
    }
    std::vector<double> px = dx_level(f, n);
    for (int j = 0; j <= f.nx; ++j) {
        double c = f.dlam1[n] + j * f.dy * f.dlen[n];
        wt[j] -= c * px[j];  // (c/L) w_y = c phi_x
    }
    return wt;
}

CauchyData cauchy_at(const Field& f, int n) { return {f.level(n), dt_level(f, n)}; }

BoundaryTrace neumann_trace(const Field& f, Side side, double tol) {
    const int jb = side == Side::left ? 0 : f.nx;
    for (int n = 0; n <= f.nt; ++n)
        if (std::abs(f.at(n, jb)) > tol)
            throw std::invalid_argument("neumann trace requires homogeneous Dirichlet data on that side");
    BoundaryTrace tr;
    tr.side = side;
    const double sgn = side == Side::left ? -1.0 : 1.0;
    for (int n = 0; n <= f.nt; ++n) {
        const double* w = &f.w[static_cast<std::size_t>(n) * (f.nx + 1)];
        double px = ddy_end(w, f.nx, f.dy, side == Side::right) / f.len[n];
        double lp = side == Side::left ? f.dlam1[n] : f.dlam1[n] + f.dlen[n];
        double s = std::sqrt(1 - lp * lp);
        tr.tau.push_back(f.t(n));
        tr.dphi_dx.push_back(px);
        tr.Nphi.push_back(sgn * s * px);
        tr.weight.push_back(s * f.dt * ((n == 0 || n == f.nt) ? 0.5 : 1.0));
    }
    return tr;
}

double energy(const Field& f, int n, double M0) {
    auto pt = dt_level(f, n);
    auto px = dx_level(f, n);
    double s = 0.0;
    for (int j = 0; j <= f.nx; ++j) {
        double phi = f.at(n, j);
        double e = pt[j] * pt[j] + px[j] * px[j] + M0 * phi * phi;
        s += (j == 0 || j == f.nx) ? 0.5 * e : e;
    }
    return s * f.dy * f.len[n];
}

double localized_energy(const Field& f, int n, const SpacetimePoint& P, double M0) {
    if (P.dim() != 1) throw std::invalid_argument("localized energy is 1+1 dimensional");
    auto pt = dt_level(f, n);
    auto px = dx_level(f, n);
    double s = 0.0;
    const double tp = f.t(n) - P.t;
    for (int j = 0; j <= f.nx; ++j) {
        double r = std::abs(f.x(n, j) - P.x[0]);
        if (!(r * r - tp * tp > 0.0)) continue;
        double phi = f.at(n, j);
        double e = pt[j] * pt[j] + px[j] * px[j] + M0 * phi * phi;
        s += (j == 0 || j == f.nx) ? 0.5 * e : e;
    }
    return s * f.dy * f.len[n];
}

int level_of(const Field& f, double tau) {
    double k = (tau - f.ta) / f.dt;
    int n = static_cast<int>(std::lround(k));
    if (n < 0 || n > f.nt || std::abs(k - n) > 1e-6)
        throw std::invalid_argument("time " + fmt17(tau) + " is not a grid level");
    return n;
}

void write_field_csv(std::ostream& os, const Field& f, int stride_t, int stride_x) {
    os << "t,x,value\n";
    for (int n = 0; n <= f.nt; n += stride_t)
        for (int j = 0; j <= f.nx; j += stride_x)
            os << fmt17(f.t(n)) << ',' << fmt17(f.x(n, j)) << ',' << fmt17(f.at(n, j)) << '\n';
}

namespace {
const char kMagic[8] = {'M', 'B', 'W', 'F', '0', '0', '0', '1'};

template <class T> void put(std::ostream& os, T v) { os.write(reinterpret_cast<const char*>(&v), sizeof(T)); }
template <class T> T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("truncated field dump");
    return v;
}
}  // namespace

void write_field_binary(std::ostream& os, const Field& f) {
    os.write(kMagic, 8);
    put<std::uint64_t>(os, static_cast<std::uint64_t>(f.nt + 1));
    put<std::uint64_t>(os, static_cast<std::uint64_t>(f.nx + 1));
    put<double>(os, f.dt);
    put<double>(os, f.dy);
    put<double>(os, f.ta);
    put<double>(os, f.tb);
    os.write(reinterpret_cast<const char*>(f.w.data()), static_cast<std::streamsize>(f.w.size() * sizeof(double)));
}

Field read_field_binary(std::istream& is) {
    char m[8];
    is.read(m, 8);
    if (!is || std::memcmp(m, kMagic, 8) != 0) throw std::runtime_error("not a field dump");
    Field f;
    f.nt = static_cast<int>(get<std::uint64_t>(is)) - 1;
    f.nx = static_cast<int>(get<std::uint64_t>(is)) - 1;
    f.dt = get<double>(is);
    f.dy = get<double>(is);
    f.ta = get<double>(is);
    f.tb = get<double>(is);
    f.w.resize(static_cast<std::size_t>(f.nt + 1) * (f.nx + 1));
    is.read(reinterpret_cast<char*>(f.w.data()), static_cast<std::streamsize>(f.w.size() * sizeof(double)));
    if (!is) throw std::runtime_error("truncated field dump");
    return f;
}

}  // namespace mbwave
