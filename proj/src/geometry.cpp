#include "mbwave/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace mbwave {

SpacetimePoint::SpacetimePoint(double t_, std::vector<double> x_) : t(t_), x(std::move(x_)) {
    if (x.empty()) throw std::invalid_argument("spacetime point needs n >= 1");
    if (!std::isfinite(t)) throw std::invalid_argument("non-finite time coordinate");
    for (double c : x)
        if (!std::isfinite(c)) throw std::invalid_argument("non-finite spatial coordinate");
}

NullCoords null_coords_from_tr(double tP, double r) {
    NullCoords c;
    c.t = tP;
    c.r = r;
    c.u = 0.5 * (tP - r);
    c.v = 0.5 * (tP + r);
    c.f = -c.u * c.v;
    return c;
}

NullCoords null_coords(const SpacetimePoint& p, const SpacetimePoint& center) {
    if (p.dim() != center.dim()) throw std::invalid_argument("dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.dim(); ++i) {
        double d = p.x[i] - center.x[i];
        s += d * d;
    }
    return null_coords_from_tr(p.t - center.t, std::sqrt(s));
}

bool in_cone_exterior(const SpacetimePoint& p, const SpacetimePoint& center) {
    return null_coords(p, center).f > 0.0;
}

Chronology chronological_relation(const SpacetimePoint& p, const SpacetimePoint& q) {
    NullCoords c = null_coords(p, q);
    if (c.f < 0.0 && c.t > 0.0) return Chronology::future;
    if (c.f < 0.0 && c.t < 0.0) return Chronology::past;
    return Chronology::none;
}

ConeFrame cone_frame(double u, double v) {
    double f = -u * v;
    if (!(f > 0.0)) throw std::domain_error("cone frame requires f > 0");
    double s = 0.5 / std::sqrt(f);
    return {-s * u, s * v, s * u, s * v};
}

ConeFrame cone_frame(const SpacetimePoint& p, const SpacetimePoint& center) {
    NullCoords c = null_coords(p, center);
    return cone_frame(c.u, c.v);
}

}  // namespace mbwave
