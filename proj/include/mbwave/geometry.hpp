#pragma once

#include <vector>

namespace mbwave {

struct SpacetimePoint {
    double t = 0.0;
    std::vector<double> x;

    SpacetimePoint() = default;
    SpacetimePoint(double t_, std::vector<double> x_);
    std::size_t dim() const { return x.size(); }
};

// Shifted radius, null coordinates and hyperbolic function about a center.
struct NullCoords {
    double t = 0.0;  // t_P
    double r = 0.0;
    double u = 0.0;
    double v = 0.0;
    double f = 0.0;
};

// Coefficients of T and N in the (d_u, d_v) basis.
struct ConeFrame {
    double T_u = 0.0, T_v = 0.0;
    double N_u = 0.0, N_v = 0.0;
};

enum class Chronology { future, past, none };

NullCoords null_coords(const SpacetimePoint& p, const SpacetimePoint& center);
NullCoords null_coords_from_tr(double tP, double r);
bool in_cone_exterior(const SpacetimePoint& p, const SpacetimePoint& center);
Chronology chronological_relation(const SpacetimePoint& p, const SpacetimePoint& q);
ConeFrame cone_frame(double u, double v);
ConeFrame cone_frame(const SpacetimePoint& p, const SpacetimePoint& center);

}  // namespace mbwave
