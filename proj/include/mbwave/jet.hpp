#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace mbwave {

// Second-order forward-mode jet: value, gradient and Hessian in N variables.
template <std::size_t N>
struct Jet {
    double v = 0.0;
    std::array<double, N> g{};
    std::array<double, N * N> h{};

    Jet() = default;
    Jet(double c) : v(c) {}

    static Jet variable(double value, std::size_t i) {
        Jet j(value);
        j.g[i] = 1.0;
        return j;
    }

    double d(std::size_t i) const { return g[i]; }
    double dd(std::size_t i, std::size_t k) const { return h[i * N + k]; }

    // Apply a scalar function with known first and second derivatives.
    Jet chain(double f, double f1, double f2) const {
        Jet r(f);
        for (std::size_t i = 0; i < N; ++i) r.g[i] = f1 * g[i];
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t k = 0; k < N; ++k)
                r.h[i * N + k] = f2 * g[i] * g[k] + f1 * h[i * N + k];
        return r;
    }

    Jet& operator+=(const Jet& o) {
        v += o.v;
        for (std::size_t i = 0; i < N; ++i) g[i] += o.g[i];
        for (std::size_t i = 0; i < N * N; ++i) h[i] += o.h[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        v -= o.v;
        for (std::size_t i = 0; i < N; ++i) g[i] -= o.g[i];
        for (std::size_t i = 0; i < N * N; ++i) h[i] -= o.h[i];
        return *this;
    }
    Jet& operator*=(const Jet& o) {
        Jet r(v * o.v);
        for (std::size_t i = 0; i < N; ++i) r.g[i] = g[i] * o.v + v * o.g[i];
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t k = 0; k < N; ++k)
                r.h[i * N + k] = h[i * N + k] * o.v + v * o.h[i * N + k] + g[i] * o.g[k] + g[k] * o.g[i];
        *this = r;
        return *this;
    }
    Jet& operator/=(const Jet& o) {
        *this *= o.chain(1.0 / o.v, -1.0 / (o.v * o.v), 2.0 / (o.v * o.v * o.v));
        return *this;
    }
    Jet operator-() const {
        Jet r(*this);
        r.v = -r.v;
        for (auto& x : r.g) x = -x;
        for (auto& x : r.h) x = -x;
        return r;
    }
};

template <std::size_t N> Jet<N> operator+(Jet<N> a, const Jet<N>& b) { return a += b; }
template <std::size_t N> Jet<N> operator-(Jet<N> a, const Jet<N>& b) { return a -= b; }
template <std::size_t N> Jet<N> operator*(Jet<N> a, const Jet<N>& b) { return a *= b; }
template <std::size_t N> Jet<N> operator/(Jet<N> a, const Jet<N>& b) { return a /= b; }
template <std::size_t N> Jet<N> operator+(Jet<N> a, double b) { a.v += b; return a; }
template <std::size_t N> Jet<N> operator+(double b, Jet<N> a) { a.v += b; return a; }
template <std::size_t N> Jet<N> operator-(Jet<N> a, double b) { a.v -= b; return a; }
template <std::size_t N> Jet<N> operator-(double b, const Jet<N>& a) { return (-a) + b; }
template <std::size_t N> Jet<N> operator*(Jet<N> a, double b) {
    a.v *= b;
    for (auto& x : a.g) x *= b;
    for (auto& x : a.h) x *= b;
    return a;
}
template <std::size_t N> Jet<N> operator*(double b, Jet<N> a) { return a * b; }
template <std::size_t N> Jet<N> operator/(Jet<N> a, double b) { return a * (1.0 / b); }
template <std::size_t N> Jet<N> operator/(double b, const Jet<N>& a) { return Jet<N>(b) / a; }

template <std::size_t N> Jet<N> sin(const Jet<N>& a) {
    double s = std::sin(a.v), c = std::cos(a.v);
    return a.chain(s, c, -s);
}
template <std::size_t N> Jet<N> cos(const Jet<N>& a) {
    double s = std::sin(a.v), c = std::cos(a.v);
    return a.chain(c, -s, -c);
}
template <std::size_t N> Jet<N> exp(const Jet<N>& a) {
    double e = std::exp(a.v);
    return a.chain(e, e, e);
}
template <std::size_t N> Jet<N> log(const Jet<N>& a) {
    return a.chain(std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v));
}
template <std::size_t N> Jet<N> sqrt(const Jet<N>& a) {
    double s = std::sqrt(a.v);
    return a.chain(s, 0.5 / s, -0.25 / (s * a.v));
}
template <std::size_t N> Jet<N> pow(const Jet<N>& a, double p) {
    double f = std::pow(a.v, p);
    return a.chain(f, p * f / a.v, p * (p - 1.0) * f / (a.v * a.v));
}

}  // namespace mbwave
