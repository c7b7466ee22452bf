#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mbwave {

// mt19937_64 is specified bit-for-bit by the standard; the std distributions are not,
// so the conversions to double are done here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : g_(seed) {}

    double uniform() { return static_cast<double>(g_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double rad = std::sqrt(-2.0 * std::log(u1));
        double ang = 2.0 * M_PI * u2;
        spare_ = rad * std::sin(ang);
        has_spare_ = true;
        return rad * std::cos(ang);
    }

    std::uint64_t next() { return g_(); }

private:
    std::mt19937_64 g_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace mbwave
