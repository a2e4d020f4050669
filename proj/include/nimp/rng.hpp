#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nimp {

// mt19937_64 with hand-rolled conversions. The engine's bit stream is fixed by
// the standard, while std distributions are not; doing the conversions here
// keeps seeded runs reproducible across compilers.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n). n must be > 0.
    uint64_t uniform_index(uint64_t n) {
        // Rejection sampling on the top bits keeps the draw unbiased.
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do { x = eng_(); } while (x >= limit);
        return x % n;
    }

    // Standard normal via Box-Muller (one value per call, cached pair).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do { u1 = uniform01(); } while (u1 <= 0.0);
        u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace nimp
