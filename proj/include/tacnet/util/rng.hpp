#pragma once

#include <cmath>
#include <cstdint>

namespace tacnet {

/**
 * Seeded RNG with the distribution mappings spelled out, so a given seed
 * produces the same stream on every toolchain (std:: distributions are
 * implementation-defined and would break golden outputs).
 *
 * Core generator is splitmix64.
 */
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Marsaglia polar method; one spare cached.
    double gaussian(double mean, double sigma) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + sigma * spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return mean + sigma * u * m;
    }

private:
    uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace tacnet
