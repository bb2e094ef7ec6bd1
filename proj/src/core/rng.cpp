#include "hkidqg/rng.hpp"

#include <cmath>
#include <numbers>

#include "hkidqg/error.hpp"

namespace hkidqg {

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal(double mean, double stddev) {
    if (has_spare_) {
        has_spare_ = false;
        return mean + stddev * spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return mean + stddev * r * std::cos(theta);
}

std::uint64_t Rng::uniform_int(std::uint64_t lo, std::uint64_t hi) {
    if (hi < lo) throw ConfigError("uniform_int: empty range");
    const std::uint64_t span = hi - lo;
    if (span == ~0ULL) return engine_();
    // Rejection sampling keeps the result unbiased and library-independent.
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = ~0ULL - (~0ULL % range);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return lo + x % range;
}

Matrix gaussian_init(std::size_t rows, std::size_t cols, Rng& rng, double mean, double stddev) {
    if (rows == 0 || cols == 0) throw ConfigError("gaussian_init: dimensions must be positive");
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.normal(mean, stddev);
    return m;
}

}  // namespace hkidqg
