#pragma once

#include <cstdint>
#include <random>

#include "hkidqg/matrix.hpp"

namespace hkidqg {

/// Deterministic generator: std::mt19937_64 (its output sequence is fixed by
/// the C++ standard) with uniform and normal transforms implemented here, so
/// draws are identical across standard libraries and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t next_u64() { return engine_(); }
    // Uniform in [0, 1) with 53 random bits.
    double uniform();
    // Box-Muller; the second variate of each pair is cached.
    double normal(double mean = 0.0, double stddev = 1.0);
    // Uniform integer in [lo, hi].
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

Matrix gaussian_init(std::size_t rows, std::size_t cols, Rng& rng, double mean = 0.0,
                     double stddev = 0.02);

}  // namespace hkidqg
