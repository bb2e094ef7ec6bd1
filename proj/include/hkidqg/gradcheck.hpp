#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hkidqg {

struct GradCheckRow {
    int trial = 0;
    std::size_t t = 0, n = 0, d_v = 0, d_k = 0;
    // Largest relative error per tensor: |analytic - numeric| / max(|analytic|, |numeric|, floor).
    double w_h = 0.0, w_t = 0.0, w_v = 0.0, h_t = 0.0;
    bool pass = false;
};

struct GradCheckOptions {
    std::uint64_t seed = 0;
    int trials = 50;
    double step = 1e-4;
    double tolerance = 1e-4;
    double floor = 1e-6;
};

/// Compares fusion_backward against central differences of
/// L = sum(R * H_fuse) for random shapes T <= 5, n <= 4, d_k <= 8.
std::vector<GradCheckRow> gradcheck_fusion(const GradCheckOptions& opts);

std::string gradcheck_table(const std::vector<GradCheckRow>& rows);

}  // namespace hkidqg
