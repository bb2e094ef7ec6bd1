#pragma once

// Data-parallel inner loops used by the dense matrix code. Each kernel has a
// portable scalar reference and, on x86-64, an AVX2+FMA variant. The active
// table is chosen once per process from CPUID; setting HKIDQG_KERNELS=scalar
// in the environment forces the reference path.

#include <cstddef>
#include <string_view>

namespace hkidqg::kernels {

struct KernelTable {
    std::string_view name;
    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n) noexcept;
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n) noexcept;
    // x[i] *= alpha
    void (*scale)(double alpha, double* x, std::size_t n) noexcept;
    // out[i] = base[i] + gate[i] * value[i]
    void (*gated_add)(const double* base, const double* gate, const double* value, double* out,
                      std::size_t n) noexcept;
    // max_i x[i]; n >= 1
    double (*max)(const double* x, std::size_t n) noexcept;
    // sum_i x[i]
    double (*sum)(const double* x, std::size_t n) noexcept;
};

const KernelTable& scalar_table() noexcept;
// nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_table() noexcept;

bool cpu_has_avx2_fma() noexcept;

/// The table selected for this process.
const KernelTable& active() noexcept;

}  // namespace hkidqg::kernels
