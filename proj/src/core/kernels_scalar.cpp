#include "hkidqg/kernels.hpp"

namespace hkidqg::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) noexcept {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, double* x, std::size_t n) noexcept {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void gated_add_scalar(const double* base, const double* gate, const double* value, double* out,
                      std::size_t n) noexcept {
    for (std::size_t i = 0; i < n; ++i) out[i] = base[i] + gate[i] * value[i];
}

double max_scalar(const double* x, std::size_t n) noexcept {
    double m = x[0];
    for (std::size_t i = 1; i < n; ++i)
        if (x[i] > m) m = x[i];
    return m;
}

double sum_scalar(const double* x, std::size_t n) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
}

constexpr KernelTable kScalar{
    "scalar", dot_scalar, axpy_scalar, scale_scalar, gated_add_scalar, max_scalar, sum_scalar,
};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace hkidqg::kernels
