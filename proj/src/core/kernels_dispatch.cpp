#include <cstdlib>
#include <string_view>

#include "hkidqg/kernels.hpp"

namespace hkidqg::kernels {

bool cpu_has_avx2_fma() noexcept {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

const KernelTable& select() noexcept {
    const char* force = std::getenv("HKIDQG_KERNELS");
    if (force != nullptr && std::string_view(force) == "scalar") return scalar_table();
    if (const KernelTable* t = avx2_table(); t != nullptr && cpu_has_avx2_fma()) return *t;
    return scalar_table();
}

}  // namespace

const KernelTable& active() noexcept {
    static const KernelTable& table = select();
    return table;
}

}  // namespace hkidqg::kernels
