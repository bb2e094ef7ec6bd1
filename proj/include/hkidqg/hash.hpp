#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace hkidqg {

// 64-bit FNV-1a. Stable across platforms, unlike std::hash.
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes, std::uint64_t h = kFnvOffset) noexcept;
std::uint64_t fnv1a(std::string_view s, std::uint64_t h = kFnvOffset) noexcept;
std::uint64_t fnv1a_u64(std::uint64_t v, std::uint64_t h = kFnvOffset) noexcept;

// Finalizer from splitmix64; spreads seed/hash combinations.
std::uint64_t mix64(std::uint64_t x) noexcept;

std::string hex8(std::uint64_t h);

}  // namespace hkidqg
