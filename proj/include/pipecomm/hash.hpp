#pragma once

#include <cstdint>
#include <string_view>

namespace pipecomm {

// FNV-1a 64-bit. Used for mask digests and per-group seed derivation; not
// cryptographic, just stable across platforms.
constexpr std::uint64_t kFnvBasis = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

constexpr std::uint64_t fnv1a64(std::uint8_t byte, std::uint64_t h) {
    return (h ^ byte) * kFnvPrime;
}

constexpr std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = kFnvBasis) {
    for (char c : s) h = fnv1a64(std::uint8_t(c), h);
    return h;
}

} // namespace pipecomm
