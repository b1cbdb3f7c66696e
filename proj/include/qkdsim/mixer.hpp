#pragma once

#include <cstdint>

namespace qkdsim {

// SplitMix64 finalizer. A bijection on 64-bit words; used for seed splitting,
// the toy cipher keystream and its keyed checksum.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Two-word mix: mix(a, b) = mix64(a ^ mix64(b)).
constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) noexcept {
    return mix64(a ^ mix64(b));
}

}  // namespace qkdsim
