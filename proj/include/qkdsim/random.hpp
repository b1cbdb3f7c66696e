#pragma once

#include <cstdint>
#include <random>

#include "qkdsim/mixer.hpp"

namespace qkdsim {

// Seeded pseudo-random source threaded explicitly through every stochastic
// operation. Draws are derived from the raw mt19937_64 output (whose sequence
// is fixed by the standard), never from the implementation-defined
// std::*_distribution templates, so a seed reproduces across toolchains.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    int bit() { return static_cast<int>(engine_() >> 63); }

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    // Poisson(mu) by multiplicative inversion; mu must be in [0, 100].
    std::uint64_t poisson(double mu);

    // Independent child stream: seed = mix(parent seed, index).
    RandomStream split(std::uint64_t index) const { return RandomStream(mix(seed_, index)); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace qkdsim
