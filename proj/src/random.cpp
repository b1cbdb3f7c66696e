#include "qkdsim/random.hpp"

#include <cmath>
#include <stdexcept>

namespace qkdsim {

std::uint64_t RandomStream::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("RandomStream::below: n must be positive");
    // Rejection sampling over the largest multiple of n.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
}

std::uint64_t RandomStream::poisson(double mu) {
    if (!(mu >= 0.0) || mu > 100.0)
        throw std::invalid_argument("RandomStream::poisson: mu must be in [0, 100]");
    if (mu == 0.0) return 0;
    // Knuth: count uniforms until their running product drops below e^-mu.
    // For mu > 30 the product is tracked in log space to avoid underflow.
    std::uint64_t k = 0;
    if (mu <= 30.0) {
        const double limit = std::exp(-mu);
        double p = uniform();
        while (p > limit) {
            ++k;
            p *= uniform();
        }
    } else {
        double log_p = 0.0;
        for (;;) {
            log_p += std::log1p(-uniform());
            if (log_p <= -mu) break;
            ++k;
        }
    }
    return k;
}

}  // namespace qkdsim
