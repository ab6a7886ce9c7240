#pragma once

#include <cstdint>
#include <random>

namespace couta {

// All randomness flows through these helpers so that runs are reproducible
// for a given seed independent of standard-library distribution internals.
using Rng = std::mt19937_64;

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    // n is tiny relative to 2^64; modulo bias is far below test resolution
    return static_cast<std::size_t>(rng() % n);
}

inline double uniform_real(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_real(rng);
}

inline double gaussian(Rng& rng, double mean = 0.0, double stddev = 1.0) {
    // Box-Muller, one draw per call kept for determinism
    double u1 = uniform_real(rng);
    double u2 = uniform_real(rng);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    return mean + stddev * z;
}

template <typename T>
inline void shuffle_inplace(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

}  // namespace couta
