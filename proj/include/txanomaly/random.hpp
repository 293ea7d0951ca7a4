#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>

namespace txanomaly {

// std::mt19937_64 output is fully specified by the standard; the std distributions are not.
// These helpers keep seeded streams identical across standard libraries.

inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform in [0, n); n must be positive.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n)));
}

/// Uniform integer in [lo, hi].
inline std::size_t uniform_between(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return lo + uniform_index(rng, hi - lo + 1);
}

}  // namespace txanomaly
