#pragma once

#include <cstdint>
#include <random>

namespace tcn {

using Rng = std::mt19937_64;

// Bounded draw used everywhere instead of std::uniform_int_distribution,
// whose output is not pinned by the standard across implementations.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    return n == 0 ? 0 : rng() % n;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
    constexpr double scale = 1.0 / 9007199254740992.0; // 2^53
    double u = static_cast<double>(rng() >> 11) * scale;
    return lo + u * (hi - lo);
}

} // namespace tcn
