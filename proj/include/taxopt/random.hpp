#ifndef TAXOPT_RANDOM_HPP
#define TAXOPT_RANDOM_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>

namespace taxopt {

// The standard distributions are implementation-defined, so every draw goes
// through these helpers to keep runs bitwise reproducible across toolchains.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi)
{
    return lo + (hi - lo) * uniform01(rng);
}

// Unbiased integer in [0, n) by rejection.
inline std::size_t uniform_index(Rng& rng, std::size_t n)
{
    const std::uint64_t range = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x = rng();
    while (x >= limit) {
        x = rng();
    }
    return static_cast<std::size_t>(x % range);
}

} // namespace taxopt

#endif
