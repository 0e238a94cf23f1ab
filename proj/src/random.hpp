#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace oadr::detail {

// Unbiased draw in [0, bound) by rejection; avoids the implementation-defined
// std::uniform_int_distribution so draws match across standard libraries.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

}  // namespace oadr::detail
