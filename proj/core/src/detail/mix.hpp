#ifndef SLICEFIND_DETAIL_MIX_HPP
#define SLICEFIND_DETAIL_MIX_HPP

#include <cstdint>

namespace slicefind::detail {

/// Seed combiner for derived RNG streams (per-slice noise draws and the
/// like); fixed constants keep every derived stream reproducible.
inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
    x ^= x >> 33;
    x *= 0xFF51AFD7ED558CCDULL;
    x ^= x >> 33;
    return x;
}

} // namespace slicefind::detail

#endif
