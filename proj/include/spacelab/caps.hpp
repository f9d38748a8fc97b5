#pragma once

#include <cstddef>
#include <cstdint>

namespace spacelab {

/// Bitset over at most 64 poset elements.
using Mask = std::uint64_t;
inline constexpr std::size_t kMaskBits = 64;

/// Size caps. Exceeding any of them raises ErrorKind::SizeCap.
struct Caps {
    std::size_t max_poset = 6;         // posets given as input or generated in catalogs
    std::size_t max_double_power = 4;  // |X| for which P(X) may be materialized
    std::size_t max_elements = 4096;   // posets produced by constructions (products, P(X), ...)
    std::size_t max_lattice = 1 << 16; // elements of one up-set lattice
    std::size_t max_hom = 1 << 21;     // maps materialized by one hom-set enumeration
};

inline const Caps& default_caps()
{
    static const Caps caps{};
    return caps;
}

} // namespace spacelab
