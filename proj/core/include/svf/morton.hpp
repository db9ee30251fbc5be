// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>

namespace svf {

inline constexpr std::uint32_t kMaxLevel = 21;

// Octree cell address: depth plus the bit-interleaved cell coordinate.
struct VoxelKey {
    std::uint32_t level = 0;
    std::uint64_t code = 0;

    friend constexpr auto operator<=>(const VoxelKey&, const VoxelKey&) = default;
};

struct CellCoord {
    std::uint32_t x = 0, y = 0, z = 0;
    friend constexpr bool operator==(const CellCoord&, const CellCoord&) = default;
};

// x lands in bit 0 of every 3-bit group, y in bit 1, z in bit 2.
// Throws DomainError when level > 21 or a coordinate is >= 2^level.
VoxelKey morton_encode(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz, std::uint32_t level);
CellCoord morton_decode(const VoxelKey& key);

// Throws DomainError unless code < 8^level and level <= 21.
void validate_key(const VoxelKey& key);

inline VoxelKey parent_key(const VoxelKey& key) { return {key.level - 1, key.code >> 3}; }

// True when a is a strict octree ancestor of b.
inline bool is_ancestor(const VoxelKey& a, const VoxelKey& b) {
    return a.level < b.level && (b.code >> (3 * (b.level - a.level))) == a.code;
}

struct VoxelKeyHash {
    std::size_t operator()(const VoxelKey& k) const noexcept {
        std::uint64_t h = k.code * 0x9E3779B97F4A7C15ull ^ (std::uint64_t{k.level} << 58);
        h ^= h >> 31;
        return static_cast<std::size_t>(h);
    }
};

}  // namespace svf
