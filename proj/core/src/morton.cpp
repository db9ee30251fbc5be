// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include "svf/morton.hpp"

#include <string>

#include "svf/errors.hpp"

namespace svf {

namespace {

std::uint64_t spread_bits(std::uint64_t v) {
    v &= 0x1fffff;
    v = (v | v << 32) & 0x1f00000000ffffull;
    v = (v | v << 16) & 0x1f0000ff0000ffull;
    v = (v | v << 8) & 0x100f00f00f00f00full;
    v = (v | v << 4) & 0x10c30c30c30c30c3ull;
    v = (v | v << 2) & 0x1249249249249249ull;
    return v;
}

std::uint32_t compact_bits(std::uint64_t v) {
    v &= 0x1249249249249249ull;
    v = (v ^ (v >> 2)) & 0x10c30c30c30c30c3ull;
    v = (v ^ (v >> 4)) & 0x100f00f00f00f00full;
    v = (v ^ (v >> 8)) & 0x1f0000ff0000ffull;
    v = (v ^ (v >> 16)) & 0x1f00000000ffffull;
    v = (v ^ (v >> 32)) & 0x1fffffull;
    return static_cast<std::uint32_t>(v);
}

}  // namespace

VoxelKey morton_encode(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz, std::uint32_t level) {
    if (level > kMaxLevel) throw DomainError("morton_encode: level " + std::to_string(level) + " exceeds 21");
    const std::uint64_t limit = std::uint64_t{1} << level;
    if (ix >= limit || iy >= limit || iz >= limit) {
        throw DomainError("morton_encode: cell (" + std::to_string(ix) + "," + std::to_string(iy) + "," +
                          std::to_string(iz) + ") outside level " + std::to_string(level));
    }
    return {level, spread_bits(ix) | spread_bits(iy) << 1 | spread_bits(iz) << 2};
}

CellCoord morton_decode(const VoxelKey& key) {
    return {compact_bits(key.code), compact_bits(key.code >> 1), compact_bits(key.code >> 2)};
}

void validate_key(const VoxelKey& key) {
    if (key.level > kMaxLevel) throw DomainError("voxel key level exceeds 21");
    if ((key.code >> (3 * key.level)) != 0) {
        throw DomainError("voxel key code out of range for its level");
    }
}

}  // namespace svf
