// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "svf/geometry.hpp"

namespace svf {

struct Neighbor {
    std::size_t index;
    double distance;
};

// Uniform hash grid over a fixed point set. Queries expand Chebyshev rings
// of cells around the query cell until the k-th best distance is strictly
// inside the searched radius, so results are exact.
class SpatialHash {
public:
    // Throws DomainError unless cell_size > 0.
    SpatialHash(std::vector<Vec3> points, double cell_size);

    std::size_t size() const { return points_.size(); }
    // Up to k neighbours ordered by (distance, index).
    std::vector<Neighbor> knn(const Vec3& query, std::size_t k) const;

private:
    struct Cell {
        std::int64_t x, y, z;
        bool operator==(const Cell&) const = default;
    };
    struct CellHash {
        std::size_t operator()(const Cell& c) const noexcept {
            return std::size_t(c.x * 73856093) ^ std::size_t(c.y * 19349663) ^ std::size_t(c.z * 83492791);
        }
    };
    Cell cell_of(const Vec3& p) const;

    std::vector<Vec3> points_;
    double cell_;
    Cell lo_{}, hi_{};
    std::unordered_map<Cell, std::vector<std::size_t>, CellHash> cells_;
};

}  // namespace svf
