// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include "svf/knn.hpp"

#include <algorithm>
#include <cmath>

#include "svf/errors.hpp"

namespace svf {

SpatialHash::SpatialHash(std::vector<Vec3> points, double cell_size) : points_(std::move(points)), cell_(cell_size) {
    if (!(cell_size > 0.0)) throw DomainError("SpatialHash: cell size must be positive");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const Cell c = cell_of(points_[i]);
        if (i == 0) {
            lo_ = hi_ = c;
        } else {
            lo_ = {std::min(lo_.x, c.x), std::min(lo_.y, c.y), std::min(lo_.z, c.z)};
            hi_ = {std::max(hi_.x, c.x), std::max(hi_.y, c.y), std::max(hi_.z, c.z)};
        }
        cells_[c].push_back(i);
    }
}

SpatialHash::Cell SpatialHash::cell_of(const Vec3& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x() / cell_)), static_cast<std::int64_t>(std::floor(p.y() / cell_)),
            static_cast<std::int64_t>(std::floor(p.z() / cell_))};
}

std::vector<Neighbor> SpatialHash::knn(const Vec3& query, std::size_t k) const {
    std::vector<Neighbor> found;
    if (k == 0 || points_.empty()) return found;
    const Cell q = cell_of(query);
    auto by_distance = [](const Neighbor& a, const Neighbor& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
    };
    // Ring radius beyond which every occupied cell has been visited.
    const std::int64_t max_ring = std::max({std::abs(q.x - lo_.x), std::abs(q.x - hi_.x), std::abs(q.y - lo_.y),
                                            std::abs(q.y - hi_.y), std::abs(q.z - lo_.z), std::abs(q.z - hi_.z)});
    auto visit = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
        auto it = cells_.find({x, y, z});
        if (it == cells_.end()) return;
        for (std::size_t i : it->second) found.push_back({i, (points_[i] - query).norm()});
    };
    for (std::int64_t r = 0;; ++r) {
        for (std::int64_t dz = -r; dz <= r; ++dz) {
            for (std::int64_t dy = -r; dy <= r; ++dy) {
                const bool face = std::abs(dz) == r || std::abs(dy) == r;
                if (face) {
                    for (std::int64_t dx = -r; dx <= r; ++dx) visit(q.x + dx, q.y + dy, q.z + dz);
                } else {
                    visit(q.x - r, q.y + dy, q.z + dz);
                    if (r > 0) visit(q.x + r, q.y + dy, q.z + dz);
                }
            }
        }
        if (found.size() >= k) {
            std::nth_element(found.begin(), found.begin() + (k - 1), found.end(), by_distance);
            if (found[k - 1].distance < double(r) * cell_) break;
        }
        if (r >= max_ring) break;
    }
    std::sort(found.begin(), found.end(), by_distance);
    if (found.size() > k) found.resize(k);
    return found;
}

}  // namespace svf
