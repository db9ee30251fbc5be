// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "svf/camera.hpp"
#include "svf/geometry.hpp"
#include "svf/image.hpp"
#include "svf/mesh.hpp"

namespace svf {

inline constexpr std::uint32_t kMaxTsdfLevel = 19;

// Integer corner coordinate on the lattice of one octree level; each axis
// runs over [0, 2^level].
struct CornerCoord {
    std::int32_t x = 0, y = 0, z = 0;
    friend constexpr auto operator<=>(const CornerCoord&, const CornerCoord&) = default;
};

struct TsdfSample {
    float phi = 0.0f;     // truncated signed distance (m), positive in free space
    float weight = 0.0f;  // accumulated observation weight, > 0 when observed
};

// Sparse truncated signed distance field over the corner lattice of one
// level, stored in lazily allocated 8^3 bricks. Unobserved corners hold no
// value (weight 0).
class TsdfField {
public:
    static constexpr int kBrick = 8;

    TsdfField() = default;
    // Throws DomainError for a non-cubic box, level > 19 or trunc <= 0.
    TsdfField(const Aabb& bounds, std::uint32_t level, double trunc);

    const Aabb& bounds() const { return bounds_; }
    std::uint32_t level() const { return level_; }
    double trunc() const { return trunc_; }
    double edge() const;
    std::int32_t cells_per_axis() const { return std::int32_t{1} << level_; }
    bool in_lattice(const CornerCoord& c) const;
    Vec3 position(const CornerCoord& c) const;

    std::optional<TsdfSample> get(const CornerCoord& c) const;
    // Throws DomainError for corners off the lattice, weight <= 0, or
    // |phi| > trunc.
    void set(const CornerCoord& c, TsdfSample sample);
    void erase(const CornerCoord& c);
    std::size_t observed_count() const { return observed_; }
    bool empty() const { return observed_ == 0; }

    // Visits observed corners brick by brick in ascending brick key order.
    void for_each_observed(const std::function<void(const CornerCoord&, const TsdfSample&)>& fn) const;
    std::vector<CornerCoord> observed_corners() const;

    friend bool operator==(const TsdfField& a, const TsdfField& b);

private:
    struct Brick {
        std::array<float, kBrick * kBrick * kBrick> phi;
        std::array<float, kBrick * kBrick * kBrick> weight;
    };
    friend void integrate_depth(TsdfField&, const Camera&, const DepthMap&);

    static std::uint64_t brick_key(std::int32_t bx, std::int32_t by, std::int32_t bz);
    static Brick empty_brick();
    std::vector<std::uint64_t> sorted_brick_keys() const;

    Aabb bounds_;
    std::uint32_t level_ = 0;
    double trunc_ = 0.0;
    std::size_t observed_ = 0;
    std::unordered_map<std::uint64_t, Brick> bricks_;
};

// Projective update of every lattice corner that projects into a valid
// pixel: sd = depth(px) - |corner - camera center|; corners with
// sd > -trunc take a running mean of clamp(sd, -trunc, trunc) with unit
// observation weight.
void integrate_depth(TsdfField& field, const Camera& camera, const DepthMap& depth);

struct BlendOptions {
    double tau_q = 0.3;        // weight quantile used as the confidence pivot
    double temperature = 0.5;  // sigmoid temperature, relative to the pivot
};

// Lattice corner of a coarser level nearest to a fine corner.
CornerCoord nearest_coarse_corner(const CornerCoord& fine, std::uint32_t fine_level, std::uint32_t coarse_level);

// Fills unobserved and low-confidence fine corners from progressively
// coarser fields. For each coarse level, with tau the tau_q quantile of the
// observed fine weights and c' the nearest coarse corner:
//   fine unobserved            -> alpha = 0
//   coarse unobserved          -> alpha = 1
//   otherwise                  -> alpha = sigmoid((W_fine - tau) / (tau * T))
//   phi <- alpha * phi_fine + (1 - alpha) * phi_coarse(c'), clamped to trunc
// Weights blend with the same alpha. Throws DomainError on an empty fine
// field, coarse levels that are not strictly coarser, or bad options.
TsdfField blend_multilevel(const TsdfField& fine, std::span<const TsdfField> coarse_levels,
                           const BlendOptions& options = {});

// Marching cubes over cells whose eight corners are observed. Vertices sit
// at the linear zero crossing of each sign-changing edge and are shared
// between neighbouring cells; triangles wind counter-clockwise seen from
// the positive (free-space) side. Degenerate triangles are dropped.
TriangleMesh extract_mesh(const TsdfField& field);

// Edge lists of the 256 cube configurations. Bit j of the case index is set
// when corner j is inside (phi < 0). Edge e runs along axis e / 4 from the
// corner listed in mc_edge_corners(e)[0].
struct McCase {
    std::vector<std::array<std::uint8_t, 3>> triangles;
};
const McCase& mc_case(std::uint8_t inside_mask);
std::array<int, 2> mc_edge_corners(int edge);

}  // namespace svf
