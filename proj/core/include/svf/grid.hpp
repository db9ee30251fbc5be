// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "svf/camera.hpp"
#include "svf/geometry.hpp"
#include "svf/morton.hpp"

namespace svf {

using CornerDensities = std::array<float, 8>;

// Corner j sits at local offset (j & 1, (j >> 1) & 1, (j >> 2) & 1).
inline Vec3 corner_offset(int j) { return Vec3(j & 1, (j >> 1) & 1, (j >> 2) & 1); }

// Read-only geometric view of one voxel.
struct Voxel {
    VoxelKey key;
    Vec3 center;
    double size = 0.0;
    CornerDensities density{};

    Aabb box() const { return {center.array() - 0.5 * size, center.array() + 0.5 * size}; }
};

// Trilinear blend of the corner densities at p. Throws DomainError when p
// lies outside the closed cube (relative tolerance 1e-9).
double trilinear_density(const Voxel& voxel, const Vec3& p);
// Analytic gradient of the trilinear field (1/m^2).
Vec3 trilinear_gradient(const Voxel& voxel, const Vec3& p);
// Trilinear basis weights at local coordinates in [0,1]^3.
std::array<double, 8> trilinear_basis(const Vec3& local);

// Number of spherical-harmonic coefficients per color channel.
constexpr int sh_coefficient_count(int degree) { return (degree + 1) * (degree + 1); }

// RGB for a view direction: the degree-0 coefficient is the base color and
// higher bands add real SH terms. Clamped to [0, 1]. Degrees 0..3.
std::array<float, 3> evaluate_sh(std::span<const float> coeffs, int degree, const Vec3& dir);

// Hierarchical set of disjoint voxels in a cubic world box. The active key
// set is kept an antichain: no voxel may be an ancestor of another.
class SparseVoxelGrid {
public:
    SparseVoxelGrid() = default;
    // Throws DomainError unless bounds is a non-degenerate cube and
    // 0 <= sh_degree <= 3.
    explicit SparseVoxelGrid(const Aabb& bounds, int sh_degree = 0);

    const Aabb& bounds() const { return bounds_; }
    double extent() const { return bounds_.max.x() - bounds_.min.x(); }
    double edge_at(std::uint32_t level) const;
    int sh_degree() const { return sh_degree_; }
    int sh_stride() const { return 3 * sh_coefficient_count(sh_degree_); }

    std::size_t size() const { return keys_.size(); }
    bool empty() const { return keys_.empty(); }

    // Throws DomainError when the key is invalid, already present, or an
    // ancestor/descendant of an active voxel. Returns the voxel index.
    std::size_t insert(const VoxelKey& key, const CornerDensities& density, std::span<const float> sh = {});
    std::optional<std::size_t> find(const VoxelKey& key) const;
    bool would_conflict(const VoxelKey& key) const;

    const VoxelKey& key(std::size_t i) const { return keys_[i]; }
    const std::vector<VoxelKey>& keys() const { return keys_; }
    Voxel voxel(std::size_t i) const;
    Vec3 center(std::size_t i) const;
    double size_of(std::size_t i) const { return edge_at(keys_[i].level); }
    std::uint32_t finest_level() const { return finest_level_; }
    // Sorted, distinct levels present.
    std::vector<std::uint32_t> levels() const;

    const CornerDensities& density(std::size_t i) const { return density_[i]; }
    CornerDensities& density(std::size_t i) { return density_[i]; }
    std::span<const float> sh(std::size_t i) const { return {sh_.data() + i * sh_stride(), std::size_t(sh_stride())}; }
    std::span<float> sh(std::size_t i) { return {sh_.data() + i * sh_stride(), std::size_t(sh_stride())}; }

    // Feature channel. Allocating resets every feature and weight to zero.
    void allocate_features(std::size_t dim);
    std::size_t feature_dim() const { return feature_dim_; }
    std::span<const float> feature(std::size_t i) const {
        return {features_.data() + i * feature_dim_, feature_dim_};
    }
    std::span<float> feature(std::size_t i) { return {features_.data() + i * feature_dim_, feature_dim_}; }
    float weight_sum(std::size_t i) const { return weight_sum_[i]; }
    void set_weight_sum(std::size_t i, float w) { weight_sum_[i] = w; }
    bool fused(std::size_t i) const { return feature_dim_ > 0 && weight_sum_[i] > 0.0f; }
    std::size_t fused_count() const;

    // Reorders storage by (level, code).
    void sort_by_key();

private:
    Aabb bounds_;
    int sh_degree_ = 0;
    std::uint32_t finest_level_ = 0;
    std::size_t feature_dim_ = 0;
    std::vector<VoxelKey> keys_;
    std::vector<CornerDensities> density_;
    std::vector<float> sh_;
    std::vector<float> features_;
    std::vector<float> weight_sum_;
    std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> index_;
    // Count of active descendants for every strict ancestor of an active key.
    std::unordered_map<VoxelKey, std::uint32_t, VoxelKeyHash> ancestor_refs_;
};

// Sort key of a voxel seen from a camera: entry parameter of the ray from
// the camera center through the voxel center against the voxel box (0 when
// the camera is inside the box).
double ray_entry_distance(const Aabb& box, const Vec3& eye);

// Voxel indices ordered by ray_entry_distance, ties broken by (level, code).
std::vector<std::size_t> front_to_back_order(const SparseVoxelGrid& grid, const Camera& camera);

}  // namespace svf
