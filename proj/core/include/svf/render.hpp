// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "svf/camera.hpp"
#include "svf/grid.hpp"
#include "svf/image.hpp"

namespace svf {

struct RenderOptions {
    int samples_per_interval = 1;   // density quadrature points per voxel interval
    double alpha_valid_min = 0.5;   // depth/normal pixels below this alpha are invalid
    double min_transmittance = 1e-6;  // stop marching once T drops below this
};

struct RenderOutput {
    ColorMap color;
    DepthMap depth;
    AlphaMap alpha;
    NormalMap normal;
};

// Forward part (t >= 0) of the ray against the voxel cube. `dir` must be
// unit length.
std::optional<Interval> ray_voxel_interval(const Vec3& origin, const Vec3& dir, const Voxel& voxel);

struct RayHit {
    std::size_t voxel;
    Interval interval;
};

// Walks the voxels pierced by a ray in front-to-back order with a 3D DDA
// over the finest level present in the grid.
class VoxelRayCaster {
public:
    explicit VoxelRayCaster(const SparseVoxelGrid& grid);

    // visit returns false to stop the walk.
    void trace(const Vec3& origin, const Vec3& dir, const std::function<bool(const RayHit&)>& visit) const;
    std::vector<RayHit> trace_all(const Vec3& origin, const Vec3& dir) const;

private:
    std::optional<std::size_t> lookup(std::uint32_t x, std::uint32_t y, std::uint32_t z) const;

    const SparseVoxelGrid& grid_;
    std::uint32_t level_ = 0;
    std::vector<std::uint32_t> levels_desc_;
    std::vector<std::uint64_t> occupancy_;  // finest-level cell bitset, empty when too large
};

// One alpha-compositing term: weight = T_j * alpha_j.
struct Contribution {
    std::size_t voxel;
    Interval interval;
    double alpha;
    double weight;
};

// Composites a ray front to back: alpha_j = 1 - exp(-mean_sigma_j * delta_j)
// with mean_sigma_j the average of `samples_per_interval` trilinear samples
// uniformly spaced inside the interval. Returns the accumulated alpha.
double composite_ray(const SparseVoxelGrid& grid, const VoxelRayCaster& caster, const Vec3& origin,
                     const Vec3& dir, const RenderOptions& options,
                     const std::function<void(const Contribution&)>& emit);

// Color, depth (alpha-normalised distance to voxel centers), alpha and
// composited normals for every pixel of the camera.
RenderOutput render(const SparseVoxelGrid& grid, const Camera& camera, const RenderOptions& options = {});

}  // namespace svf
