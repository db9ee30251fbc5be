// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

// Stage glue shared by the command-line tool and the end-to-end tests:
// depth maps -> multi-level TSDF -> voxel grid, and grid + mesh -> fusion
// inputs.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "svf/fuse3d.hpp"
#include "svf/grid.hpp"
#include "svf/mesh.hpp"
#include "svf/render.hpp"
#include "svf/tsdf.hpp"

namespace svf {

struct BuildConfig {
    std::uint32_t level = 7;
    std::uint32_t coarse_levels = 2;  // extra coarser fields blended into the fine one
    double trunc_voxels = 4.0;        // truncation distance in fine voxel edges
    double density_scale = 10.0;      // interior density, per fine voxel edge
    double density_width = 0.25;      // density ramp width, in fine voxel edges
    int sh_degree = 0;
    BlendOptions blend;

    double trunc(const Aabb& bounds) const;
    // Throws DomainError on out-of-range values.
    void validate() const;
};

// Integrates every view at the fine level and at each coarse level. The
// fine field comes first; all levels share the fine truncation distance.
std::vector<TsdfField> integrate_levels(const Aabb& bounds, std::span<const Camera> cameras,
                                        std::span<const DepthMap> depths, const BuildConfig& cfg);

// Fine field blended with its coarse levels.
TsdfField build_tsdf(const Aabb& bounds, std::span<const Camera> cameras, std::span<const DepthMap> depths,
                     const BuildConfig& cfg);

// Corner density for a signed distance: scale / edge * sigmoid(-phi / width).
float tsdf_density(double phi, double edge, const BuildConfig& cfg);

// Activates every cell with a corner strictly inside the truncation band
// (|phi| < trunc). Unobserved corners count as interior (phi = -trunc).
// Colors are mid gray.
SparseVoxelGrid voxelize(const TsdfField& field, const BuildConfig& cfg);

// Renders the grid and ray-casts the mesh for every camera. Features are
// moved into the bundles.
std::vector<ViewBundle> prepare_views(const SparseVoxelGrid& grid, const TriangleMesh& mesh,
                                      std::span<const Camera> cameras, std::vector<FeatureMap> features,
                                      const RenderOptions& options = {});

}  // namespace svf
