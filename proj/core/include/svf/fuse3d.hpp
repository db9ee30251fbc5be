// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "svf/camera.hpp"
#include "svf/grid.hpp"
#include "svf/image.hpp"

namespace svf {

// Everything fusion needs from one posed view.
struct ViewBundle {
    Camera camera;
    FeatureMap feature;
    DepthMap depth_ren;   // rendered from the voxel grid
    DepthMap depth_mesh;  // ray-cast from the extracted mesh

    // Throws DataError when a map does not match the camera size.
    void validate() const;
};

struct FusionConfig {
    double beta = 0.0;              // spatial bandwidth (m)
    double sigma_c = 0.0;           // confidence decay (m)
    double eps = 1e-8;
    double occlusion_margin = 0.0;  // m
    std::size_t batch_size = 4096;  // voxels per batch

    // Defaults scaled to a voxel edge: beta = 2h, sigma_c = h, margin = 2h.
    static FusionConfig for_voxel_edge(double edge);
    void validate() const;
};

// exp(-(z - d_ren)^2 / (2 beta^2)); 0 when d_ren is not finite.
double spatial_weight(double z, double d_ren, double beta);

// exp(-|d_mesh - d_ren| / (2 sigma_c)) per pixel, 0 where either depth is
// invalid. Every pixel of the result is valid.
ConfidenceMap confidence_map(const DepthMap& d_mesh, const DepthMap& d_ren, double sigma_c);

// Center projects into the image with positive camera depth and its
// distance to the camera does not exceed the mesh depth (falling back to the
// rendered depth) at that pixel plus `margin`.
bool visible(const Vec3& center, const ViewBundle& view, double margin);
inline bool visible(const Voxel& voxel, const ViewBundle& view, double margin) {
    return visible(voxel.center, view, margin);
}

// Bilinear sample at continuous pixel coordinates using pixel centers;
// invalid taps are skipped and the rest renormalised. Nothing when no tap
// is valid or the point is off the image.
std::optional<std::vector<float>> sample_bilinear(const FeatureMap& map, double u, double v);

struct FusionStats {
    std::size_t batches = 0;
    std::size_t peak_accumulator_bytes = 0;  // largest per-batch accumulator footprint
    std::size_t unfused = 0;
    std::vector<double> view_mean_confidence;
};

// Confidence-weighted multi-view feature fusion:
//   F_i = sum_k w_ik f_ik / (sum_k w_ik + eps),
//   w_ik = spatial_weight(|x_i - o_k|, D_ren,k(px), beta) * conf_k(px)
// over views where the voxel is visible. Voxels are processed in disjoint
// batches of `batch_size`; views are streamed per batch in list order, so
// every voxel sees the same summation order for any batch size or thread
// count. Allocates the grid feature channel (dimension of the first view).
// Throws DomainError for an empty view list or grid, DataError for
// inconsistent views.
FusionStats fuse(SparseVoxelGrid& grid, std::span<const ViewBundle> views, const FusionConfig& cfg);

}  // namespace svf
