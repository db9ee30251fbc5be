// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svf/camera.hpp"
#include "svf/grid.hpp"
#include "svf/image.hpp"
#include "svf/render.hpp"

namespace svf {

struct QueryEmbedding {
    std::string label;
    std::vector<float> vector;
};

// Per-voxel relevance of one query. Entries for unfused voxels are NaN.
struct QueryResult {
    std::string label;
    std::vector<double> raw;         // cosine similarity in [-1, 1]
    std::vector<double> normalized;  // min-max rescaled over fused voxels
};

struct VoxelMask {
    double threshold = 0.0;
    std::vector<std::size_t> voxels;  // ascending voxel indices
    std::vector<Vec3> centers;
};

// Cosine between two vectors; 0 when either has zero norm.
double cosine(std::span<const float> a, std::span<const float> b);

// raw_i = cos(F_i, q) over fused voxels, normalized = (raw - min)/(max - min),
// or 0.5 everywhere when raw is constant. Throws DomainError on a dimension
// mismatch, a zero query, or a grid without fused voxels.
QueryResult relevance(const SparseVoxelGrid& grid, const QueryEmbedding& query);

// Fused voxels whose normalized score is >= threshold.
VoxelMask mask3d(const SparseVoxelGrid& grid, const QueryResult& result, double threshold);

// Composites normalized scores along pixel rays exactly like color;
// unfused voxels contribute 0 but still occlude.
ImagePlane render_relevance(const SparseVoxelGrid& grid, const QueryResult& result, const Camera& camera,
                            const RenderOptions& options = {});

struct TransferResult {
    std::size_t classes = 0;
    std::vector<double> probabilities;  // points x classes, row-major
    std::vector<int> labels;
};

// Labels points from their K nearest fused voxels: per candidate a softmax
// over cosine logits against every class, blended with weights
// exp(-d^2 / 2) (d in meters). Throws DomainError for K < 1, no classes, or
// a grid without fused voxels.
TransferResult transfer_pointcloud(const SparseVoxelGrid& grid, std::span<const Vec3> points,
                                   std::span<const QueryEmbedding> classes, std::size_t k = 8);

struct MaskMetrics {
    double iou = 0.0;
    bool acc25_hit = false;
    double recall = 0.0;  // |pred & gt| / |gt|, 1 when gt is empty
};

// Masks are indicator vectors over one universe (voxels or pixels). Throws
// DomainError on a universe size mismatch.
MaskMetrics mask_metrics(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth);

// True when the maximum-relevance valid pixel lies inside the region.
bool localization_hit(const ImagePlane& relevance_map, std::span<const std::uint8_t> region);

struct QueryMetrics {
    std::string label;
    MaskMetrics mask;
    std::optional<bool> loc_hit;
};

struct AggregateMetrics {
    double miou = 0.0;
    double acc25 = 0.0;
    double macc = 0.0;     // mean per-query recall
    double loc_acc = 0.0;  // over queries that carry a localization result
};

AggregateMetrics aggregate(std::span<const QueryMetrics> queries);

// Mean per-class recall over classes present in the ground truth.
double mean_class_accuracy(std::span<const int> predicted, std::span<const int> truth);

// Replaces the color coefficients of the given voxels. `coefficients` holds
// either one RGB triple (higher bands are zeroed) or the grid's full SH
// block. Throws DomainError for unknown keys or a wrong coefficient count.
void edit_voxels(SparseVoxelGrid& grid, std::span<const VoxelKey> voxels, std::span<const float> coefficients);

}  // namespace svf
