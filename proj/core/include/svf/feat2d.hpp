// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "svf/image.hpp"

namespace svf {

// Feature plane of one crop, already resampled to the crop's pixel size,
// placed at `anchor_x, anchor_y` (top-left, full-image pixels).
struct CropFeature {
    int anchor_x = 0;
    int anchor_y = 0;
    FeatureMap feature;
};

// Gaussian-weighted stitching of overlapping crops. Each crop's kernel is
// centred on the crop and peaks at 1:
//   F(u) = sum_k G_k(u) F_k(u - c_k) / (sum_k G_k(u) + eps)
// Only valid crop pixels contribute; pixels no valid sample reaches stay
// invalid. Throws DomainError naming the first pixel outside every crop,
// on channel mismatch, or on crops outside the image.
FeatureMap gaussian_window_blend(const std::vector<CropFeature>& crops, int out_width, int out_height,
                                 double sigma_g, double eps = 1e-8);

// Default bandwidth for a crop: a quarter of its larger side.
double default_crop_sigma(int crop_width, int crop_height);

struct CropRect {
    int x = 0, y = 0, width = 0, height = 0;
};

// Square crops of side min(crop_size, image side) stepping by half a crop,
// with a final crop flush against the right/bottom border.
std::vector<CropRect> crop_grid(int width, int height, int crop_size);

struct AttentionConfig {
    double cos_threshold = 0.0;  // pairs with cos <= threshold are masked
    int iterations = 2;
    int token_stride = 4;

    void validate() const;
};

// Recursive thresholded-cosine self-attention over tokens sampled on a
// stride lattice. Every iteration replaces token i by
//   sum_j A_ij t_j / sum_j A_ij,  A_ij = cos(t_i, t_j) if > threshold else 0
// with raw (unnormalised) values. Pixels take the bilinear blend of the
// surrounding lattice tokens. Throws DomainError on a zero-norm token.
FeatureMap scra(const FeatureMap& feature, const AttentionConfig& cfg = {});

// One global pass of the same aggregation, applied after scra.
FeatureMap scga(const FeatureMap& feature, const AttentionConfig& cfg = {});

}  // namespace svf
