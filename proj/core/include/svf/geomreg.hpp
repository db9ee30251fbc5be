// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "svf/image.hpp"

namespace svf {

struct PatchSpec {
    int size = 8;
    int stride = 8;
    double eps_std = 1e-6;

    void validate() const;
};

// Mean over fully valid patches of the squared L2 distance between the
// patch-standardised depths (D - mu) / max(sigma, eps_std), population
// sigma. Throws DomainError on a size mismatch or when no patch is fully
// valid in both maps.
double patch_depth_loss(const DepthMap& rendered, const DepthMap& prior, const PatchSpec& spec = {});

// Mean of 1 - n_ren . n_prior over jointly valid pixels.
double normal_loss(const NormalMap& rendered, const NormalMap& prior);

}  // namespace svf
