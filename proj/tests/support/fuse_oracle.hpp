// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

// Test-side fusion oracle shared by the unit and acceptance tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "svf/fuse3d.hpp"
#include "svf/morton.hpp"

namespace svf::test {

// Random scene: 200 level-4 voxels seen by four cameras whose depth maps
// scatter around the voxel distances, so visibility, spatial weights and
// confidence all vary.
struct RandomScene {
    SparseVoxelGrid grid;
    std::vector<ViewBundle> views;
};

inline RandomScene random_scene(std::uint64_t seed, int dim) {
    std::mt19937_64 rng(seed);
    RandomScene s{SparseVoxelGrid(Aabb{Vec3(-1, -1, -1), Vec3(1, 1, 1)}), {}};
    std::uniform_int_distribution<std::uint32_t> cell(0, 15);
    std::set<std::uint64_t> used;
    while (s.grid.size() < 200) {
        const VoxelKey k = morton_encode(cell(rng), cell(rng), cell(rng), 4);
        if (used.insert(k.code).second) s.grid.insert(k, CornerDensities{});
    }
    std::uniform_real_distribution<float> feat(-1.0f, 1.0f);
    std::uniform_real_distribution<float> jitter(-0.3f, 0.3f);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const Vec3 eyes[4] = {{0, 0, -3}, {3, 0.2, 0}, {-0.4, 3, 0.3}, {-2, -2, 1}};
    for (const Vec3& eye : eyes) {
        ViewBundle v;
        v.camera = Camera::look_at(eye, Vec3::Zero(), Vec3::UnitZ(), 24.0, 24.0, 32, 32);
        v.feature = FeatureMap(32, 32, dim);
        v.depth_ren = DepthMap(32, 32, 1);
        v.depth_mesh = DepthMap(32, 32, 1);
        std::vector<float> f(dim);
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) {
                for (float& c : f) c = feat(rng);
                v.feature.set(x, y, f);
                const float base = float(eye.norm()) + jitter(rng);
                if (u01(rng) > 0.05) v.depth_ren.set(x, y, base);
                if (u01(rng) > 0.1) v.depth_mesh.set(x, y, base + 0.5f * jitter(rng));
            }
        s.views.push_back(std::move(v));
    }
    return s;
}

// Monolithic single-pass oracle written from the fusion formula with its
// own projection and bilinear interpolation.
struct OracleResult {
    std::vector<std::vector<double>> feature;
    std::vector<double> weight;
    std::vector<double> max_sample_norm;
};

inline OracleResult fuse_oracle(const RandomScene& s, const FusionConfig& cfg) {
    const std::size_t n = s.grid.size();
    const int dim = s.views[0].feature.channels();
    OracleResult r{std::vector<std::vector<double>>(n, std::vector<double>(dim, 0.0)), std::vector<double>(n, 0.0),
                   std::vector<double>(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 x = s.grid.center(i);
        for (const ViewBundle& v : s.views) {
            const Camera& c = v.camera;
            const Vec3 local = c.rotation.transpose() * (x - c.translation);
            if (local.z() <= 0) continue;
            const double u = c.fx * local.x() / local.z() + c.cx;
            const double w = c.fy * local.y() / local.z() + c.cy;
            if (u < 0 || w < 0 || u >= c.width || w >= c.height) continue;
            const int px = int(std::floor(u)), py = int(std::floor(w));
            const double dist = (x - c.translation).norm();
            const bool mesh_ok = v.depth_mesh.valid(px, py), ren_ok = v.depth_ren.valid(px, py);
            const double ref = mesh_ok ? v.depth_mesh.scalar(px, py) : ren_ok ? v.depth_ren.scalar(px, py) : -1e30;
            if (!(dist <= ref + cfg.occlusion_margin) || !ren_ok) continue;
            const double dr = v.depth_ren.scalar(px, py);
            const double conf = mesh_ok ? double(float(std::exp(-std::abs(double(v.depth_mesh.scalar(px, py)) - dr) /
                                                                (2 * cfg.sigma_c))))
                                        : 0.0;
            const double wt = std::exp(-(dist - dr) * (dist - dr) / (2 * cfg.beta * cfg.beta)) * conf;
            if (wt <= 0) continue;
            const double gx = std::clamp(u - 0.5, 0.0, c.width - 1.0), gy = std::clamp(w - 0.5, 0.0, c.height - 1.0);
            const int x0 = int(gx), y0 = int(gy);
            const int x1 = std::min(x0 + 1, c.width - 1), y1 = std::min(y0 + 1, c.height - 1);
            const double fx = gx - x0, fy = gy - y0;
            double norm = 0;
            for (int ch = 0; ch < dim; ++ch) {
                const double sample = (1 - fx) * (1 - fy) * v.feature.at(x0, y0)[ch] + fx * (1 - fy) * v.feature.at(x1, y0)[ch] +
                                      (1 - fx) * fy * v.feature.at(x0, y1)[ch] + fx * fy * v.feature.at(x1, y1)[ch];
                r.feature[i][ch] += wt * sample;
                norm += sample * sample;
            }
            r.weight[i] += wt;
            r.max_sample_norm[i] = std::max(r.max_sample_norm[i], std::sqrt(norm));
        }
        for (double& f : r.feature[i]) f = r.weight[i] > 0 ? f / (r.weight[i] + cfg.eps) : 0.0;
    }
    return r;
}

}  // namespace svf::test
