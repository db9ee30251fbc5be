// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Geometry>

#include "svf/errors.hpp"
#include "svf/fuse3d.hpp"
#include "svf/morton.hpp"
#include "svf/parallel.hpp"
#include "support/fuse_oracle.hpp"

namespace svf {
namespace {

const Aabb kBox{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
using test::fuse_oracle;
using test::OracleResult;
using test::random_scene;
using test::RandomScene;

DepthMap filled(int w, int h, float v) {
    DepthMap m(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.set(x, y, v);
    return m;
}

FeatureMap constant_feature(int w, int h, const std::vector<float>& f) {
    FeatureMap m(w, h, int(f.size()));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.set(x, y, f);
    return m;
}

// Camera on the -z axis looking at the origin, with a principal point that
// puts the origin on the centre of pixel (8, 8).
Camera axis_camera(double distance) {
    Camera c;
    c.fx = c.fy = 20.0;
    c.cx = c.cy = 8.5;
    c.width = c.height = 17;
    c.translation = Vec3(0, 0, -distance);
    return c;
}

TEST(SpatialWeight, Examples) {
    EXPECT_DOUBLE_EQ(spatial_weight(2.0, 2.0, 0.1), 1.0);
    EXPECT_NEAR(spatial_weight(1.3, 1.0, 0.3), std::exp(-0.5), 1e-12);
    EXPECT_NEAR(spatial_weight(3.0, 2.5, 0.25), std::exp(-2.0), 1e-12);
    EXPECT_NEAR(spatial_weight(3.0, 2.5, 0.25), 0.1353, 1e-4);
    EXPECT_EQ(spatial_weight(1.0, std::nan(""), 0.25), 0.0);
}

TEST(Confidence, Examples) {
    DepthMap mesh = filled(3, 2, 2.0f), ren = filled(3, 2, 2.0f);
    ren.set(1, 0, 2.2f);  // |delta| = 2 sigma
    mesh.invalidate(2, 1);
    const ConfidenceMap c = confidence_map(mesh, ren, 0.1);
    EXPECT_FLOAT_EQ(c.scalar(0, 0), 1.0f);
    EXPECT_NEAR(c.scalar(1, 0), std::exp(-1.0), 1e-6);
    EXPECT_EQ(c.scalar(2, 1), 0.0f);
    EXPECT_EQ(c.valid_count(), 6u);
    EXPECT_THROW(confidence_map(mesh, filled(2, 2, 1.0f), 0.1), DomainError);
}

TEST(Visible, Examples) {
    ViewBundle v{axis_camera(2.0), constant_feature(17, 17, {1.0f}), filled(17, 17, 2.0f), filled(17, 17, 2.0f)};
    const double margin = 0.05;
    EXPECT_TRUE(visible(Vec3(0, 0, 0), v, margin));              // on the mesh surface
    EXPECT_FALSE(visible(Vec3(0, 0, -3), v, margin));            // behind the camera
    EXPECT_FALSE(visible(Vec3(0, 0, 10 * margin), v, margin));   // 10 margins behind the surface
    EXPECT_TRUE(visible(Vec3(0, 0, 0.5 * margin), v, margin));
    EXPECT_FALSE(visible(Vec3(5, 0, 0), v, margin));             // outside the frustum
    // Mesh invalid: the rendered depth decides; both invalid: hidden.
    v.depth_mesh.invalidate(8, 8);
    v.depth_ren.set(8, 8, 1.0f);
    EXPECT_FALSE(visible(Vec3(0, 0, 0), v, margin));
    v.depth_ren.invalidate(8, 8);
    EXPECT_FALSE(visible(Vec3(0, 0, -1.5), v, margin));
}

TEST(SampleBilinear, PixelCentresAndMidpoints) {
    FeatureMap m(2, 1, 1);
    m.set(0, 0, 1.0f);
    m.set(1, 0, 3.0f);
    EXPECT_FLOAT_EQ((*sample_bilinear(m, 0.5, 0.5))[0], 1.0f);
    EXPECT_FLOAT_EQ((*sample_bilinear(m, 1.0, 0.5))[0], 2.0f);
    EXPECT_FLOAT_EQ((*sample_bilinear(m, 1.5, 0.2))[0], 3.0f);
    m.invalidate(1, 0);
    EXPECT_FLOAT_EQ((*sample_bilinear(m, 1.0, 0.5))[0], 1.0f);
    EXPECT_FALSE(sample_bilinear(m, 3.0, 0.5).has_value());
}

SparseVoxelGrid single_voxel_at_origin() {
    // Level-1 cell (0,0,0) of [-1,1]^3 is centred at (-0.5,-0.5,-0.5); use a
    // box shifted so that a voxel centre lands on the origin.
    SparseVoxelGrid g(Aabb{Vec3(-0.5, -0.5, -0.5), Vec3(1.5, 1.5, 1.5)});
    g.insert(morton_encode(0, 0, 0, 1), CornerDensities{});
    EXPECT_NEAR(g.center(0).norm(), 0.0, 1e-12);
    return g;
}

TEST(Fuse, SingleViewOnSurface) {
    SparseVoxelGrid g = single_voxel_at_origin();
    const std::vector<float> f = {0.5f, -2.0f, 4.0f};
    ViewBundle v{axis_camera(2.0), constant_feature(17, 17, f), filled(17, 17, 2.0f), filled(17, 17, 2.0f)};
    FusionConfig cfg = FusionConfig::for_voxel_edge(0.1);
    cfg.eps = 1e-3;
    const FusionStats s = fuse(g, std::span(&v, 1), cfg);
    EXPECT_EQ(s.unfused, 0u);
    for (int c = 0; c < 3; ++c) EXPECT_FLOAT_EQ(g.feature(0)[c], float(f[c] / (1.0 + 1e-3)));
    EXPECT_FLOAT_EQ(g.weight_sum(0), 1.0f);
}

TEST(Fuse, TwoViewsEqualWeightsGiveMean) {
    SparseVoxelGrid g = single_voxel_at_origin();
    Camera c2 = axis_camera(2.0);
    c2.translation = Vec3(0, 0, 2.0);
    c2.rotation = Eigen::AngleAxisd(M_PI, Vec3::UnitY()).toRotationMatrix();
    // Same discrepancy in both views: equal non-unit weights.
    const std::vector<ViewBundle> views = {
        {axis_camera(2.0), constant_feature(17, 17, {1.0f, 0.0f}), filled(17, 17, 2.05f), filled(17, 17, 2.0f)},
        {c2, constant_feature(17, 17, {0.0f, 3.0f}), filled(17, 17, 2.05f), filled(17, 17, 2.0f)}};
    FusionConfig cfg = FusionConfig::for_voxel_edge(0.1);
    cfg.eps = 1e-3;
    fuse(g, views, cfg);
    const double w = spatial_weight(2.0, 2.05, cfg.beta) * std::exp(-0.05 / (2 * cfg.sigma_c));
    EXPECT_NEAR(g.weight_sum(0), 2 * w, 1e-6);
    EXPECT_NEAR(g.feature(0)[0], w * 1.0 / (2 * w + 1e-3), 1e-6);
    EXPECT_NEAR(g.feature(0)[1], w * 3.0 / (2 * w + 1e-3), 1e-6);
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1e-6, std::max(std::abs(a), std::abs(b))); }

TEST(Fuse, BatchSizesMatchMonolithicOracle) {
    const int dim = 6;
    RandomScene s = random_scene(17, dim);
    const FusionConfig base = FusionConfig::for_voxel_edge(s.grid.edge_at(4));
    const OracleResult oracle = fuse_oracle(s, base);
    std::size_t fused = 0;
    for (double w : oracle.weight) fused += w > 0;
    ASSERT_GT(fused, 50u);
    ASSERT_LT(fused, 200u);

    for (std::size_t batch : {std::size_t(1), std::size_t(7), std::size_t(200)}) {
        SparseVoxelGrid g = s.grid;
        FusionConfig cfg = base;
        cfg.batch_size = batch;
        const FusionStats st = fuse(g, s.views, cfg);
        EXPECT_EQ(st.batches, (200 + batch - 1) / batch);
        EXPECT_EQ(st.peak_accumulator_bytes, batch * (dim + 1) * sizeof(double));
        EXPECT_EQ(st.unfused, 200 - fused);
        for (std::size_t i = 0; i < g.size(); ++i) {
            EXPECT_EQ(g.fused(i), oracle.weight[i] > 0) << i;
            EXPECT_LE(rel_diff(g.weight_sum(i), oracle.weight[i]), 1e-5) << i;
            // Relative error of the voxel's feature vector.
            double norm = 0, diff = 0, ref = 0;
            for (int c = 0; c < dim; ++c) {
                const double d = g.feature(i)[c] - oracle.feature[i][c];
                diff += d * d;
                ref += oracle.feature[i][c] * oracle.feature[i][c];
                norm += double(g.feature(i)[c]) * g.feature(i)[c];
            }
            EXPECT_LE(std::sqrt(diff), 1e-5 * std::max(std::sqrt(ref), 1e-6)) << "voxel " << i << " batch " << batch;
            EXPECT_LE(std::sqrt(norm), oracle.max_sample_norm[i] + 1e-6);
        }
    }
}

TEST(Fuse, ThreadCountInvariant) {
    RandomScene s = random_scene(23, 4);
    FusionConfig cfg = FusionConfig::for_voxel_edge(s.grid.edge_at(4));
    cfg.batch_size = 16;
    SparseVoxelGrid a = s.grid, b = s.grid;
    set_num_threads(1);
    fuse(a, s.views, cfg);
    set_num_threads(3);
    fuse(b, s.views, cfg);
    set_num_threads(1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a.weight_sum(i), b.weight_sum(i));
        for (int c = 0; c < 4; ++c) EXPECT_EQ(a.feature(i)[c], b.feature(i)[c]);
    }
}

TEST(Fuse, ZeroConfidenceViewEqualsRemoval) {
    RandomScene s = random_scene(29, 3);
    const FusionConfig cfg = FusionConfig::for_voxel_edge(s.grid.edge_at(4));
    std::vector<ViewBundle> with = s.views;
    // Mesh depth invalid everywhere: confidence 0 in every pixel.
    with[1].depth_mesh = DepthMap(32, 32, 1);
    std::vector<ViewBundle> without = s.views;
    without.erase(without.begin() + 1);
    SparseVoxelGrid a = s.grid, b = s.grid;
    fuse(a, with, cfg);
    fuse(b, without, cfg);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a.weight_sum(i), b.weight_sum(i));
        for (int c = 0; c < 3; ++c) EXPECT_EQ(a.feature(i)[c], b.feature(i)[c]);
    }
}

TEST(Fuse, RaisingConfidenceMovesAlongChord) {
    Camera c2 = axis_camera(2.0);
    c2.translation = Vec3(0, 0, 2.0);
    c2.rotation = Eigen::AngleAxisd(M_PI, Vec3::UnitY()).toRotationMatrix();
    const std::vector<float> fa = {1.0f, 0.0f, 0.0f}, fb = {0.0f, 1.0f, 2.0f};
    const FusionConfig cfg = FusionConfig::for_voxel_edge(0.1);
    double last = -1.0;
    for (double conf : {0.0, 0.05, 0.2, 0.5, 0.8, 1.0}) {
        SparseVoxelGrid g = single_voxel_at_origin();
        DepthMap mesh_b = filled(17, 17, 2.0f);
        if (conf == 0.0) {
            mesh_b = DepthMap(17, 17, 1);
        } else {
            mesh_b = filled(17, 17, float(2.0 - 2 * cfg.sigma_c * std::log(conf)));
        }
        const std::vector<ViewBundle> views = {
            {axis_camera(2.0), constant_feature(17, 17, fa), filled(17, 17, 2.0f), filled(17, 17, 2.0f)},
            {c2, constant_feature(17, 17, fb), filled(17, 17, 2.0f), mesh_b}};
        fuse(g, views, cfg);
        // Position along the chord fa -> fb.
        double t = 0, len2 = 0;
        for (int c = 0; c < 3; ++c) {
            t += (g.feature(0)[c] - fa[c]) * (fb[c] - fa[c]);
            len2 += (fb[c] - fa[c]) * (fb[c] - fa[c]);
        }
        t /= len2;
        EXPECT_NEAR(t, conf / (1.0 + conf), 1e-5);
        EXPECT_GT(t, last);
        last = t;
    }
}

TEST(Fuse, Errors) {
    SparseVoxelGrid g = single_voxel_at_origin();
    const FusionConfig cfg = FusionConfig::for_voxel_edge(0.1);
    EXPECT_THROW(fuse(g, {}, cfg), DomainError);
    ViewBundle v{axis_camera(2.0), constant_feature(17, 17, {1.0f}), filled(17, 17, 2.0f), filled(17, 17, 2.0f)};
    SparseVoxelGrid empty(kBox);
    EXPECT_THROW(fuse(empty, std::span(&v, 1), cfg), DomainError);
    std::vector<ViewBundle> mixed = {v, v};
    mixed[1].feature = constant_feature(17, 17, {1.0f, 2.0f});
    EXPECT_THROW(fuse(g, mixed, cfg), DataError);
    ViewBundle bad = v;
    bad.depth_ren = filled(5, 5, 1.0f);
    EXPECT_THROW(fuse(g, std::span(&bad, 1), cfg), DataError);
    FusionConfig zero = cfg;
    zero.batch_size = 0;
    EXPECT_THROW(fuse(g, std::span(&v, 1), zero), DomainError);
    zero = cfg;
    zero.beta = 0.0;
    EXPECT_THROW(fuse(g, std::span(&v, 1), zero), DomainError);
}

}  // namespace
}  // namespace svf
