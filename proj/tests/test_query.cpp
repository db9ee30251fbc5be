// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "svf/errors.hpp"
#include "svf/formats.hpp"
#include "svf/knn.hpp"
#include "svf/morton.hpp"
#include "svf/query.hpp"

namespace svf {
namespace {

const Aabb kBox{Vec3(-1, -1, -1), Vec3(1, 1, 1)};

// Grid of level-3 voxels along x with the given features; a zero weight
// leaves the voxel unfused.
SparseVoxelGrid feature_grid(const std::vector<std::vector<float>>& features, const std::vector<float>& weights = {}) {
    SparseVoxelGrid g(kBox);
    for (std::size_t i = 0; i < features.size(); ++i) g.insert(morton_encode(std::uint32_t(i), 0, 0, 3), {});
    g.allocate_features(features.front().size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        std::copy(features[i].begin(), features[i].end(), g.feature(i).begin());
        g.set_weight_sum(i, weights.empty() ? 1.0f : weights[i]);
    }
    return g;
}

// Unit 2D feature with cosine c to (1, 0).
std::vector<float> with_cos(double c) { return {float(c), float(std::sqrt(1 - c * c))}; }

TEST(Cosine, Basics) {
    const std::vector<float> a = {1, 0}, b = {0, 2}, c = {3, 3}, z = {0, 0};
    EXPECT_DOUBLE_EQ(cosine(a, a), 1.0);
    EXPECT_DOUBLE_EQ(cosine(a, b), 0.0);
    EXPECT_NEAR(cosine(a, c), std::sqrt(0.5), 1e-12);
    EXPECT_EQ(cosine(a, z), 0.0);
}

TEST(Relevance, Examples) {
    const QueryEmbedding q{"q", {1, 0}};
    const QueryResult parallel = relevance(feature_grid({{2, 0}, {0.5, 0}}), q);
    for (double r : parallel.raw) EXPECT_NEAR(r, 1.0, 1e-12);
    for (double n : parallel.normalized) EXPECT_EQ(n, 0.5);

    const QueryResult two = relevance(feature_grid({{3, 0}, {0, 1}}), q);
    EXPECT_NEAR(two.raw[0], 1.0, 1e-12);
    EXPECT_NEAR(two.raw[1], 0.0, 1e-12);
    EXPECT_EQ(two.normalized[0], 1.0);
    EXPECT_EQ(two.normalized[1], 0.0);

    const QueryResult three = relevance(feature_grid({with_cos(0.2), with_cos(0.5), with_cos(0.8)}), q);
    EXPECT_NEAR(three.normalized[0], 0.0, 1e-6);
    EXPECT_NEAR(three.normalized[1], 0.5, 1e-6);
    EXPECT_NEAR(three.normalized[2], 1.0, 1e-6);
}

TEST(Relevance, UnfusedAreNaNAndExcludedFromNormalization) {
    const QueryEmbedding q{"q", {1, 0}};
    const QueryResult r = relevance(feature_grid({with_cos(0.2), with_cos(-1.0), with_cos(0.8)}, {1, 0, 1}), q);
    EXPECT_TRUE(std::isnan(r.raw[1]));
    EXPECT_TRUE(std::isnan(r.normalized[1]));
    EXPECT_NEAR(r.normalized[0], 0.0, 1e-9);
    EXPECT_NEAR(r.normalized[2], 1.0, 1e-9);
}

TEST(Relevance, Errors) {
    const SparseVoxelGrid g = feature_grid({{1, 0}});
    EXPECT_THROW(relevance(g, {"q", {1, 0, 0}}), DomainError);
    EXPECT_THROW(relevance(g, {"q", {0, 0}}), DomainError);
    EXPECT_THROW(relevance(feature_grid({{1, 0}}, {0}), {"q", {1, 0}}), DomainError);
}

SparseVoxelGrid random_feature_grid(std::mt19937_64& rng, int n, int dim, double unfused_fraction) {
    std::normal_distribution<float> nd;
    std::uniform_real_distribution<double> u01;
    std::vector<std::vector<float>> f(n, std::vector<float>(dim));
    std::vector<float> w(n);
    for (int i = 0; i < n; ++i) {
        for (float& v : f[i]) v = nd(rng);
        w[i] = u01(rng) < unfused_fraction ? 0.0f : 1.0f;
    }
    // feature_grid lays voxels along x; spread them over the cube instead.
    SparseVoxelGrid g(kBox);
    std::set<std::uint64_t> used;
    std::uniform_int_distribution<std::uint32_t> cell(0, 7);
    while (g.size() < std::size_t(n)) {
        const VoxelKey k = morton_encode(cell(rng), cell(rng), cell(rng), 3);
        if (used.insert(k.code).second) g.insert(k, {});
    }
    g.allocate_features(dim);
    for (int i = 0; i < n; ++i) {
        std::copy(f[i].begin(), f[i].end(), g.feature(i).begin());
        g.set_weight_sum(i, w[i]);
    }
    return g;
}

TEST(Relevance, ScaleAndQueryNormInvariance) {
    std::mt19937_64 rng(4);
    SparseVoxelGrid g = random_feature_grid(rng, 60, 8, 0.2);
    QueryEmbedding q{"q", {0.3f, -1.0f, 0.2f, 0.0f, 0.9f, 0.1f, -0.5f, 0.7f}};
    const QueryResult base = relevance(g, q);
    const VoxelMask base_mask = mask3d(g, base, 0.6);

    SparseVoxelGrid scaled = g;
    for (std::size_t i = 0; i < scaled.size(); ++i)
        for (float& v : scaled.feature(i)) v *= 4.0f;
    QueryEmbedding q2 = q;
    for (float& v : q2.vector) v *= 0.25f;
    for (const QueryResult& r : {relevance(scaled, q), relevance(g, q2)}) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (std::isnan(base.raw[i])) {
                EXPECT_TRUE(std::isnan(r.raw[i]));
                continue;
            }
            EXPECT_NEAR(r.raw[i], base.raw[i], 1e-12);
            EXPECT_NEAR(r.normalized[i], base.normalized[i], 1e-12);
        }
        EXPECT_EQ(mask3d(g, r, 0.6).voxels, base_mask.voxels);
    }
}

TEST(Mask3d, ExamplesAndMonotonicity) {
    const QueryEmbedding q{"q", {1, 0}};
    const SparseVoxelGrid g = feature_grid({with_cos(0.2), with_cos(0.9), with_cos(0.5), with_cos(0.95), with_cos(0.1)},
                                           {1, 1, 1, 1, 0});
    const QueryResult r = relevance(g, q);
    EXPECT_TRUE(mask3d(g, r, 1.01).voxels.empty());
    EXPECT_EQ(mask3d(g, r, 0.0).voxels, (std::vector<std::size_t>{0, 1, 2, 3}));
    // Normalized scores {0, 0.933, 0.4, 1}: 0.6 separates the upper group.
    const VoxelMask m = mask3d(g, r, 0.6);
    EXPECT_EQ(m.voxels, (std::vector<std::size_t>{1, 3}));
    ASSERT_EQ(m.centers.size(), 2u);
    EXPECT_EQ(m.centers[0], g.center(1));

    std::mt19937_64 rng(9);
    SparseVoxelGrid rg = random_feature_grid(rng, 120, 6, 0.3);
    const QueryResult rr = relevance(rg, {"q", {1, 1, 0, -1, 0, 2}});
    std::vector<std::size_t> prev = mask3d(rg, rr, 0.0).voxels;
    for (double t = 0.05; t <= 1.0; t += 0.05) {
        const std::vector<std::size_t> cur = mask3d(rg, rr, t).voxels;
        EXPECT_TRUE(std::includes(prev.begin(), prev.end(), cur.begin(), cur.end()));
        for (std::size_t i : cur) EXPECT_TRUE(rg.fused(i));
        prev = cur;
    }
}

TEST(RenderRelevance, UniformEmptyAndOpaque) {
    SparseVoxelGrid g(kBox);
    CornerDensities d;
    d.fill(3.0f);
    g.insert(morton_encode(0, 0, 0, 1), d);
    g.insert(morton_encode(1, 1, 1, 1), d);
    g.allocate_features(2);
    const Camera cam = Camera::look_at(Vec3(3, 2.5, 2), Vec3::Zero(), Vec3::UnitZ(), 30, 30, 40, 40);
    QueryResult uniform{"u", {0.7, 0.7}, {0.7, 0.7}};
    const ImagePlane img = render_relevance(g, uniform, cam);
    const RenderOutput ro = render(g, cam);
    std::size_t covered = 0;
    for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 40; ++x) {
            const float a = ro.alpha.scalar(x, y);
            covered += a > 0;
            EXPECT_NEAR(img.scalar(x, y), 0.7 * a, 1e-6);
        }
    EXPECT_GT(covered, 0u);

    const ImagePlane empty = render_relevance(SparseVoxelGrid(kBox), QueryResult{}, cam);
    for (float v : empty.values()) EXPECT_EQ(v, 0.0f);

    SparseVoxelGrid one(kBox);
    CornerDensities opaque;
    opaque.fill(1e6f);
    one.insert(morton_encode(0, 0, 0, 0), opaque);
    const Camera front = Camera::look_at(Vec3(0, 0, -3), Vec3::Zero(), Vec3::UnitY(), 10, 10, 8, 8);
    const ImagePlane full = render_relevance(one, QueryResult{"o", {1.0}, {1.0}}, front);
    // The 2 m cube fills the central pixels.
    EXPECT_NEAR(full.scalar(4, 4), 1.0, 1e-6);
    EXPECT_NEAR(full.scalar(3, 3), 1.0, 1e-6);
}

TEST(Knn, MatchesBruteForce) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Vec3> pts(300);
    for (auto& p : pts) p = Vec3(u(rng), u(rng), u(rng));
    // Exact duplicates exercise the index tie-break.
    pts[10] = pts[20];
    const SpatialHash hash(pts, 0.1);
    for (int q = 0; q < 100; ++q) {
        const Vec3 x = q == 0 ? pts[20] : Vec3(1.5 * u(rng), 1.5 * u(rng), 1.5 * u(rng));
        for (std::size_t k : {std::size_t(1), std::size_t(8), std::size_t(40)}) {
            std::vector<std::size_t> order(pts.size());
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                const double da = (pts[a] - x).norm(), db = (pts[b] - x).norm();
                return da != db ? da < db : a < b;
            });
            const auto got = hash.knn(x, k);
            ASSERT_EQ(got.size(), k);
            for (std::size_t j = 0; j < k; ++j) {
                EXPECT_EQ(got[j].index, order[j]);
                EXPECT_DOUBLE_EQ(got[j].distance, (pts[order[j]] - x).norm());
            }
        }
    }
    EXPECT_EQ(SpatialHash(std::vector<Vec3>(3, Vec3::Zero()), 1.0).knn(Vec3::Zero(), 10).size(), 3u);
    EXPECT_THROW(SpatialHash(pts, 0.0), DomainError);
}

// Exhaustive transfer oracle over fused voxels.
std::vector<std::vector<double>> transfer_oracle(const SparseVoxelGrid& g, const std::vector<Vec3>& points,
                                                 const std::vector<QueryEmbedding>& classes, std::size_t k) {
    std::vector<std::size_t> fused;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.fused(i)) fused.push_back(i);
    std::vector<std::vector<double>> out;
    for (const Vec3& p : points) {
        std::vector<std::size_t> order = fused;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double da = (g.center(a) - p).norm(), db = (g.center(b) - p).norm();
            return da != db ? da < db : a < b;
        });
        order.resize(std::min(k, order.size()));
        std::vector<double> score(classes.size(), 0.0);
        double wsum = 0;
        for (std::size_t v : order) {
            const double d = (g.center(v) - p).norm();
            const double w = std::exp(-0.5 * d * d);
            std::vector<double> logit(classes.size());
            double mx = -1e9;
            for (std::size_t c = 0; c < classes.size(); ++c) {
                double ab = 0, aa = 0, bb = 0;
                for (std::size_t j = 0; j < classes[c].vector.size(); ++j) {
                    ab += double(g.feature(v)[j]) * classes[c].vector[j];
                    aa += double(g.feature(v)[j]) * g.feature(v)[j];
                    bb += double(classes[c].vector[j]) * classes[c].vector[j];
                }
                logit[c] = ab / std::sqrt(aa * bb);
                mx = std::max(mx, logit[c]);
            }
            double z = 0;
            for (double& l : logit) z += (l = std::exp(l - mx));
            for (std::size_t c = 0; c < classes.size(); ++c) score[c] += w * logit[c] / z;
            wsum += w;
        }
        for (double& s : score) s /= wsum;
        out.push_back(score);
    }
    return out;
}

TEST(Transfer, MatchesBruteForceOracle) {
    std::mt19937_64 rng(21);
    const SparseVoxelGrid g = random_feature_grid(rng, 50, 5, 0.2);
    std::vector<QueryEmbedding> classes;
    std::normal_distribution<float> nd;
    for (int c = 0; c < 4; ++c) {
        QueryEmbedding e{"c" + std::to_string(c), std::vector<float>(5)};
        for (float& v : e.vector) v = nd(rng);
        classes.push_back(e);
    }
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Vec3> points(100);
    for (auto& p : points) p = Vec3(u(rng), u(rng), u(rng));
    for (std::size_t k : {std::size_t(1), std::size_t(8)}) {
        const TransferResult r = transfer_pointcloud(g, points, classes, k);
        const auto oracle = transfer_oracle(g, points, classes, k);
        ASSERT_EQ(r.classes, 4u);
        for (std::size_t p = 0; p < points.size(); ++p) {
            const auto best = std::max_element(oracle[p].begin(), oracle[p].end()) - oracle[p].begin();
            EXPECT_EQ(r.labels[p], best) << p;
            for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(r.probabilities[p * 4 + c], oracle[p][c], 1e-12);
        }
    }
}

TEST(Transfer, CentreAndEquidistantExamples) {
    const std::vector<QueryEmbedding> classes = {{"a", {1, 0}}, {"b", {0, 1}}};
    const SparseVoxelGrid g = feature_grid({{1, 0.2f}, {0.1f, 1}, {5, 5}}, {1, 1, 0});
    const Vec3 c0 = g.center(0), c1 = g.center(1);
    const std::vector<Vec3> pts = {c0, c1, 0.5 * (c0 + c1), g.center(2)};
    const TransferResult one = transfer_pointcloud(g, pts, classes, 1);
    EXPECT_EQ(one.labels[0], 0);
    EXPECT_EQ(one.labels[1], 1);
    // The unfused voxel 2 is never a candidate: its nearest fused voxel is 1.
    EXPECT_EQ(one.labels[3], 1);
    const TransferResult two = transfer_pointcloud(g, pts, classes, 2);
    for (std::size_t c = 0; c < 2; ++c) {
        const double p = one.probabilities[0 * 2 + c], q = one.probabilities[1 * 2 + c];
        EXPECT_NEAR(two.probabilities[2 * 2 + c], 0.5 * (p + q), 1e-12);
    }
    EXPECT_THROW(transfer_pointcloud(g, pts, classes, 0), DomainError);
    EXPECT_THROW(transfer_pointcloud(g, pts, {}, 1), DomainError);
    EXPECT_THROW(transfer_pointcloud(feature_grid({{1, 0}}, {0}), pts, classes, 1), DomainError);
}

TEST(Metrics, SetCounts) {
    const std::vector<std::uint8_t> a = {1, 1, 0, 0}, b = {0, 1, 1, 0}, none = {0, 0, 0, 0}, c = {0, 0, 1, 1};
    EXPECT_DOUBLE_EQ(mask_metrics(a, a).iou, 1.0);
    EXPECT_DOUBLE_EQ(mask_metrics(a, c).iou, 0.0);
    EXPECT_FALSE(mask_metrics(a, c).acc25_hit);
    EXPECT_DOUBLE_EQ(mask_metrics(a, b).iou, 1.0 / 3.0);
    EXPECT_TRUE(mask_metrics(a, b).acc25_hit);
    EXPECT_DOUBLE_EQ(mask_metrics(a, b).recall, 0.5);
    EXPECT_DOUBLE_EQ(mask_metrics(none, none).iou, 1.0);
    EXPECT_DOUBLE_EQ(mask_metrics(a, none).iou, 0.0);
    EXPECT_DOUBLE_EQ(mask_metrics(none, none).recall, 1.0);
    // 1 of 4 overlapping: exactly 0.25 still counts.
    const std::vector<std::uint8_t> p = {1, 1, 1, 1, 0}, t = {1, 0, 0, 0, 0};
    EXPECT_DOUBLE_EQ(mask_metrics(p, t).iou, 0.25);
    EXPECT_TRUE(mask_metrics(p, t).acc25_hit);
    EXPECT_THROW(mask_metrics(a, p), DomainError);

    const QueryMetrics qs[] = {{"x", {1.0, true, 1.0}, true}, {"y", {0.2, false, 0.5}, false}, {"z", {0.6, true, 0.0}, {}}};
    const AggregateMetrics agg = aggregate(qs);
    EXPECT_DOUBLE_EQ(agg.miou, 0.6);
    EXPECT_DOUBLE_EQ(agg.acc25, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(agg.macc, 0.5);
    EXPECT_DOUBLE_EQ(agg.loc_acc, 0.5);
}

TEST(Metrics, LocalizationAndClassAccuracy) {
    ImagePlane rel(3, 2, 1);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x) rel.set(x, y, 0.1f * (x + 3 * y));
    rel.invalidate(2, 1);  // the largest value, ignored
    const std::vector<std::uint8_t> region = {0, 0, 0, 0, 1, 0};
    EXPECT_TRUE(localization_hit(rel, region));
    const std::vector<std::uint8_t> other = {1, 1, 1, 1, 0, 1};
    EXPECT_FALSE(localization_hit(rel, other));

    const std::vector<int> truth = {0, 0, 1, 1, 1, 2}, pred = {0, 1, 1, 1, 0, 0};
    // Recalls 1/2, 2/3, 0 over the three present classes.
    EXPECT_NEAR(mean_class_accuracy(pred, truth), (0.5 + 2.0 / 3.0 + 0.0) / 3.0, 1e-12);
}

std::string serialize(const SparseVoxelGrid& g) {
    std::ostringstream out;
    write_grid(out, g);
    return out.str();
}

TEST(Edit, RecolorMaskedVoxelsOnly) {
    std::mt19937_64 rng(2);
    SparseVoxelGrid g = random_feature_grid(rng, 40, 3, 0.0);
    std::uniform_real_distribution<float> col(0, 1);
    for (std::size_t i = 0; i < g.size(); ++i)
        for (float& c : g.sh(i)) c = col(rng);
    const std::string before = serialize(g);

    SparseVoxelGrid same = g;
    edit_voxels(same, {}, std::vector<float>{0, 0, 0});
    EXPECT_EQ(serialize(same), before);

    std::vector<VoxelKey> keys;
    SparseVoxelGrid expected = g;
    for (std::size_t i = 0; i < g.size(); i += 3) {
        keys.push_back(g.key(i));
        for (float& c : expected.sh(i)) c = 0.0f;
    }
    SparseVoxelGrid edited = g;
    edit_voxels(edited, keys, std::vector<float>{0, 0, 0});
    EXPECT_EQ(serialize(edited), serialize(expected));
    EXPECT_NE(serialize(edited), before);

    EXPECT_THROW(edit_voxels(edited, std::vector<VoxelKey>{morton_encode(0, 0, 0, 1)}, std::vector<float>{0, 0, 0}),
                 DomainError);
    EXPECT_THROW(edit_voxels(edited, keys, std::vector<float>{0, 0}), DomainError);
}

TEST(Edit, FullMaskRendersNewColor) {
    SparseVoxelGrid g(kBox, 1);
    CornerDensities opaque;
    opaque.fill(1e6f);
    g.insert(morton_encode(0, 0, 0, 0), opaque);
    const Camera cam = Camera::look_at(Vec3(0, 0, -3), Vec3::Zero(), Vec3::UnitY(), 10, 10, 8, 8);
    edit_voxels(g, g.keys(), std::vector<float>{0.2f, 0.4f, 0.9f});
    const RenderOutput r = render(g, cam);
    EXPECT_NEAR(r.color.at(4, 4)[0], 0.2, 1e-5);
    EXPECT_NEAR(r.color.at(4, 4)[1], 0.4, 1e-5);
    EXPECT_NEAR(r.color.at(4, 4)[2], 0.9, 1e-5);
}

}  // namespace
}  // namespace svf
