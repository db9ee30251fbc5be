// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Geometry>

#include "svf/errors.hpp"
#include "svf/geometry.hpp"
#include "svf/geomreg.hpp"

namespace svf {
namespace {

DepthMap random_depth(std::mt19937_64& rng, int w, int h) {
    std::uniform_real_distribution<double> u(1.0, 5.0);
    DepthMap d(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) d.set(x, y, float(u(rng)));
    return d;
}

DepthMap affine(const DepthMap& d, double a, double b) {
    DepthMap out(d.width(), d.height(), 1);
    for (int y = 0; y < d.height(); ++y)
        for (int x = 0; x < d.width(); ++x) out.set(x, y, float(a * d.scalar(x, y) + b));
    return out;
}

TEST(PatchDepthLoss, IdenticalIsZero) {
    std::mt19937_64 rng(1);
    const DepthMap d = random_depth(rng, 32, 24);
    EXPECT_NEAR(patch_depth_loss(d, d), 0.0, 1e-12);
}

TEST(PatchDepthLoss, AffineInvariant) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> a(0.2, 5.0), b(-3.0, 3.0);
    for (int i = 0; i < 20; ++i) {
        const DepthMap d = random_depth(rng, 32, 32);
        EXPECT_LT(patch_depth_loss(d, affine(d, a(rng), b(rng))), 1e-6);
    }
}

TEST(PatchDepthLoss, TwoByTwoOracle) {
    DepthMap r(2, 2, 1), p(2, 2, 1);
    const double rv[4] = {1, 2, 3, 4}, pv[4] = {1, 2, 3, 5};
    for (int i = 0; i < 4; ++i) {
        r.set(i % 2, i / 2, float(rv[i]));
        p.set(i % 2, i / 2, float(pv[i]));
    }
    auto standardize = [](const double* v, double* z) {
        double m = (v[0] + v[1] + v[2] + v[3]) / 4, s = 0;
        for (int i = 0; i < 4; ++i) s += (v[i] - m) * (v[i] - m);
        s = std::sqrt(s / 4);
        for (int i = 0; i < 4; ++i) z[i] = (v[i] - m) / s;
    };
    double zr[4], zp[4];
    standardize(rv, zr);
    standardize(pv, zp);
    double expected = 0;
    for (int i = 0; i < 4; ++i) expected += (zr[i] - zp[i]) * (zr[i] - zp[i]);
    EXPECT_NEAR(patch_depth_loss(r, p, PatchSpec{2, 2, 1e-6}), expected, 1e-9);
}

TEST(PatchDepthLoss, SymmetricNonNegativeAndMonotone) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 10; ++i) {
        const DepthMap a = random_depth(rng, 16, 16), b = random_depth(rng, 16, 16);
        const double ab = patch_depth_loss(a, b);
        EXPECT_GE(ab, 0.0);
        EXPECT_NEAR(ab, patch_depth_loss(b, a), 1e-9);
        double previous = std::numeric_limits<double>::infinity();
        for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            DepthMap mix(16, 16, 1);
            for (int y = 0; y < 16; ++y)
                for (int x = 0; x < 16; ++x) mix.set(x, y, float((1 - t) * a.scalar(x, y) + t * b.scalar(x, y)));
            const double loss = patch_depth_loss(mix, b);
            EXPECT_LE(loss, previous + 1e-9);
            previous = loss;
        }
    }
}

TEST(PatchDepthLoss, Errors) {
    std::mt19937_64 rng(4);
    EXPECT_THROW(patch_depth_loss(random_depth(rng, 8, 8), random_depth(rng, 8, 9)), DomainError);
    DepthMap holes = random_depth(rng, 8, 8);
    holes.invalidate(3, 3);
    EXPECT_THROW(patch_depth_loss(holes, random_depth(rng, 8, 8)), DomainError);
    EXPECT_THROW(PatchSpec({1, 1, 1e-6}).validate(), DomainError);
}

NormalMap constant_normals(const Vec3& n, int w = 4, int h = 3) {
    NormalMap m(w, h, 3);
    const float v[3] = {float(n.x()), float(n.y()), float(n.z())};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.set(x, y, v);
    return m;
}

TEST(NormalLoss, BoundaryValues) {
    EXPECT_EQ(normal_loss(constant_normals(Vec3::UnitZ()), constant_normals(Vec3::UnitZ())), 0.0);
    EXPECT_EQ(normal_loss(constant_normals(Vec3::UnitZ()), constant_normals(Vec3::UnitX())), 1.0);
    EXPECT_EQ(normal_loss(constant_normals(Vec3::UnitZ()), constant_normals(-Vec3::UnitZ())), 2.0);
}

TEST(NormalLoss, RotationInvariantAndSkipsInvalid) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    NormalMap a(6, 6, 3), b(6, 6, 3);
    const Mat3 R = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
    NormalMap ra(6, 6, 3), rb(6, 6, 3);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) {
            const Vec3 na = Vec3(g(rng), g(rng), g(rng)).normalized(), nb = Vec3(g(rng), g(rng), g(rng)).normalized();
            const Vec3 qa = R * na, qb = R * nb;
            const float va[3] = {float(na.x()), float(na.y()), float(na.z())};
            const float vb[3] = {float(nb.x()), float(nb.y()), float(nb.z())};
            const float wa[3] = {float(qa.x()), float(qa.y()), float(qa.z())};
            const float wb[3] = {float(qb.x()), float(qb.y()), float(qb.z())};
            a.set(x, y, va);
            b.set(x, y, vb);
            ra.set(x, y, wa);
            rb.set(x, y, wb);
        }
    const double loss = normal_loss(a, b);
    EXPECT_GE(loss, 0.0);
    EXPECT_LE(loss, 2.0);
    EXPECT_NEAR(loss, normal_loss(ra, rb), 1e-6);
    NormalMap empty(6, 6, 3);
    EXPECT_THROW(normal_loss(a, empty), DomainError);
}

}  // namespace
}  // namespace svf
