// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include "svf/geometry.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <limits>
#include <utility>

namespace svf {

std::optional<Interval> intersect_slabs(const Vec3& origin, const Vec3& dir, const Aabb& box) {
    double t_in = -std::numeric_limits<double>::infinity();
    double t_out = std::numeric_limits<double>::infinity();
    for (int axis = 0; axis < 3; ++axis) {
        if (dir[axis] == 0.0) {
            if (origin[axis] < box.min[axis] || origin[axis] > box.max[axis]) return std::nullopt;
            continue;
        }
        const double inv = 1.0 / dir[axis];
        double t0 = (box.min[axis] - origin[axis]) * inv;
        double t1 = (box.max[axis] - origin[axis]) * inv;
        if (t0 > t1) std::swap(t0, t1);
        t_in = std::max(t_in, t0);
        t_out = std::min(t_out, t1);
        if (t_in > t_out) return std::nullopt;
    }
    return Interval{t_in, t_out};
}

std::optional<double> intersect_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                         const Vec3& b, const Vec3& c, double t_min) {
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 p = dir.cross(e2);
    const double det = e1.dot(p);
    if (std::abs(det) < 1e-300) return std::nullopt;
    const double inv_det = 1.0 / det;
    const Vec3 s = origin - a;
    const double u = s.dot(p) * inv_det;
    if (u < 0.0 || u > 1.0) return std::nullopt;
    const Vec3 q = s.cross(e1);
    const double v = dir.dot(q) * inv_det;
    if (v < 0.0 || u + v > 1.0) return std::nullopt;
    const double t = e2.dot(q) * inv_det;
    if (t <= t_min) return std::nullopt;
    return t;
}

}  // namespace svf
