// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <optional>

namespace svf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Aabb {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();

    Vec3 center() const { return 0.5 * (min + max); }
    Vec3 extent() const { return max - min; }
    bool contains(const Vec3& p, double tol = 0.0) const {
        return (p.array() >= min.array() - tol).all() && (p.array() <= max.array() + tol).all();
    }
};

// Parametric interval [t_in, t_out] along a ray.
struct Interval {
    double t_in = 0.0;
    double t_out = 0.0;
    double length() const { return t_out - t_in; }
};

// Slab test of origin + t * dir against a closed box, for t over the
// whole real line. Axis-parallel rays lying exactly on a slab plane count
// as hits. Returns nothing when the ray misses.
std::optional<Interval> intersect_slabs(const Vec3& origin, const Vec3& dir, const Aabb& box);

// Moller-Trumbore. Returns the ray parameter of a hit with t > t_min,
// nothing for misses and for rays parallel to the triangle plane.
std::optional<double> intersect_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                         const Vec3& b, const Vec3& c, double t_min = 1e-12);

}  // namespace svf
