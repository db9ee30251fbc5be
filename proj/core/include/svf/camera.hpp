// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "svf/geometry.hpp"

namespace svf {

// Pinhole camera, OpenCV axes (x right, y down, z forward). Pixel (i, j)
// covers [i, i+1) x [j, j+1); its ray passes through (i + 0.5, j + 0.5).
struct Camera {
    double fx = 1.0, fy = 1.0;
    double cx = 0.0, cy = 0.0;
    int width = 1, height = 1;
    Mat3 rotation = Mat3::Identity();  // world_from_camera
    Vec3 translation = Vec3::Zero();   // camera center in world

    // Throws DataError on non-positive focal lengths or image size, or a
    // rotation that is not orthonormal with det +1 (tolerance 1e-9).
    void validate() const;

    const Vec3& center() const { return translation; }
    Vec3 forward() const { return rotation.col(2); }

    // Unit world-space direction through continuous pixel coordinate (u, v).
    Vec3 ray_direction(double u, double v) const;
    Vec3 pixel_ray(int i, int j) const { return ray_direction(i + 0.5, j + 0.5); }

    struct Projection {
        double u, v;   // continuous pixel coordinates
        double depth;  // camera-space z
    };
    // Nothing for points with camera z <= 0.
    std::optional<Projection> project(const Vec3& world) const;

    // Camera at `eye` looking at `target`; `up` is the approximate world up.
    static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fx, double fy, int width,
                          int height);
};

}  // namespace svf
