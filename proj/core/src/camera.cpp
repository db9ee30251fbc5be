// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include "svf/camera.hpp"

#include <Eigen/Geometry>
#include <cmath>

#include "svf/errors.hpp"

namespace svf {

void Camera::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw DataError("camera: focal lengths must be positive");
    if (width <= 0 || height <= 0) throw DataError("camera: image size must be positive");
    if (!rotation.allFinite() || !translation.allFinite()) throw DataError("camera: pose is not finite");
    const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (ortho > 1e-9) throw DataError("camera: rotation is not orthonormal");
    if (std::abs(rotation.determinant() - 1.0) > 1e-9) throw DataError("camera: rotation determinant is not +1");
}

Vec3 Camera::ray_direction(double u, double v) const {
    const Vec3 local((u - cx) / fx, (v - cy) / fy, 1.0);
    return (rotation * local).normalized();
}

std::optional<Camera::Projection> Camera::project(const Vec3& world) const {
    const Vec3 local = rotation.transpose() * (world - translation);
    if (!(local.z() > 0.0)) return std::nullopt;
    return Projection{fx * local.x() / local.z() + cx, fy * local.y() / local.z() + cy, local.z()};
}

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fx, double fy, int width,
                       int height) {
    const Vec3 z = (target - eye).normalized();
    Vec3 x = z.cross(up);
    if (x.norm() < 1e-12) x = z.unitOrthogonal();
    x.normalize();
    const Vec3 y = z.cross(x);
    Camera cam;
    cam.fx = fx;
    cam.fy = fy;
    cam.width = width;
    cam.height = height;
    cam.cx = 0.5 * width;
    cam.cy = 0.5 * height;
    cam.rotation.col(0) = x;
    cam.rotation.col(1) = y;
    cam.rotation.col(2) = z;
    cam.translation = eye;
    return cam;
}

}  // namespace svf
