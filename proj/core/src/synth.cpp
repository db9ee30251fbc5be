// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include "svf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "svf/errors.hpp"
#include "svf/parallel.hpp"

namespace svf {

namespace {

Mat3 yaw_rotation(double yaw) {
    return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

Aabb primitive_box(const Primitive& p) {
    if (p.kind == PrimitiveKind::sphere) {
        const Vec3 r = Vec3::Constant(p.half_extent.x());
        return {p.center - r, p.center + r};
    }
    const Mat3 R = yaw_rotation(p.yaw);
    const Vec3 r = R.cwiseAbs() * p.half_extent;
    return {p.center - r, p.center + r};
}

}  // namespace

double signed_distance(const Primitive& prim, const Vec3& p) {
    switch (prim.kind) {
        case PrimitiveKind::sphere:
            return (p - prim.center).norm() - prim.half_extent.x();
        case PrimitiveKind::box: {
            const Vec3 local = yaw_rotation(-prim.yaw) * (p - prim.center);
            const Vec3 q = local.cwiseAbs() - prim.half_extent;
            return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
        }
        case PrimitiveKind::plane:
            return prim.normal.normalized().dot(p - prim.center);
    }
    return std::numeric_limits<double>::infinity();
}

std::optional<PrimitiveHit> intersect(const Primitive& prim, const Vec3& origin, const Vec3& dir) {
    switch (prim.kind) {
        case PrimitiveKind::sphere: {
            const Vec3 oc = origin - prim.center;
            const double r = prim.half_extent.x();
            const double b = oc.dot(dir);
            const double c = oc.squaredNorm() - r * r;
            const double disc = b * b - c;
            if (disc < 0.0) return std::nullopt;
            const double s = std::sqrt(disc);
            double t = -b - s;
            if (!(t > 0.0)) t = -b + s;
            if (!(t > 0.0)) return std::nullopt;
            return PrimitiveHit{t, (origin + t * dir - prim.center).normalized()};
        }
        case PrimitiveKind::box: {
            const Mat3 R = yaw_rotation(prim.yaw);
            const Vec3 o = R.transpose() * (origin - prim.center);
            const Vec3 d = R.transpose() * dir;
            double t_in = -std::numeric_limits<double>::infinity();
            double t_out = std::numeric_limits<double>::infinity();
            int axis_in = -1, axis_out = -1;
            for (int a = 0; a < 3; ++a) {
                const double h = prim.half_extent[a];
                if (d[a] == 0.0) {
                    if (std::abs(o[a]) > h) return std::nullopt;
                    continue;
                }
                double t0 = (-h - o[a]) / d[a];
                double t1 = (h - o[a]) / d[a];
                if (t0 > t1) std::swap(t0, t1);
                if (t0 > t_in) {
                    t_in = t0;
                    axis_in = a;
                }
                if (t1 < t_out) {
                    t_out = t1;
                    axis_out = a;
                }
            }
            if (t_in > t_out) return std::nullopt;
            double t = t_in;
            int axis = axis_in;
            if (!(t > 0.0)) {
                t = t_out;
                axis = axis_out;
            }
            if (!(t > 0.0) || axis < 0) return std::nullopt;
            Vec3 n = Vec3::Zero();
            n[axis] = (o[axis] + t * d[axis]) > 0.0 ? 1.0 : -1.0;
            return PrimitiveHit{t, R * n};
        }
        case PrimitiveKind::plane: {
            const Vec3 n = prim.normal.normalized();
            const double denom = n.dot(dir);
            if (denom == 0.0) return std::nullopt;
            const double t = n.dot(prim.center - origin) / denom;
            if (!(t > 0.0)) return std::nullopt;
            return PrimitiveHit{t, n};
        }
    }
    return std::nullopt;
}

AnalyticScene::AnalyticScene(Aabb bounds, std::vector<Primitive> primitives)
    : bounds_(std::move(bounds)), primitives_(std::move(primitives)) {}

std::optional<SceneHit> AnalyticScene::raycast(const Vec3& origin, const Vec3& dir) const {
    std::optional<SceneHit> best;
    for (const Primitive& p : primitives_) {
        const auto hit = intersect(p, origin, dir);
        if (!hit || (best && hit->t >= best->t)) continue;
        if (p.kind == PrimitiveKind::plane) {
            const double tol = 1e-9 * (bounds_.extent().maxCoeff());
            if (!bounds_.contains(origin + hit->t * dir, tol)) continue;
        }
        best = SceneHit{hit->t, hit->normal, p.class_id};
    }
    return best;
}

double AnalyticScene::sdf(const Vec3& p) const {
    double d = std::numeric_limits<double>::infinity();
    for (const Primitive& prim : primitives_) d = std::min(d, signed_distance(prim, p));
    return d;
}

int AnalyticScene::nearest_class(const Vec3& p) const {
    int label = -1;
    double best = std::numeric_limits<double>::infinity();
    for (const Primitive& prim : primitives_) {
        const double d = std::abs(signed_distance(prim, p));
        if (d < best) {
            best = d;
            label = prim.class_id;
        }
    }
    return label;
}

DepthMap AnalyticScene::depth_map(const Camera& camera) const {
    DepthMap depth(camera.width, camera.height, 1);
    for (int y = 0; y < camera.height; ++y) {
        for (int x = 0; x < camera.width; ++x) {
            if (const auto hit = raycast(camera.center(), camera.pixel_ray(x, y))) depth.set(x, y, float(hit->t));
        }
    }
    return depth;
}

NormalMap AnalyticScene::normal_map(const Camera& camera) const {
    NormalMap normal(camera.width, camera.height, 3);
    for (int y = 0; y < camera.height; ++y) {
        for (int x = 0; x < camera.width; ++x) {
            if (const auto hit = raycast(camera.center(), camera.pixel_ray(x, y))) {
                const float n[3] = {float(hit->normal.x()), float(hit->normal.y()), float(hit->normal.z())};
                normal.set(x, y, n);
            }
        }
    }
    return normal;
}

ImagePlane AnalyticScene::label_map(const Camera& camera) const {
    ImagePlane labels(camera.width, camera.height, 1);
    for (int y = 0; y < camera.height; ++y) {
        for (int x = 0; x < camera.width; ++x) {
            if (const auto hit = raycast(camera.center(), camera.pixel_ray(x, y))) labels.set(x, y, float(hit->class_id));
        }
    }
    return labels;
}

void SynthSceneSpec::validate() const {
    const Vec3 ext = bounds.extent();
    if (!(ext.minCoeff() > 0.0) || std::abs(ext.x() - ext.y()) > 1e-9 * ext.x() ||
        std::abs(ext.x() - ext.z()) > 1e-9 * ext.x()) {
        throw DomainError("synth: bounds must be a non-degenerate cube");
    }
    if (level > 19) throw DomainError("synth: level must be <= 19");
    if (width < 1 || height < 1 || orbit.views < 1 || !(orbit.fx > 0.0)) throw DomainError("synth: bad camera setup");
    if (!(noise_sigma >= 0.0)) throw DomainError("synth: noise sigma must be non-negative");
    if (feature_dim < int(class_names.size())) throw DomainError("synth: feature_dim must be >= class count");
    for (std::size_t i = 0; i < primitives.size(); ++i) {
        const Primitive& p = primitives[i];
        if (p.class_id < 0 || p.class_id >= int(class_names.size())) {
            throw DomainError("synth: primitive " + std::to_string(i) + " has no class name");
        }
        if (p.kind == PrimitiveKind::plane) {
            if (!bounds.contains(p.center) || !(p.normal.norm() > 0.0)) {
                throw DomainError("synth: plane " + std::to_string(i) + " outside bounds");
            }
            continue;
        }
        if (!(p.half_extent.minCoeff() > 0.0)) throw DomainError("synth: primitive " + std::to_string(i) + " is empty");
        const Aabb box = primitive_box(p);
        if (!bounds.contains(box.min) || !bounds.contains(box.max)) {
            throw DomainError("synth: primitive " + std::to_string(i) + " leaves the bounds");
        }
    }
}

SynthSceneSpec five_object_spec() {
    SynthSceneSpec spec;
    spec.bounds = {Vec3(-2.0, -2.0, -0.5), Vec3(2.0, 2.0, 3.5)};
    spec.class_names = {"floor", "ball", "orb", "crate", "pillar"};
    Primitive floor;
    floor.kind = PrimitiveKind::plane;
    floor.center = Vec3::Zero();
    floor.normal = Vec3::UnitZ();
    floor.class_id = 0;
    Primitive ball;
    ball.kind = PrimitiveKind::sphere;
    ball.center = Vec3(-0.9, -0.8, 0.5);
    ball.half_extent = Vec3::Constant(0.5);
    ball.class_id = 1;
    Primitive orb = ball;
    orb.center = Vec3(0.9, 0.9, 0.45);
    orb.half_extent = Vec3::Constant(0.35);
    orb.class_id = 2;
    Primitive crate;
    crate.kind = PrimitiveKind::box;
    crate.center = Vec3(0.9, -0.8, 0.35);
    crate.half_extent = Vec3(0.4, 0.3, 0.35);
    crate.yaw = 0.3;
    crate.class_id = 3;
    Primitive pillar = crate;
    pillar.center = Vec3(-0.8, 0.9, 0.6);
    pillar.half_extent = Vec3(0.3, 0.3, 0.6);
    pillar.yaw = -0.5;
    pillar.class_id = 4;
    spec.primitives = {floor, ball, orb, crate, pillar};
    spec.orbit.views = 24;
    spec.orbit.target = Vec3(0.0, 0.0, 0.3);
    spec.orbit.radius = 4.0;
    spec.orbit.elevation_min = 0.5;
    spec.orbit.elevation_max = 0.8;
    spec.orbit.fx = 140.0;
    spec.width = 160;
    spec.height = 120;
    spec.level = 7;
    return spec;
}

SynthSceneSpec sphere_spec() {
    SynthSceneSpec spec;
    spec.bounds = {Vec3::Constant(-1.5), Vec3::Constant(1.5)};
    spec.class_names = {"sphere"};
    Primitive sphere;
    sphere.kind = PrimitiveKind::sphere;
    sphere.center = Vec3::Zero();
    sphere.half_extent = Vec3::Constant(1.0);
    spec.primitives = {sphere};
    spec.feature_dim = 4;
    spec.orbit.views = 32;
    spec.orbit.radius = 3.0;
    spec.orbit.elevation_min = -0.6;
    spec.orbit.elevation_max = 0.6;
    spec.orbit.fx = 350.0;
    spec.width = 256;
    spec.height = 256;
    spec.level = 7;
    return spec;
}

std::vector<Camera> orbit_cameras(const OrbitSpec& orbit, int width, int height) {
    std::vector<Camera> cams;
    for (int k = 0; k < orbit.views; ++k) {
        const double az = 2.0 * std::numbers::pi * k / orbit.views;
        const double el = (k % 2 == 0) ? orbit.elevation_min : orbit.elevation_max;
        const Vec3 eye = orbit.target + orbit.radius * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
                                                            std::sin(el));
        cams.push_back(Camera::look_at(eye, orbit.target, Vec3::UnitZ(), orbit.fx, orbit.fx, width, height));
    }
    return cams;
}

std::vector<std::vector<float>> orthonormal_prototypes(std::size_t count, std::size_t dim, std::uint64_t seed) {
    if (count > dim) throw DomainError("prototypes: count exceeds dimension");
    std::mt19937_64 rng(stream_seed(seed, 0xC1A55));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Eigen::VectorXd> basis;
    while (basis.size() < count) {
        Eigen::VectorXd v(dim);
        for (std::size_t i = 0; i < dim; ++i) v[i] = normal(rng);
        for (const auto& b : basis) v -= v.dot(b) * b;
        for (const auto& b : basis) v -= v.dot(b) * b;
        if (v.norm() < 1e-6) continue;
        basis.push_back(v.normalized());
    }
    std::vector<std::vector<float>> out;
    for (const auto& b : basis) {
        std::vector<float> row(dim);
        for (std::size_t i = 0; i < dim; ++i) row[i] = static_cast<float>(b[i]);
        out.push_back(std::move(row));
    }
    return out;
}

PointCloud sample_surface_points(const AnalyticScene& scene, std::size_t count, std::uint64_t seed) {
    PointCloud cloud;
    const auto& prims = scene.primitives();
    if (prims.empty() || count == 0) return cloud;
    const Aabb& bounds = scene.bounds();
    const double diag = bounds.extent().norm();
    std::vector<double> areas;
    for (const Primitive& p : prims) {
        switch (p.kind) {
            case PrimitiveKind::sphere: {
                const double r = p.half_extent.x();
                areas.push_back(4.0 * std::numbers::pi * r * r);
                break;
            }
            case PrimitiveKind::box: {
                const Vec3& h = p.half_extent;
                areas.push_back(8.0 * (h.x() * h.y() + h.y() * h.z() + h.x() * h.z()));
                break;
            }
            case PrimitiveKind::plane:
                areas.push_back(diag * diag);
                break;
        }
    }
    std::mt19937_64 rng(stream_seed(seed, 0x501));
    std::discrete_distribution<std::size_t> pick(areas.begin(), areas.end());
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::size_t attempts = 0;
    while (cloud.points.size() < count) {
        if (++attempts > 1000 * count) throw DomainError("sample_surface_points: rejection sampling stalled");
        const std::size_t i = pick(rng);
        const Primitive& p = prims[i];
        Vec3 x;
        switch (p.kind) {
            case PrimitiveKind::sphere: {
                Vec3 d(normal(rng), normal(rng), normal(rng));
                if (d.norm() < 1e-12) continue;
                x = p.center + p.half_extent.x() * d.normalized();
                break;
            }
            case PrimitiveKind::box: {
                const Vec3& h = p.half_extent;
                const double face_area[3] = {h.y() * h.z(), h.x() * h.z(), h.x() * h.y()};
                const double r = uni(rng) * (face_area[0] + face_area[1] + face_area[2]);
                const int axis = r < face_area[0] ? 0 : (r < face_area[0] + face_area[1] ? 1 : 2);
                Vec3 local;
                for (int a = 0; a < 3; ++a) local[a] = (2.0 * uni(rng) - 1.0) * h[a];
                local[axis] = uni(rng) < 0.5 ? -h[axis] : h[axis];
                x = p.center + yaw_rotation(p.yaw) * local;
                break;
            }
            case PrimitiveKind::plane: {
                const Vec3 n = p.normal.normalized();
                const Vec3 u = n.unitOrthogonal();
                const Vec3 v = n.cross(u);
                const Vec3 c = bounds.center();
                const Vec3 base = c - n.dot(c - p.center) * n;
                x = base + (uni(rng) - 0.5) * diag * u + (uni(rng) - 0.5) * diag * v;
                if (!bounds.contains(x)) continue;
                break;
            }
        }
        bool buried = false;
        for (std::size_t j = 0; j < prims.size() && !buried; ++j) {
            buried = j != i && signed_distance(prims[j], x) < 0.0;
        }
        if (buried) continue;
        cloud.points.push_back(x);
        cloud.labels.push_back(p.class_id);
    }
    return cloud;
}

SynthScene synth_scene(const SynthSceneSpec& spec, std::uint64_t seed) {
    spec.validate();
    SynthScene out;
    out.spec = spec;
    const AnalyticScene scene(spec.bounds, spec.primitives);
    const std::size_t D = static_cast<std::size_t>(spec.feature_dim);

    const auto protos = orthonormal_prototypes(spec.class_names.size(), D, seed);
    for (std::size_t c = 0; c < protos.size(); ++c) out.classes.push_back({spec.class_names[c], protos[c]});

    const auto cameras = orbit_cameras(spec.orbit, spec.width, spec.height);
    out.views.resize(cameras.size());
    const double noise_std = spec.noise_sigma / std::sqrt(double(D));
    // Each view draws from its own stream, so results do not depend on the
    // thread count.
    parallel_for(cameras.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            SynthView& view = out.views[k];
            view.camera = cameras[k];
            view.depth = scene.depth_map(view.camera);
            view.normal = scene.normal_map(view.camera);
            const ImagePlane labels = scene.label_map(view.camera);
            std::mt19937_64 rng(stream_seed(seed, 1000 + k));
            std::normal_distribution<double> noise(0.0, noise_std);
            std::vector<float> f(D);
            const auto noisy_map = [&](int x0, int y0, int w, int h) {
                FeatureMap map(w, h, int(D));
                for (int y = 0; y < h; ++y) {
                    for (int x = 0; x < w; ++x) {
                        if (!labels.valid(x0 + x, y0 + y)) continue;
                        const auto& proto = protos[std::size_t(labels.scalar(x0 + x, y0 + y))];
                        for (std::size_t c = 0; c < D; ++c) f[c] = static_cast<float>(proto[c] + noise(rng));
                        map.set(x, y, f);
                    }
                }
                return map;
            };
            if (spec.crop_size > 0) {
                for (const CropRect& r : crop_grid(spec.width, spec.height, spec.crop_size)) {
                    view.crops.push_back({r.x, r.y, noisy_map(r.x, r.y, r.width, r.height)});
                }
            } else {
                view.feature = noisy_map(0, 0, spec.width, spec.height);
            }
        }
    });

    const std::int64_t n = std::int64_t{1} << spec.level;
    const double edge = spec.bounds.extent().x() / double(n);
    const double band = (spec.trunc_voxels + 1.0) * edge;
    std::vector<std::vector<VoxelLabel>> slabs(static_cast<std::size_t>(n));
    parallel_for(slabs.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t z = begin; z < end; ++z) {
            for (std::int64_t y = 0; y < n; ++y) {
                for (std::int64_t x = 0; x < n; ++x) {
                    const Vec3 c = spec.bounds.min + edge * Vec3(x + 0.5, y + 0.5, double(z) + 0.5);
                    if (!(std::abs(scene.sdf(c)) <= band)) continue;
                    slabs[z].push_back({morton_encode(std::uint32_t(x), std::uint32_t(y), std::uint32_t(z), spec.level),
                                        scene.nearest_class(c)});
                }
            }
        }
    });
    for (auto& s : slabs) out.voxel_labels.insert(out.voxel_labels.end(), s.begin(), s.end());
    std::sort(out.voxel_labels.begin(), out.voxel_labels.end(),
              [](const VoxelLabel& a, const VoxelLabel& b) { return a.key < b.key; });

    out.surface_points = sample_surface_points(scene, spec.surface_points, seed);
    return out;
}

}  // namespace svf
