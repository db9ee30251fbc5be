// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svf/camera.hpp"
#include "svf/feat2d.hpp"
#include "svf/geometry.hpp"
#include "svf/image.hpp"
#include "svf/morton.hpp"
#include "svf/ply.hpp"
#include "svf/query.hpp"

namespace svf {

enum class PrimitiveKind { sphere, box, plane };

struct Primitive {
    PrimitiveKind kind = PrimitiveKind::sphere;
    Vec3 center = Vec3::Zero();       // sphere/box center; a point on a plane
    Vec3 half_extent = Vec3::Ones();  // box half sizes; x is the sphere radius
    double yaw = 0.0;                 // box rotation about +z (rad)
    Vec3 normal = Vec3::UnitZ();      // plane normal, pointing into free space
    int class_id = 0;
};

struct PrimitiveHit {
    double t;
    Vec3 normal;  // unit, facing free space
};

// Signed distance, negative inside. Box distances are exact.
double signed_distance(const Primitive& prim, const Vec3& p);
// Smallest t > 0 along a unit ray.
std::optional<PrimitiveHit> intersect(const Primitive& prim, const Vec3& origin, const Vec3& dir);

struct SceneHit {
    double t;
    Vec3 normal;
    int class_id;
};

// Analytic scene: union of primitives. Planes only count inside `bounds`.
class AnalyticScene {
public:
    AnalyticScene(Aabb bounds, std::vector<Primitive> primitives);

    const Aabb& bounds() const { return bounds_; }
    const std::vector<Primitive>& primitives() const { return primitives_; }

    std::optional<SceneHit> raycast(const Vec3& origin, const Vec3& dir) const;
    // Minimum over primitives; +inf for an empty scene.
    double sdf(const Vec3& p) const;
    // Class of the primitive with the smallest |sdf|, -1 for an empty scene.
    int nearest_class(const Vec3& p) const;

    DepthMap depth_map(const Camera& camera) const;
    NormalMap normal_map(const Camera& camera) const;
    ImagePlane label_map(const Camera& camera) const;

private:
    Aabb bounds_;
    std::vector<Primitive> primitives_;
};

struct OrbitSpec {
    int views = 24;
    Vec3 target = Vec3::Zero();
    double radius = 4.0;
    double elevation_min = 0.5;  // rad
    double elevation_max = 0.7;  // rad, alternates between the two
    double fx = 140.0;
};

struct SynthSceneSpec {
    Aabb bounds;
    std::vector<Primitive> primitives;
    std::vector<std::string> class_names;  // indexed by class id
    int feature_dim = 16;
    double noise_sigma = 0.3;  // expected norm of the per-pixel feature noise
    OrbitSpec orbit;
    int width = 160;
    int height = 120;
    std::uint32_t level = 7;
    double trunc_voxels = 4.0;  // ground-truth voxel band half-width, in voxel edges
    int crop_size = 0;          // > 0 emits overlapping crops instead of full feature maps
    std::size_t surface_points = 10000;

    // Throws DomainError when primitives leave the bounds, a class id has
    // no name, or feature_dim < class count.
    void validate() const;
};

// Five objects (two spheres, two boxes, a floor plane), z up.
SynthSceneSpec five_object_spec();
// Unit sphere at the origin, 32 orbit views, level 7.
SynthSceneSpec sphere_spec();

struct SynthView {
    Camera camera;
    DepthMap depth;
    NormalMap normal;
    FeatureMap feature;              // empty when crops are emitted
    std::vector<CropFeature> crops;  // empty unless crop_size > 0
};

struct VoxelLabel {
    VoxelKey key;
    int label;
};

struct SynthScene {
    SynthSceneSpec spec;
    std::vector<SynthView> views;
    std::vector<QueryEmbedding> classes;  // orthonormal prototypes
    std::vector<VoxelLabel> voxel_labels;  // cells within the band, sorted by key
    PointCloud surface_points;
};

std::vector<Camera> orbit_cameras(const OrbitSpec& orbit, int width, int height);

// Rows of a D x D orthonormal matrix drawn from a seeded Gaussian.
std::vector<std::vector<float>> orthonormal_prototypes(std::size_t count, std::size_t dim, std::uint64_t seed);

// Deterministic for a fixed seed.
SynthScene synth_scene(const SynthSceneSpec& spec, std::uint64_t seed);

// Surface samples uniform by area; samples inside another primitive are
// rejected.
PointCloud sample_surface_points(const AnalyticScene& scene, std::size_t count, std::uint64_t seed);

}  // namespace svf
