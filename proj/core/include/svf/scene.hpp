// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

// Scene manifest: a JSON file naming every input of the pipeline, with
// paths relative to the manifest's directory.
//
//   {
//     "format": "svf-scene", "version": 1,
//     "bounds": {"min": [x, y, z], "max": [x, y, z]},
//     "level": 7,
//     "views": [{"name": "...",
//                "intrinsics": {"fx": .., "fy": .., "cx": .., "cy": .., "width": .., "height": ..},
//                "pose": [16 numbers, row-major world_from_camera],
//                "depth": "...", "feature": "...", "crops": "...", "normal": "..."}],
//     "embeddings": "...",
//     "ground_truth": {"voxel_labels": "...", "points": "..."},
//     "classes": ["..."],
//     "primitives": [{"kind": "sphere|box|plane", "center": [..], "half_extent": [..],
//                     "yaw": .., "normal": [..], "class": ..}]
//   }
//
// Per view, "feature" (an image plane) or "crops" (a crop manifest) must be
// present before fusion; "normal" is optional. Voxel label files hold one
// "level code label" row per voxel.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "svf/camera.hpp"
#include "svf/image.hpp"
#include "svf/ply.hpp"
#include "svf/query.hpp"
#include "svf/synth.hpp"

namespace svf {

struct ViewRecord {
    std::string name;
    Camera camera;
    std::string depth;
    std::string feature;
    std::string crops;
    std::string normal;
};

struct SceneManifest {
    std::filesystem::path root;  // directory of the manifest file
    Aabb bounds;
    std::uint32_t level = 7;
    std::vector<ViewRecord> views;
    std::string embeddings;
    std::string gt_voxel_labels;
    std::string gt_points;
    std::vector<std::string> classes;
    std::vector<Primitive> primitives;

    std::filesystem::path resolve(const std::string& relative) const { return root / relative; }
};

// Parses and validates structure and camera poses; does not open the
// referenced files. Errors carry the file and field name.
SceneManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const SceneManifest& manifest);

struct SceneData {
    SceneManifest manifest;
    std::vector<DepthMap> depths;
    std::vector<FeatureMap> features;  // empty unless requested
    std::vector<NormalMap> normals;    // empty unless every view has one
    std::vector<QueryEmbedding> embeddings;

    std::vector<Camera> cameras() const;
};

struct LoadOptions {
    bool depths = true;
    bool features = false;  // views with only crops are rejected
    bool embeddings = false;
};

// Materializes the requested inputs. Throws DataError for missing files,
// shape mismatches and feature dimensions that differ between views (naming
// both views).
SceneData load_scene(const std::filesystem::path& manifest_path, const LoadOptions& options = {});

std::vector<VoxelLabel> load_voxel_labels(const std::filesystem::path& path);
void save_voxel_labels(const std::filesystem::path& path, const std::vector<VoxelLabel>& labels);

// Writes the scene under `dir` (scene.json, views/, embeddings/, gt/).
void save_synth_scene(const std::filesystem::path& dir, const SynthScene& scene);

}  // namespace svf
