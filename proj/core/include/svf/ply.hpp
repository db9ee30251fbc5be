// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <vector>

#include "svf/mesh.hpp"

namespace svf {

struct PointCloud {
    std::vector<Vec3> points;
    std::vector<int> labels;  // empty or one per point
};

// Vertices as float x/y/z (plus nx/ny/nz when normals are present), faces
// as uchar-counted int lists.
void write_ply(const std::filesystem::path& path, const TriangleMesh& mesh, bool binary = true);
void write_ply(const std::filesystem::path& path, const PointCloud& cloud, bool binary = true);

// Reads ascii and binary_little_endian files. Vertex x/y/z are required;
// nx/ny/nz, label and face vertex_indices are picked up when present.
// Faces with more than three vertices are fanned into triangles.
struct PlyData {
    TriangleMesh mesh;
    std::vector<int> labels;
};
PlyData read_ply(const std::filesystem::path& path);

}  // namespace svf
