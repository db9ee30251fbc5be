// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "svf/camera.hpp"
#include "svf/geometry.hpp"
#include "svf/image.hpp"

namespace svf {

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;
    std::vector<Vec3> normals;  // empty or one per vertex

    bool empty() const { return triangles.empty(); }
    // Throws DataError on out-of-range indices or non-finite vertices.
    void validate() const;
};

// Edges referenced by exactly one triangle. Counts holes and open borders.
std::size_t boundary_edge_count(const TriangleMesh& mesh);

// Area-weighted vertex normals.
std::vector<Vec3> compute_vertex_normals(const TriangleMesh& mesh);

// Median-split bounding volume hierarchy for nearest-hit ray queries.
class MeshBvh {
public:
    explicit MeshBvh(const TriangleMesh& mesh);

    // Smallest positive hit distance along the ray, nothing on a miss.
    std::optional<double> nearest_hit(const Vec3& origin, const Vec3& dir) const;

private:
    struct Node {
        Aabb box;
        std::uint32_t first = 0;  // leaf: first index into order_; inner: left child
        std::uint32_t count = 0;  // leaf triangle count; 0 for inner nodes
        std::uint32_t right = 0;
    };
    std::uint32_t build(std::uint32_t first, std::uint32_t count, int depth);

    const TriangleMesh& mesh_;
    std::vector<std::uint32_t> order_;
    std::vector<Vec3> centroids_;
    std::vector<Aabb> tri_boxes_;
    std::vector<Node> nodes_;
};

// Per-pixel distance to the nearest triangle along the pixel ray; pixels
// whose ray misses are invalid.
DepthMap raycast_mesh_depth(const TriangleMesh& mesh, const Camera& camera);

}  // namespace svf
