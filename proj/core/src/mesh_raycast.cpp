// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <utility>

#include <Eigen/Geometry>

#include "svf/errors.hpp"
#include "svf/mesh.hpp"
#include "svf/parallel.hpp"

namespace svf {

void TriangleMesh::validate() const {
    for (const auto& v : vertices) {
        if (!v.allFinite()) throw DataError("mesh: non-finite vertex");
    }
    for (const auto& t : triangles) {
        for (auto i : t) {
            if (i >= vertices.size()) throw DataError("mesh: triangle index out of range");
        }
    }
    if (!normals.empty() && normals.size() != vertices.size()) throw DataError("mesh: normal count mismatch");
}

std::size_t boundary_edge_count(const TriangleMesh& mesh) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> uses;
    for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            auto a = t[e], b = t[(e + 1) % 3];
            if (a > b) std::swap(a, b);
            ++uses[{a, b}];
        }
    }
    return static_cast<std::size_t>(std::count_if(uses.begin(), uses.end(), [](const auto& kv) { return kv.second == 1; }));
}

std::vector<Vec3> compute_vertex_normals(const TriangleMesh& mesh) {
    std::vector<Vec3> normals(mesh.vertices.size(), Vec3::Zero());
    for (const auto& t : mesh.triangles) {
        const Vec3 n = (mesh.vertices[t[1]] - mesh.vertices[t[0]]).cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]);
        for (auto i : t) normals[i] += n;
    }
    for (auto& n : normals) {
        const double len = n.norm();
        if (len > 0.0) n /= len;
    }
    return normals;
}

namespace {
constexpr std::uint32_t kLeafSize = 4;

Aabb merge(const Aabb& a, const Aabb& b) { return {a.min.cwiseMin(b.min), a.max.cwiseMax(b.max)}; }
}  // namespace

MeshBvh::MeshBvh(const TriangleMesh& mesh) : mesh_(mesh) {
    const std::size_t n = mesh.triangles.size();
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    centroids_.resize(n);
    tri_boxes_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& t = mesh.triangles[i];
        const Vec3& a = mesh.vertices[t[0]];
        const Vec3& b = mesh.vertices[t[1]];
        const Vec3& c = mesh.vertices[t[2]];
        Aabb box{a.cwiseMin(b).cwiseMin(c), a.cwiseMax(b).cwiseMax(c)};
        // Pad so the box test stays conservative under rounding.
        const double pad = 1e-9 * (1.0 + box.extent().norm());
        box.min.array() -= pad;
        box.max.array() += pad;
        tri_boxes_[i] = box;
        centroids_[i] = (a + b + c) / 3.0;
    }
    if (n > 0) {
        nodes_.reserve(2 * n / kLeafSize + 1);
        build(0, static_cast<std::uint32_t>(n), 0);
    }
}

std::uint32_t MeshBvh::build(std::uint32_t first, std::uint32_t count, int depth) {
    const auto node_index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    Aabb box = tri_boxes_[order_[first]];
    for (std::uint32_t i = 1; i < count; ++i) box = merge(box, tri_boxes_[order_[first + i]]);
    nodes_[node_index].box = box;
    if (count <= kLeafSize || depth > 48) {
        nodes_[node_index].first = first;
        nodes_[node_index].count = count;
        return node_index;
    }
    int axis = 0;
    box.extent().maxCoeff(&axis);
    const std::uint32_t mid = first + count / 2;
    std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                     [&](std::uint32_t a, std::uint32_t b) {
                         if (centroids_[a][axis] != centroids_[b][axis]) return centroids_[a][axis] < centroids_[b][axis];
                         return a < b;
                     });
    const std::uint32_t left = build(first, mid - first, depth + 1);
    const std::uint32_t right = build(mid, first + count - mid, depth + 1);
    nodes_[node_index].first = left;
    nodes_[node_index].right = right;
    nodes_[node_index].count = 0;
    return node_index;
}

std::optional<double> MeshBvh::nearest_hit(const Vec3& origin, const Vec3& dir) const {
    if (nodes_.empty()) return std::nullopt;
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        const auto span = intersect_slabs(origin, dir, node.box);
        if (!span || span->t_out < 0.0 || span->t_in > best) continue;
        if (node.count > 0) {
            for (std::uint32_t i = 0; i < node.count; ++i) {
                const auto& t = mesh_.triangles[order_[node.first + i]];
                if (auto hit = intersect_triangle(origin, dir, mesh_.vertices[t[0]], mesh_.vertices[t[1]],
                                                  mesh_.vertices[t[2]])) {
                    best = std::min(best, *hit);
                }
            }
        } else if (top + 2 <= 128) {
            stack[top++] = node.right;
            stack[top++] = node.first;
        }
    }
    if (!std::isfinite(best)) return std::nullopt;
    return best;
}

DepthMap raycast_mesh_depth(const TriangleMesh& mesh, const Camera& camera) {
    mesh.validate();
    DepthMap depth(camera.width, camera.height, 1);
    const MeshBvh bvh(mesh);
    parallel_for(static_cast<std::size_t>(camera.height), [&](std::size_t y0, std::size_t y1) {
        for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
            for (int x = 0; x < camera.width; ++x) {
                if (auto t = bvh.nearest_hit(camera.center(), camera.pixel_ray(x, y))) {
                    depth.set(x, y, static_cast<float>(*t));
                }
            }
        }
    });
    return depth;
}

}  // namespace svf
