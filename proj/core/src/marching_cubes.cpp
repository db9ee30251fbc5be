// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

// Marching-cubes case table built by walking the iso-contour around the
// six cube faces. On each face, every outside->inside crossing (in
// counter-clockwise order seen from outside the cube) is joined to the next
// crossing, which isolates the inside corners on ambiguous faces. The face
// rule depends only on the four face corners, so neighbouring cells agree
// and the surface is closed across cell boundaries.

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "svf/errors.hpp"
#include "svf/tsdf.hpp"

namespace svf {

namespace {

struct EdgeDef {
    int a, b;  // a is the lower corner; b = a | (1 << axis)
};

std::array<EdgeDef, 12> make_edges() {
    std::array<EdgeDef, 12> edges{};
    int e = 0;
    for (int axis = 0; axis < 3; ++axis) {
        for (int c = 0; c < 8; ++c) {
            if (c & (1 << axis)) continue;
            edges[e++] = {c, c | (1 << axis)};
        }
    }
    return edges;
}

const std::array<EdgeDef, 12>& edges() {
    static const auto table = make_edges();
    return table;
}

int edge_between(int a, int b) {
    if (a > b) std::swap(a, b);
    for (int e = 0; e < 12; ++e) {
        if (edges()[e].a == a && edges()[e].b == b) return e;
    }
    return -1;
}

// Corners of each face in counter-clockwise order seen from outside.
std::array<std::array<int, 4>, 6> make_faces() {
    std::array<std::array<int, 4>, 6> faces{};
    int f = 0;
    for (int axis = 0; axis < 3; ++axis) {
        const int u = 1 << ((axis + 1) % 3);
        const int v = 1 << ((axis + 2) % 3);
        for (int side = 0; side < 2; ++side) {
            const int base = side ? (1 << axis) : 0;
            std::array<int, 4> ring{base, base | u, base | u | v, base | v};
            if (!side) std::reverse(ring.begin(), ring.end());
            faces[f++] = ring;
        }
    }
    return faces;
}

McCase build_case(int mask) {
    static const auto faces = make_faces();
    auto inside = [&](int c) { return (mask >> c & 1) != 0; };
    std::array<int, 12> next;
    next.fill(-1);
    for (const auto& ring : faces) {
        int crossing_edge[4];
        bool out_to_in[4];
        int count = 0;
        for (int k = 0; k < 4; ++k) {
            const int a = ring[k], b = ring[(k + 1) % 4];
            if (inside(a) == inside(b)) continue;
            crossing_edge[count] = edge_between(a, b);
            out_to_in[count] = !inside(a);
            ++count;
        }
        for (int i = 0; i < count; ++i) {
            if (out_to_in[i]) next[crossing_edge[i]] = crossing_edge[(i + 1) % count];
        }
    }
    McCase result;
    std::array<bool, 12> used{};
    for (int start = 0; start < 12; ++start) {
        if (next[start] < 0 || used[start]) continue;
        std::vector<int> loop;
        for (int e = start; !used[e]; e = next[e]) {
            used[e] = true;
            loop.push_back(e);
        }
        for (std::size_t i = 1; i + 1 < loop.size(); ++i) {
            // Walk order already winds the front face toward positive phi.
            result.triangles.push_back({std::uint8_t(loop[0]), std::uint8_t(loop[i]), std::uint8_t(loop[i + 1])});
        }
    }
    return result;
}

std::array<McCase, 256> build_table() {
    std::array<McCase, 256> table;
    for (int m = 0; m < 256; ++m) table[m] = build_case(m);
    return table;
}

}  // namespace

const McCase& mc_case(std::uint8_t inside_mask) {
    static const auto table = build_table();
    return table[inside_mask];
}

std::array<int, 2> mc_edge_corners(int edge) { return {edges().at(edge).a, edges().at(edge).b}; }

TriangleMesh extract_mesh(const TsdfField& field) {
    TriangleMesh mesh;
    const double h = field.edge();
    const std::int32_t n = field.cells_per_axis();
    std::unordered_map<std::uint64_t, std::uint32_t> vertex_of_edge;
    auto pack = [](const CornerCoord& c) {
        return std::uint64_t(c.x) | std::uint64_t(c.y) << 20 | std::uint64_t(c.z) << 40;
    };
    const double min_area = 1e-14 * h * h;

    field.for_each_observed([&](const CornerCoord& origin, const TsdfSample&) {
        if (origin.x >= n || origin.y >= n || origin.z >= n) return;
        std::array<double, 8> phi;
        int mask = 0;
        for (int j = 0; j < 8; ++j) {
            const auto s = field.get({origin.x + (j & 1), origin.y + (j >> 1 & 1), origin.z + (j >> 2 & 1)});
            if (!s) return;
            phi[j] = s->phi;
            if (s->phi < 0.0f) mask |= 1 << j;
        }
        if (mask == 0 || mask == 255) return;
        const McCase& cell = mc_case(static_cast<std::uint8_t>(mask));
        std::uint32_t vid[12];
        std::fill(std::begin(vid), std::end(vid), UINT32_MAX);
        auto vertex = [&](int e) {
            if (vid[e] != UINT32_MAX) return vid[e];
            const auto [a, b] = edges()[e];
            const CornerCoord ca{origin.x + (a & 1), origin.y + (a >> 1 & 1), origin.z + (a >> 2 & 1)};
            const int axis = e / 4;
            const std::uint64_t key = pack(ca) * 3 + std::uint64_t(axis);
            auto [it, inserted] = vertex_of_edge.try_emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
            if (inserted) {
                const double t = phi[a] / (phi[a] - phi[b]);
                Vec3 p = field.position(ca);
                p[axis] += t * h;
                mesh.vertices.push_back(p);
            }
            vid[e] = it->second;
            return vid[e];
        };
        for (const auto& tri : cell.triangles) {
            const std::array<std::uint32_t, 3> t{vertex(tri[0]), vertex(tri[1]), vertex(tri[2])};
            if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) continue;
            const Vec3& p0 = mesh.vertices[t[0]];
            const double area = 0.5 * (mesh.vertices[t[1]] - p0).cross(mesh.vertices[t[2]] - p0).norm();
            if (!(area > min_area)) continue;
            mesh.triangles.push_back(t);
        }
    });
    if (!mesh.triangles.empty()) mesh.normals = compute_vertex_normals(mesh);
    return mesh;
}

}  // namespace svf
