// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include "svf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "svf/errors.hpp"

namespace svf {

double BuildConfig::trunc(const Aabb& bounds) const {
    return trunc_voxels * std::ldexp(bounds.extent().x(), -int(level));
}

void BuildConfig::validate() const {
    if (level > kMaxTsdfLevel) throw DomainError("build: level exceeds " + std::to_string(kMaxTsdfLevel));
    if (coarse_levels > level) throw DomainError("build: more coarse levels than the fine level allows");
    if (!(trunc_voxels > 0.0)) throw DomainError("build: trunc_voxels must be positive");
    if (!(density_scale > 0.0) || !(density_width > 0.0)) throw DomainError("build: density parameters must be positive");
    if (sh_degree < 0 || sh_degree > 3) throw DomainError("build: sh_degree must be in [0, 3]");
}

std::vector<TsdfField> integrate_levels(const Aabb& bounds, std::span<const Camera> cameras,
                                        std::span<const DepthMap> depths, const BuildConfig& cfg) {
    cfg.validate();
    if (cameras.size() != depths.size()) throw DomainError("build: camera and depth counts differ");
    const double trunc = cfg.trunc(bounds);
    std::vector<TsdfField> fields;
    for (std::uint32_t l = 0; l <= cfg.coarse_levels; ++l) {
        TsdfField field(bounds, cfg.level - l, trunc);
        for (std::size_t k = 0; k < cameras.size(); ++k) integrate_depth(field, cameras[k], depths[k]);
        fields.push_back(std::move(field));
    }
    return fields;
}

TsdfField build_tsdf(const Aabb& bounds, std::span<const Camera> cameras, std::span<const DepthMap> depths,
                     const BuildConfig& cfg) {
    auto fields = integrate_levels(bounds, cameras, depths, cfg);
    if (fields.front().empty()) throw DomainError("build: no lattice corner was observed");
    return blend_multilevel(fields.front(), std::span<const TsdfField>(fields).subspan(1), cfg.blend);
}

float tsdf_density(double phi, double edge, const BuildConfig& cfg) {
    const double s = 1.0 / (1.0 + std::exp(phi / (cfg.density_width * edge)));
    return static_cast<float>(cfg.density_scale / edge * s);
}

SparseVoxelGrid voxelize(const TsdfField& field, const BuildConfig& cfg) {
    cfg.validate();
    const std::int32_t n = field.cells_per_axis();
    const double trunc = field.trunc();
    const double edge = field.edge();
    std::unordered_set<std::uint64_t> cells;
    const auto pack = [](std::int32_t x, std::int32_t y, std::int32_t z) {
        return morton_encode(std::uint32_t(x), std::uint32_t(y), std::uint32_t(z), kMaxLevel).code;
    };
    field.for_each_observed([&](const CornerCoord& c, const TsdfSample& s) {
        if (!(std::abs(s.phi) < trunc)) return;
        for (int j = 0; j < 8; ++j) {
            const std::int32_t x = c.x - (j & 1), y = c.y - (j >> 1 & 1), z = c.z - (j >> 2 & 1);
            if (x < 0 || y < 0 || z < 0 || x >= n || y >= n || z >= n) continue;
            cells.insert(pack(x, y, z));
        }
    });
    std::vector<std::uint64_t> order(cells.begin(), cells.end());
    std::sort(order.begin(), order.end());

    SparseVoxelGrid grid(field.bounds(), cfg.sh_degree);
    std::vector<float> sh(std::size_t(grid.sh_stride()), 0.0f);
    std::fill(sh.begin(), sh.begin() + 3, 0.5f);
    for (std::uint64_t packed : order) {
        const CellCoord cell = morton_decode(VoxelKey{kMaxLevel, packed});
        CornerDensities density;
        for (int j = 0; j < 8; ++j) {
            const CornerCoord c{std::int32_t(cell.x) + (j & 1), std::int32_t(cell.y) + (j >> 1 & 1),
                                std::int32_t(cell.z) + (j >> 2 & 1)};
            const auto s = field.get(c);
            density[j] = tsdf_density(s ? double(s->phi) : -trunc, edge, cfg);
        }
        grid.insert(morton_encode(cell.x, cell.y, cell.z, field.level()), density, sh);
    }
    return grid;
}

std::vector<ViewBundle> prepare_views(const SparseVoxelGrid& grid, const TriangleMesh& mesh,
                                      std::span<const Camera> cameras, std::vector<FeatureMap> features,
                                      const RenderOptions& options) {
    if (cameras.size() != features.size()) throw DomainError("prepare_views: camera and feature counts differ");
    std::vector<ViewBundle> views;
    views.reserve(cameras.size());
    for (std::size_t k = 0; k < cameras.size(); ++k) {
        ViewBundle v;
        v.camera = cameras[k];
        v.feature = std::move(features[k]);
        v.depth_ren = render(grid, cameras[k], options).depth;
        v.depth_mesh = raycast_mesh_depth(mesh, cameras[k]);
        views.push_back(std::move(v));
    }
    return views;
}

}  // namespace svf
