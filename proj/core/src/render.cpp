// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include "svf/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "svf/errors.hpp"
#include "svf/parallel.hpp"

namespace svf {

std::optional<Interval> ray_voxel_interval(const Vec3& origin, const Vec3& dir, const Voxel& voxel) {
    auto hit = intersect_slabs(origin, dir, voxel.box());
    if (!hit || hit->t_out < 0.0) return std::nullopt;
    hit->t_in = std::max(hit->t_in, 0.0);
    return hit;
}

namespace {
constexpr std::uint32_t kMaxOccupancyLevel = 9;
}

VoxelRayCaster::VoxelRayCaster(const SparseVoxelGrid& grid) : grid_(grid), level_(grid.finest_level()) {
    levels_desc_ = grid.levels();
    std::reverse(levels_desc_.begin(), levels_desc_.end());
    if (grid.empty() || level_ > kMaxOccupancyLevel) return;
    const std::uint64_t n = std::uint64_t{1} << level_;
    occupancy_.assign((n * n * n + 63) / 64, 0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const VoxelKey& k = grid.key(i);
        const std::uint32_t shift = level_ - k.level;
        const CellCoord c = morton_decode(k);
        const std::uint64_t span = std::uint64_t{1} << shift;
        for (std::uint64_t z = 0; z < span; ++z)
            for (std::uint64_t y = 0; y < span; ++y)
                for (std::uint64_t x = 0; x < span; ++x) {
                    const std::uint64_t fx = (std::uint64_t{c.x} << shift) + x;
                    const std::uint64_t fy = (std::uint64_t{c.y} << shift) + y;
                    const std::uint64_t fz = (std::uint64_t{c.z} << shift) + z;
                    const std::uint64_t bit = (fz * n + fy) * n + fx;
                    occupancy_[bit >> 6] |= std::uint64_t{1} << (bit & 63);
                }
    }
}

std::optional<std::size_t> VoxelRayCaster::lookup(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
    if (!occupancy_.empty()) {
        const std::uint64_t n = std::uint64_t{1} << level_;
        const std::uint64_t bit = (std::uint64_t{z} * n + y) * n + x;
        if (!(occupancy_[bit >> 6] >> (bit & 63) & 1)) return std::nullopt;
    }
    for (std::uint32_t l : levels_desc_) {
        const std::uint32_t shift = level_ - l;
        if (auto i = grid_.find(morton_encode(x >> shift, y >> shift, z >> shift, l))) return i;
    }
    return std::nullopt;
}

void VoxelRayCaster::trace(const Vec3& origin, const Vec3& dir,
                           const std::function<bool(const RayHit&)>& visit) const {
    if (grid_.empty()) return;
    const Aabb& bounds = grid_.bounds();
    auto span = intersect_slabs(origin, dir, bounds);
    if (!span || span->t_out < 0.0) return;
    const double t_start = std::max(span->t_in, 0.0);
    const double t_end = span->t_out;
    if (t_start > t_end) return;

    const std::int64_t n = std::int64_t{1} << level_;
    const double h = grid_.edge_at(level_);
    const Vec3 p = origin + t_start * dir;
    std::int64_t cell[3];
    int step[3];
    double t_max[3], t_delta[3];
    for (int a = 0; a < 3; ++a) {
        const double rel = (p[a] - bounds.min[a]) / h;
        cell[a] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(rel)), 0, n - 1);
        if (dir[a] > 0.0) {
            step[a] = 1;
            t_max[a] = (bounds.min[a] + (cell[a] + 1) * h - origin[a]) / dir[a];
            t_delta[a] = h / dir[a];
        } else if (dir[a] < 0.0) {
            step[a] = -1;
            t_max[a] = (bounds.min[a] + cell[a] * h - origin[a]) / dir[a];
            t_delta[a] = -h / dir[a];
        } else {
            step[a] = 0;
            t_max[a] = std::numeric_limits<double>::infinity();
            t_delta[a] = std::numeric_limits<double>::infinity();
        }
    }

    std::optional<std::size_t> last;
    while (true) {
        if (auto idx = lookup(static_cast<std::uint32_t>(cell[0]), static_cast<std::uint32_t>(cell[1]),
                              static_cast<std::uint32_t>(cell[2]));
            idx && idx != last) {
            last = idx;
            if (auto iv = ray_voxel_interval(origin, dir, grid_.voxel(*idx)); iv && iv->length() > 0.0) {
                if (!visit(RayHit{*idx, *iv})) return;
            }
        }
        const int a = (t_max[0] < t_max[1]) ? (t_max[0] < t_max[2] ? 0 : 2) : (t_max[1] < t_max[2] ? 1 : 2);
        if (t_max[a] > t_end) return;
        cell[a] += step[a];
        if (cell[a] < 0 || cell[a] >= n) return;
        t_max[a] += t_delta[a];
    }
}

std::vector<RayHit> VoxelRayCaster::trace_all(const Vec3& origin, const Vec3& dir) const {
    std::vector<RayHit> hits;
    trace(origin, dir, [&](const RayHit& h) {
        hits.push_back(h);
        return true;
    });
    return hits;
}

double composite_ray(const SparseVoxelGrid& grid, const VoxelRayCaster& caster, const Vec3& origin,
                     const Vec3& dir, const RenderOptions& options,
                     const std::function<void(const Contribution&)>& emit) {
    if (options.samples_per_interval < 1) throw DomainError("samples_per_interval must be >= 1");
    double transmittance = 1.0;
    double accumulated = 0.0;
    const int n = options.samples_per_interval;
    caster.trace(origin, dir, [&](const RayHit& hit) {
        const Voxel v = grid.voxel(hit.voxel);
        const double delta = hit.interval.length();
        double sigma = 0.0;
        for (int s = 0; s < n; ++s) {
            const double t = hit.interval.t_in + (s + 0.5) / n * delta;
            sigma += trilinear_density(v, origin + t * dir);
        }
        sigma /= n;
        const double alpha = 1.0 - std::exp(-sigma * delta);
        const double weight = transmittance * alpha;
        if (weight > 0.0) emit(Contribution{hit.voxel, hit.interval, alpha, weight});
        accumulated += weight;
        transmittance *= 1.0 - alpha;
        return transmittance >= options.min_transmittance;
    });
    return accumulated;
}

RenderOutput render(const SparseVoxelGrid& grid, const Camera& camera, const RenderOptions& options) {
    if (options.samples_per_interval < 1) throw DomainError("samples_per_interval must be >= 1");
    const int w = camera.width, h = camera.height;
    RenderOutput out{ColorMap(w, h, 3), DepthMap(w, h, 1), AlphaMap(w, h, 1), NormalMap(w, h, 3)};
    const VoxelRayCaster caster(grid);
    const Vec3 eye = camera.center();
    parallel_for(static_cast<std::size_t>(h), [&](std::size_t y0, std::size_t y1) {
        for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
            for (int x = 0; x < w; ++x) {
                const Vec3 dir = camera.pixel_ray(x, y);
                Vec3 color = Vec3::Zero();
                Vec3 normal = Vec3::Zero();
                double depth = 0.0;
                const double alpha = composite_ray(grid, caster, eye, dir, options, [&](const Contribution& c) {
                    const Voxel v = grid.voxel(c.voxel);
                    const auto rgb = evaluate_sh(grid.sh(c.voxel), grid.sh_degree(), dir);
                    color += c.weight * Vec3(rgb[0], rgb[1], rgb[2]);
                    depth += c.weight * (v.center - eye).norm();
                    const double t_mid = 0.5 * (c.interval.t_in + c.interval.t_out);
                    const Vec3 g = trilinear_gradient(v, eye + t_mid * dir);
                    const double gn = g.norm();
                    if (gn > 0.0) normal -= c.weight * g / gn;
                });
                const float rgb[3] = {float(color.x()), float(color.y()), float(color.z())};
                out.color.set(x, y, rgb);
                out.alpha.set(x, y, static_cast<float>(alpha));
                if (alpha > 0.0 && alpha >= options.alpha_valid_min) {
                    out.depth.set(x, y, static_cast<float>(depth / alpha));
                    const double nn = normal.norm();
                    if (nn > 0.0) {
                        const Vec3 unit = normal / nn;
                        const float nv[3] = {float(unit.x()), float(unit.y()), float(unit.z())};
                        out.normal.set(x, y, nv);
                    }
                }
            }
        }
    });
    return out;
}

}  // namespace svf
