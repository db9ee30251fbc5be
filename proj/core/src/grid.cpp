// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include "svf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "svf/errors.hpp"

namespace svf {

std::array<double, 8> trilinear_basis(const Vec3& local) {
    std::array<double, 8> w{};
    for (int j = 0; j < 8; ++j) {
        const double wx = (j & 1) ? local.x() : 1.0 - local.x();
        const double wy = (j & 2) ? local.y() : 1.0 - local.y();
        const double wz = (j & 4) ? local.z() : 1.0 - local.z();
        w[j] = wx * wy * wz;
    }
    return w;
}

namespace {

Vec3 local_coords(const Voxel& voxel, const Vec3& p) {
    const Vec3 lo = voxel.center.array() - 0.5 * voxel.size;
    Vec3 local = (p - lo) / voxel.size;
    const double tol = 1e-9;
    if ((local.array() < -tol).any() || (local.array() > 1.0 + tol).any() || !local.allFinite()) {
        throw DomainError("trilinear_density: point outside voxel");
    }
    return local.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace

double trilinear_density(const Voxel& voxel, const Vec3& p) {
    const auto w = trilinear_basis(local_coords(voxel, p));
    double sum = 0.0;
    for (int j = 0; j < 8; ++j) sum += w[j] * voxel.density[j];
    return sum;
}

Vec3 trilinear_gradient(const Voxel& voxel, const Vec3& p) {
    const Vec3 l = local_coords(voxel, p);
    Vec3 g = Vec3::Zero();
    for (int j = 0; j < 8; ++j) {
        const double bx = (j & 1) ? l.x() : 1.0 - l.x();
        const double by = (j & 2) ? l.y() : 1.0 - l.y();
        const double bz = (j & 4) ? l.z() : 1.0 - l.z();
        const double sx = (j & 1) ? 1.0 : -1.0;
        const double sy = (j & 2) ? 1.0 : -1.0;
        const double sz = (j & 4) ? 1.0 : -1.0;
        g += voxel.density[j] * Vec3(sx * by * bz, bx * sy * bz, bx * by * sz);
    }
    return g / voxel.size;
}

std::array<float, 3> evaluate_sh(std::span<const float> coeffs, int degree, const Vec3& dir) {
    const double x = dir.x(), y = dir.y(), z = dir.z();
    double basis[16] = {1.0};
    if (degree >= 1) {
        basis[1] = -0.4886025119029199 * y;
        basis[2] = 0.4886025119029199 * z;
        basis[3] = -0.4886025119029199 * x;
    }
    if (degree >= 2) {
        basis[4] = 1.0925484305920792 * x * y;
        basis[5] = -1.0925484305920792 * y * z;
        basis[6] = 0.31539156525252005 * (2.0 * z * z - x * x - y * y);
        basis[7] = -1.0925484305920792 * x * z;
        basis[8] = 0.5462742152960396 * (x * x - y * y);
    }
    if (degree >= 3) {
        basis[9] = -0.5900435899266435 * y * (3.0 * x * x - y * y);
        basis[10] = 2.890611442640554 * x * y * z;
        basis[11] = -0.4570457994644658 * y * (4.0 * z * z - x * x - y * y);
        basis[12] = 0.3731763325901154 * z * (2.0 * z * z - 3.0 * x * x - 3.0 * y * y);
        basis[13] = -0.4570457994644658 * x * (4.0 * z * z - x * x - y * y);
        basis[14] = 1.445305721320277 * z * (x * x - y * y);
        basis[15] = -0.5900435899266435 * x * (x * x - 3.0 * y * y);
    }
    std::array<float, 3> rgb{};
    const int n = sh_coefficient_count(degree);
    for (int c = 0; c < 3; ++c) {
        double v = 0.0;
        for (int k = 0; k < n; ++k) v += basis[k] * coeffs[k * 3 + c];
        rgb[c] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    return rgb;
}

SparseVoxelGrid::SparseVoxelGrid(const Aabb& bounds, int sh_degree) : bounds_(bounds), sh_degree_(sh_degree) {
    const Vec3 e = bounds.extent();
    if (!e.allFinite() || !(e.x() > 0.0)) throw DomainError("grid bounds must be a non-empty box");
    if (std::abs(e.y() - e.x()) > 1e-9 * e.x() || std::abs(e.z() - e.x()) > 1e-9 * e.x()) {
        throw DomainError("grid bounds must be a cube");
    }
    if (sh_degree < 0 || sh_degree > 3) throw DomainError("SH degree must be in [0, 3]");
}

double SparseVoxelGrid::edge_at(std::uint32_t level) const { return std::ldexp(extent(), -int(level)); }

bool SparseVoxelGrid::would_conflict(const VoxelKey& key) const {
    if (index_.contains(key) || ancestor_refs_.contains(key)) return true;
    for (VoxelKey k = key; k.level > 0;) {
        k = parent_key(k);
        if (index_.contains(k)) return true;
    }
    return false;
}

std::size_t SparseVoxelGrid::insert(const VoxelKey& key, const CornerDensities& density, std::span<const float> sh) {
    validate_key(key);
    if (would_conflict(key)) throw DomainError("grid insert violates the antichain (duplicate, ancestor or descendant)");
    for (float s : density) {
        if (!(s >= 0.0f) || !std::isfinite(s)) throw DomainError("corner densities must be finite and non-negative");
    }
    if (!sh.empty() && sh.size() != static_cast<std::size_t>(sh_stride())) {
        throw DomainError("SH coefficient count does not match the grid degree");
    }
    const std::size_t i = keys_.size();
    keys_.push_back(key);
    density_.push_back(density);
    if (sh.empty()) {
        sh_.resize(sh_.size() + sh_stride(), 0.0f);
        std::fill_n(sh_.end() - sh_stride(), 3, 0.5f);
    } else {
        sh_.insert(sh_.end(), sh.begin(), sh.end());
    }
    if (feature_dim_ > 0) {
        features_.resize(features_.size() + feature_dim_, 0.0f);
        weight_sum_.push_back(0.0f);
    }
    index_.emplace(key, i);
    for (VoxelKey k = key; k.level > 0;) {
        k = parent_key(k);
        ++ancestor_refs_[k];
    }
    finest_level_ = std::max(finest_level_, key.level);
    return i;
}

std::optional<std::size_t> SparseVoxelGrid::find(const VoxelKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Vec3 SparseVoxelGrid::center(std::size_t i) const {
    const CellCoord c = morton_decode(keys_[i]);
    const double s = edge_at(keys_[i].level);
    return bounds_.min + s * Vec3(c.x + 0.5, c.y + 0.5, c.z + 0.5);
}

Voxel SparseVoxelGrid::voxel(std::size_t i) const { return {keys_[i], center(i), size_of(i), density_[i]}; }

std::vector<std::uint32_t> SparseVoxelGrid::levels() const {
    std::set<std::uint32_t> s;
    for (const auto& k : keys_) s.insert(k.level);
    return {s.begin(), s.end()};
}

void SparseVoxelGrid::allocate_features(std::size_t dim) {
    feature_dim_ = dim;
    features_.assign(keys_.size() * dim, 0.0f);
    weight_sum_.assign(dim > 0 ? keys_.size() : 0, 0.0f);
}

std::size_t SparseVoxelGrid::fused_count() const {
    if (feature_dim_ == 0) return 0;
    return static_cast<std::size_t>(std::count_if(weight_sum_.begin(), weight_sum_.end(), [](float w) { return w > 0.0f; }));
}

void SparseVoxelGrid::sort_by_key() {
    std::vector<std::size_t> order(keys_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys_[a] < keys_[b]; });
    auto permute = [&](auto& vec, std::size_t stride) {
        std::remove_reference_t<decltype(vec)> out;
        out.reserve(vec.size());
        for (std::size_t i : order) out.insert(out.end(), vec.begin() + i * stride, vec.begin() + (i + 1) * stride);
        vec = std::move(out);
    };
    permute(keys_, 1);
    permute(density_, 1);
    permute(sh_, sh_stride());
    if (feature_dim_ > 0) {
        permute(features_, feature_dim_);
        permute(weight_sum_, 1);
    }
    index_.clear();
    for (std::size_t i = 0; i < keys_.size(); ++i) index_.emplace(keys_[i], i);
}

double ray_entry_distance(const Aabb& box, const Vec3& eye) {
    if (box.contains(eye)) return 0.0;
    const Vec3 dir = (box.center() - eye).normalized();
    const auto hit = intersect_slabs(eye, dir, box);
    // The ray aims at the box center, so it always hits.
    return hit ? std::max(0.0, hit->t_in) : (box.center() - eye).norm();
}

std::vector<std::size_t> front_to_back_order(const SparseVoxelGrid& grid, const Camera& camera) {
    std::vector<double> dist(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) dist[i] = ray_entry_distance(grid.voxel(i).box(), camera.center());
    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return grid.key(a) < grid.key(b);
    });
    return order;
}

}  // namespace svf
