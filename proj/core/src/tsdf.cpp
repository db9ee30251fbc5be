// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include "svf/tsdf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "svf/errors.hpp"
#include "svf/parallel.hpp"

namespace svf {

namespace {

constexpr int kBrickVolume = TsdfField::kBrick * TsdfField::kBrick * TsdfField::kBrick;

int local_index(std::int32_t lx, std::int32_t ly, std::int32_t lz) {
    return (lz * TsdfField::kBrick + ly) * TsdfField::kBrick + lx;
}

}  // namespace

TsdfField::TsdfField(const Aabb& bounds, std::uint32_t level, double trunc)
    : bounds_(bounds), level_(level), trunc_(trunc) {
    const Vec3 e = bounds.extent();
    if (!e.allFinite() || !(e.x() > 0.0) || std::abs(e.y() - e.x()) > 1e-9 * e.x() ||
        std::abs(e.z() - e.x()) > 1e-9 * e.x()) {
        throw DomainError("TsdfField: bounds must be a non-empty cube");
    }
    if (level > kMaxTsdfLevel) throw DomainError("TsdfField: level exceeds " + std::to_string(kMaxTsdfLevel));
    if (!(trunc > 0.0) || !std::isfinite(trunc)) throw DomainError("TsdfField: trunc must be positive");
}

double TsdfField::edge() const { return std::ldexp(bounds_.extent().x(), -int(level_)); }

bool TsdfField::in_lattice(const CornerCoord& c) const {
    const std::int32_t n = cells_per_axis();
    return c.x >= 0 && c.y >= 0 && c.z >= 0 && c.x <= n && c.y <= n && c.z <= n;
}

Vec3 TsdfField::position(const CornerCoord& c) const { return bounds_.min + edge() * Vec3(c.x, c.y, c.z); }

std::uint64_t TsdfField::brick_key(std::int32_t bx, std::int32_t by, std::int32_t bz) {
    return std::uint64_t(bx) | std::uint64_t(by) << 21 | std::uint64_t(bz) << 42;
}

TsdfField::Brick TsdfField::empty_brick() {
    Brick b;
    b.phi.fill(std::numeric_limits<float>::quiet_NaN());
    b.weight.fill(0.0f);
    return b;
}

std::optional<TsdfSample> TsdfField::get(const CornerCoord& c) const {
    if (!in_lattice(c)) return std::nullopt;
    auto it = bricks_.find(brick_key(c.x / kBrick, c.y / kBrick, c.z / kBrick));
    if (it == bricks_.end()) return std::nullopt;
    const int li = local_index(c.x % kBrick, c.y % kBrick, c.z % kBrick);
    if (!(it->second.weight[li] > 0.0f)) return std::nullopt;
    return TsdfSample{it->second.phi[li], it->second.weight[li]};
}

void TsdfField::set(const CornerCoord& c, TsdfSample sample) {
    if (!in_lattice(c)) throw DomainError("TsdfField::set: corner off the lattice");
    if (!(sample.weight > 0.0f) || !std::isfinite(sample.weight)) throw DomainError("TsdfField::set: weight must be positive");
    if (!(std::abs(sample.phi) <= trunc_ * (1.0 + 1e-6))) throw DomainError("TsdfField::set: |phi| exceeds trunc");
    auto [it, inserted] = bricks_.try_emplace(brick_key(c.x / kBrick, c.y / kBrick, c.z / kBrick), empty_brick());
    const int li = local_index(c.x % kBrick, c.y % kBrick, c.z % kBrick);
    if (!(it->second.weight[li] > 0.0f)) ++observed_;
    it->second.phi[li] = sample.phi;
    it->second.weight[li] = sample.weight;
}

void TsdfField::erase(const CornerCoord& c) {
    if (!in_lattice(c)) return;
    auto it = bricks_.find(brick_key(c.x / kBrick, c.y / kBrick, c.z / kBrick));
    if (it == bricks_.end()) return;
    const int li = local_index(c.x % kBrick, c.y % kBrick, c.z % kBrick);
    if (it->second.weight[li] > 0.0f) --observed_;
    it->second.phi[li] = std::numeric_limits<float>::quiet_NaN();
    it->second.weight[li] = 0.0f;
}

std::vector<std::uint64_t> TsdfField::sorted_brick_keys() const {
    std::vector<std::uint64_t> keys;
    keys.reserve(bricks_.size());
    for (const auto& kv : bricks_) keys.push_back(kv.first);
    std::sort(keys.begin(), keys.end());
    return keys;
}

void TsdfField::for_each_observed(const std::function<void(const CornerCoord&, const TsdfSample&)>& fn) const {
    constexpr std::uint64_t mask = (std::uint64_t{1} << 21) - 1;
    for (std::uint64_t key : sorted_brick_keys()) {
        const Brick& b = bricks_.at(key);
        const auto bx = std::int32_t(key & mask) * kBrick;
        const auto by = std::int32_t(key >> 21 & mask) * kBrick;
        const auto bz = std::int32_t(key >> 42 & mask) * kBrick;
        for (int lz = 0; lz < kBrick; ++lz)
            for (int ly = 0; ly < kBrick; ++ly)
                for (int lx = 0; lx < kBrick; ++lx) {
                    const int li = local_index(lx, ly, lz);
                    if (b.weight[li] > 0.0f) fn({bx + lx, by + ly, bz + lz}, {b.phi[li], b.weight[li]});
                }
    }
}

std::vector<CornerCoord> TsdfField::observed_corners() const {
    std::vector<CornerCoord> out;
    out.reserve(observed_);
    for_each_observed([&](const CornerCoord& c, const TsdfSample&) { out.push_back(c); });
    return out;
}

bool operator==(const TsdfField& a, const TsdfField& b) {
    if (a.level_ != b.level_ || a.trunc_ != b.trunc_ || a.bounds_.min != b.bounds_.min ||
        a.bounds_.max != b.bounds_.max || a.observed_ != b.observed_) {
        return false;
    }
    bool equal = true;
    a.for_each_observed([&](const CornerCoord& c, const TsdfSample& s) {
        if (!equal) return;
        const auto o = b.get(c);
        equal = o && o->phi == s.phi && o->weight == s.weight;
    });
    return equal;
}

void integrate_depth(TsdfField& field, const Camera& camera, const DepthMap& depth) {
    camera.validate();
    if (depth.width() != camera.width || depth.height() != camera.height || depth.channels() != 1) {
        throw DomainError("integrate_depth: depth map does not match the camera");
    }
    constexpr int B = TsdfField::kBrick;
    const std::int32_t n = field.cells_per_axis();
    const std::int32_t bricks_per_axis = n / B + 1;
    const std::size_t brick_total = std::size_t(bricks_per_axis) * bricks_per_axis * bricks_per_axis;
    const double trunc = field.trunc();
    const double h = field.edge();
    const Vec3 eye = camera.center();
    const Mat3 rt = camera.rotation.transpose();

    // Phase 1 reads the field and produces updated bricks; phase 2 commits
    // them serially in brick order, so results do not depend on threading.
    std::vector<std::unique_ptr<TsdfField::Brick>> updated(brick_total);
    std::vector<int> newly_observed(brick_total, 0);
    parallel_for(brick_total, [&](std::size_t begin, std::size_t end) {
        for (std::size_t b = begin; b < end; ++b) {
            const auto bx = std::int32_t(b % bricks_per_axis);
            const auto by = std::int32_t(b / bricks_per_axis % bricks_per_axis);
            const auto bz = std::int32_t(b / bricks_per_axis / bricks_per_axis);
            auto it = field.bricks_.find(TsdfField::brick_key(bx, by, bz));
            std::unique_ptr<TsdfField::Brick> brick;
            int added = 0;
            for (int lz = 0; lz < B; ++lz) {
                const std::int32_t z = bz * B + lz;
                if (z > n) break;
                for (int ly = 0; ly < B; ++ly) {
                    const std::int32_t y = by * B + ly;
                    if (y > n) break;
                    for (int lx = 0; lx < B; ++lx) {
                        const std::int32_t x = bx * B + lx;
                        if (x > n) break;
                        const Vec3 p = field.bounds().min + h * Vec3(x, y, z);
                        const Vec3 local = rt * (p - eye);
                        if (!(local.z() > 0.0)) continue;
                        const double u = camera.fx * local.x() / local.z() + camera.cx;
                        const double v = camera.fy * local.y() / local.z() + camera.cy;
                        if (!(u >= 0.0 && v >= 0.0 && u < camera.width && v < camera.height)) continue;
                        const int px = static_cast<int>(u), py = static_cast<int>(v);
                        if (!depth.valid(px, py)) continue;
                        const double sd = double(depth.scalar(px, py)) - local.norm();
                        if (!(sd > -trunc)) continue;
                        const double obs = std::clamp(sd, -trunc, trunc);
                        if (!brick) {
                            brick = std::make_unique<TsdfField::Brick>(it != field.bricks_.end() ? it->second
                                                                                                  : TsdfField::empty_brick());
                        }
                        const int li = local_index(lx, ly, lz);
                        const double w = brick->weight[li];
                        if (w > 0.0) {
                            brick->phi[li] = static_cast<float>((w * brick->phi[li] + obs) / (w + 1.0));
                        } else {
                            brick->phi[li] = static_cast<float>(obs);
                            ++added;
                        }
                        brick->weight[li] = static_cast<float>(w + 1.0);
                    }
                }
            }
            updated[b] = std::move(brick);
            newly_observed[b] = added;
        }
    });
    for (std::size_t b = 0; b < brick_total; ++b) {
        if (!updated[b]) continue;
        const auto bx = std::int32_t(b % bricks_per_axis);
        const auto by = std::int32_t(b / bricks_per_axis % bricks_per_axis);
        const auto bz = std::int32_t(b / bricks_per_axis / bricks_per_axis);
        field.bricks_.insert_or_assign(TsdfField::brick_key(bx, by, bz), *updated[b]);
        field.observed_ += newly_observed[b];
    }
}

CornerCoord nearest_coarse_corner(const CornerCoord& fine, std::uint32_t fine_level, std::uint32_t coarse_level) {
    const std::int32_t r = std::int32_t{1} << (fine_level - coarse_level);
    const std::int32_t half = r / 2;
    return {(fine.x + half) / r, (fine.y + half) / r, (fine.z + half) / r};
}

namespace {

double weight_quantile(const TsdfField& field, double q) {
    std::vector<float> w;
    w.reserve(field.observed_count());
    field.for_each_observed([&](const CornerCoord&, const TsdfSample& s) { w.push_back(s.weight); });
    std::sort(w.begin(), w.end());
    const double pos = q * double(w.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, w.size() - 1);
    return w[lo] + (pos - double(lo)) * (w[hi] - w[lo]);
}

}  // namespace

TsdfField blend_multilevel(const TsdfField& fine, std::span<const TsdfField> coarse_levels, const BlendOptions& options) {
    if (fine.empty()) throw DomainError("blend_multilevel: fine field has no observed corner");
    if (!(options.tau_q > 0.0 && options.tau_q < 1.0)) throw DomainError("blend_multilevel: tau_q must be in (0, 1)");
    if (!(options.temperature > 0.0)) throw DomainError("blend_multilevel: temperature must be positive");
    std::uint32_t previous = fine.level();
    for (const auto& coarse : coarse_levels) {
        if (coarse.level() >= previous) throw DomainError("blend_multilevel: coarse levels must be strictly coarser");
        previous = coarse.level();
    }

    const double trunc = fine.trunc();
    auto clamp_phi = [&](double phi) { return static_cast<float>(std::clamp(phi, -trunc, trunc)); };
    TsdfField current = fine;
    for (const auto& coarse : coarse_levels) {
        const double tau = weight_quantile(current, options.tau_q);
        TsdfField next = current;
        // Observed fine corners: keep or blend.
        current.for_each_observed([&](const CornerCoord& c, const TsdfSample& f) {
            const auto cs = coarse.get(nearest_coarse_corner(c, fine.level(), coarse.level()));
            if (!cs) return;  // keep fine
            const double alpha = 1.0 / (1.0 + std::exp(-(f.weight - tau) / (tau * options.temperature)));
            next.set(c, {clamp_phi(alpha * f.phi + (1.0 - alpha) * cs->phi),
                         static_cast<float>(alpha * f.weight + (1.0 - alpha) * cs->weight)});
        });
        // Unobserved fine corners whose nearest coarse corner is observed:
        // trust coarse.
        const std::int32_t r = std::int32_t{1} << (fine.level() - coarse.level());
        const std::int32_t half = r / 2;
        coarse.for_each_observed([&](const CornerCoord& cc, const TsdfSample& cs) {
            for (std::int32_t z = cc.z * r - half; z <= cc.z * r + r - half - 1; ++z)
                for (std::int32_t y = cc.y * r - half; y <= cc.y * r + r - half - 1; ++y)
                    for (std::int32_t x = cc.x * r - half; x <= cc.x * r + r - half - 1; ++x) {
                        const CornerCoord c{x, y, z};
                        if (!current.in_lattice(c) || current.get(c)) continue;
                        next.set(c, {clamp_phi(cs.phi), cs.weight});
                    }
        });
        current = std::move(next);
    }
    return current;
}

}  // namespace svf
