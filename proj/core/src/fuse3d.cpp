// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include "svf/fuse3d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "svf/errors.hpp"
#include "svf/parallel.hpp"

namespace svf {

void ViewBundle::validate() const {
    camera.validate();
    auto check = [&](const ImagePlane& m, const char* name, int channels) {
        if (m.width() != camera.width || m.height() != camera.height) {
            throw DataError(std::string("view: ") + name + " size does not match the camera");
        }
        if (channels > 0 && m.channels() != channels) throw DataError(std::string("view: ") + name + " channel count");
    };
    check(feature, "feature map", 0);
    check(depth_ren, "rendered depth", 1);
    check(depth_mesh, "mesh depth", 1);
}

FusionConfig FusionConfig::for_voxel_edge(double edge) {
    FusionConfig cfg;
    cfg.beta = 2.0 * edge;
    cfg.sigma_c = edge;
    cfg.occlusion_margin = 2.0 * edge;
    return cfg;
}

void FusionConfig::validate() const {
    if (!(beta > 0.0) || !(sigma_c > 0.0) || !(eps > 0.0)) throw DomainError("fusion: beta, sigma_c, eps must be positive");
    if (!(occlusion_margin >= 0.0)) throw DomainError("fusion: occlusion margin must be non-negative");
    if (batch_size < 1) throw DomainError("fusion: batch_size must be >= 1");
}

double spatial_weight(double z, double d_ren, double beta) {
    if (!std::isfinite(d_ren) || !std::isfinite(z)) return 0.0;
    const double d = z - d_ren;
    return std::exp(-d * d / (2.0 * beta * beta));
}

ConfidenceMap confidence_map(const DepthMap& d_mesh, const DepthMap& d_ren, double sigma_c) {
    if (!d_mesh.same_shape(d_ren)) throw DomainError("confidence_map: size mismatch");
    if (!(sigma_c > 0.0)) throw DomainError("confidence_map: sigma_c must be positive");
    ConfidenceMap conf(d_mesh.width(), d_mesh.height(), 1);
    for (int y = 0; y < conf.height(); ++y) {
        for (int x = 0; x < conf.width(); ++x) {
            if (!d_mesh.valid(x, y) || !d_ren.valid(x, y)) {
                conf.set(x, y, 0.0f);
                continue;
            }
            const double diff = std::abs(double(d_mesh.scalar(x, y)) - d_ren.scalar(x, y));
            conf.set(x, y, static_cast<float>(std::exp(-diff / (2.0 * sigma_c))));
        }
    }
    return conf;
}

namespace {

struct PixelHit {
    int x, y;
    double u, v;
    double distance;
};

std::optional<PixelHit> project_pixel(const Vec3& p, const Camera& camera) {
    const auto proj = camera.project(p);
    if (!proj) return std::nullopt;
    if (!(proj->u >= 0.0 && proj->v >= 0.0 && proj->u < camera.width && proj->v < camera.height)) return std::nullopt;
    return PixelHit{static_cast<int>(proj->u), static_cast<int>(proj->v), proj->u, proj->v,
                    (p - camera.center()).norm()};
}

bool visible_at(const PixelHit& hit, const ViewBundle& view, double margin) {
    if (view.depth_mesh.valid(hit.x, hit.y)) return hit.distance <= view.depth_mesh.scalar(hit.x, hit.y) + margin;
    if (view.depth_ren.valid(hit.x, hit.y)) return hit.distance <= view.depth_ren.scalar(hit.x, hit.y) + margin;
    return false;
}

}  // namespace

bool visible(const Vec3& center, const ViewBundle& view, double margin) {
    const auto hit = project_pixel(center, view.camera);
    return hit && visible_at(*hit, view, margin);
}

std::optional<std::vector<float>> sample_bilinear(const FeatureMap& map, double u, double v) {
    if (!(u >= 0.0 && v >= 0.0 && u <= map.width() && v <= map.height())) return std::nullopt;
    const double gx = std::clamp(u - 0.5, 0.0, double(map.width() - 1));
    const double gy = std::clamp(v - 0.5, 0.0, double(map.height() - 1));
    const int x0 = static_cast<int>(gx), y0 = static_cast<int>(gy);
    const int x1 = std::min(x0 + 1, map.width() - 1), y1 = std::min(y0 + 1, map.height() - 1);
    const double fx = gx - x0, fy = gy - y0;
    const int xs[4] = {x0, x1, x0, x1};
    const int ys[4] = {y0, y0, y1, y1};
    const double ws[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
    std::vector<double> acc(map.channels(), 0.0);
    double wsum = 0.0;
    for (int k = 0; k < 4; ++k) {
        if (ws[k] == 0.0 || !map.valid(xs[k], ys[k])) continue;
        const auto val = map.at(xs[k], ys[k]);
        for (int c = 0; c < map.channels(); ++c) acc[c] += ws[k] * val[c];
        wsum += ws[k];
    }
    if (!(wsum > 0.0)) return std::nullopt;
    std::vector<float> out(map.channels());
    for (int c = 0; c < map.channels(); ++c) out[c] = static_cast<float>(acc[c] / wsum);
    return out;
}

FusionStats fuse(SparseVoxelGrid& grid, std::span<const ViewBundle> views, const FusionConfig& cfg) {
    cfg.validate();
    if (views.empty()) throw DomainError("fuse: no views");
    if (grid.empty()) throw DomainError("fuse: grid has no voxels");
    const int dim = views.front().feature.channels();
    for (std::size_t k = 0; k < views.size(); ++k) {
        views[k].validate();
        if (views[k].feature.channels() != dim) {
            throw DataError("fuse: view " + std::to_string(k) + " feature dimension differs from view 0");
        }
    }

    FusionStats stats;
    std::vector<ConfidenceMap> confidence;
    confidence.reserve(views.size());
    for (const auto& view : views) {
        confidence.push_back(confidence_map(view.depth_mesh, view.depth_ren, cfg.sigma_c));
        const auto vals = confidence.back().values();
        double sum = 0.0;
        for (float c : vals) sum += c;
        stats.view_mean_confidence.push_back(vals.empty() ? 0.0 : sum / double(vals.size()));
    }

    grid.allocate_features(static_cast<std::size_t>(dim));
    const std::size_t n = grid.size();
    const std::size_t batch = std::min(cfg.batch_size, n);
    const std::size_t batch_count = (n + batch - 1) / batch;
    std::mutex stats_mutex;

    parallel_for(batch_count, [&](std::size_t b0, std::size_t b1) {
        // Per-batch accumulators, reused across this worker's batches.
        std::vector<double> feature_acc;
        std::vector<double> weight_acc;
        std::size_t local_peak = 0;
        for (std::size_t b = b0; b < b1; ++b) {
            const std::size_t first = b * batch;
            const std::size_t count = std::min(batch, n - first);
            feature_acc.assign(count * dim, 0.0);
            weight_acc.assign(count, 0.0);
            local_peak = std::max(local_peak, (feature_acc.size() + weight_acc.size()) * sizeof(double));
            for (std::size_t k = 0; k < views.size(); ++k) {
                const ViewBundle& view = views[k];
                for (std::size_t i = 0; i < count; ++i) {
                    const Vec3 x = grid.center(first + i);
                    const auto hit = project_pixel(x, view.camera);
                    if (!hit || !visible_at(*hit, view, cfg.occlusion_margin)) continue;
                    if (!view.depth_ren.valid(hit->x, hit->y)) continue;
                    const double w = spatial_weight(hit->distance, view.depth_ren.scalar(hit->x, hit->y), cfg.beta) *
                                     confidence[k].scalar(hit->x, hit->y);
                    if (!(w > 0.0)) continue;
                    const auto f = sample_bilinear(view.feature, hit->u, hit->v);
                    if (!f) continue;
                    for (int c = 0; c < dim; ++c) feature_acc[i * dim + c] += w * (*f)[c];
                    weight_acc[i] += w;
                }
            }
            for (std::size_t i = 0; i < count; ++i) {
                auto out = grid.feature(first + i);
                if (weight_acc[i] > 0.0) {
                    for (int c = 0; c < dim; ++c) out[c] = static_cast<float>(feature_acc[i * dim + c] / (weight_acc[i] + cfg.eps));
                }
                // keep tiny positive sums distinguishable from "unfused"
                const float wsum = weight_acc[i] > 0.0
                                       ? std::max(static_cast<float>(weight_acc[i]), std::numeric_limits<float>::min())
                                       : 0.0f;
                grid.set_weight_sum(first + i, wsum);
            }
        }
        std::lock_guard lock(stats_mutex);
        stats.peak_accumulator_bytes = std::max(stats.peak_accumulator_bytes, local_peak);
    });
    stats.batches = batch_count;
    stats.unfused = n - grid.fused_count();
    return stats;
}

}  // namespace svf
