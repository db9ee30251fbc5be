// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include "svf/query.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "svf/errors.hpp"
#include "svf/knn.hpp"
#include "svf/parallel.hpp"

namespace svf {

double cosine(std::span<const float> a, std::span<const float> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += double(a[i]) * b[i];
        na += double(a[i]) * a[i];
        nb += double(b[i]) * b[i];
    }
    if (!(na > 0.0) || !(nb > 0.0)) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

void check_query(const SparseVoxelGrid& grid, const QueryEmbedding& q) {
    if (q.vector.size() != grid.feature_dim()) {
        throw DomainError("query '" + q.label + "': embedding dimension " + std::to_string(q.vector.size()) +
                          " does not match feature dimension " + std::to_string(grid.feature_dim()));
    }
    double norm = 0.0;
    for (float v : q.vector) norm += double(v) * v;
    if (!(norm > 0.0)) throw DomainError("query '" + q.label + "': zero embedding");
}

}  // namespace

QueryResult relevance(const SparseVoxelGrid& grid, const QueryEmbedding& query) {
    check_query(grid, query);
    if (grid.fused_count() == 0) throw DomainError("relevance: grid has no fused voxel");
    QueryResult r;
    r.label = query.label;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.raw.assign(grid.size(), nan);
    r.normalized.assign(grid.size(), nan);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!grid.fused(i)) continue;
        r.raw[i] = cosine(grid.feature(i), query.vector);
        lo = std::min(lo, r.raw[i]);
        hi = std::max(hi, r.raw[i]);
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!grid.fused(i)) continue;
        r.normalized[i] = hi > lo ? (r.raw[i] - lo) / (hi - lo) : 0.5;
    }
    return r;
}

VoxelMask mask3d(const SparseVoxelGrid& grid, const QueryResult& result, double threshold) {
    if (result.normalized.size() != grid.size()) throw DomainError("mask3d: result does not belong to this grid");
    VoxelMask mask;
    mask.threshold = threshold;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        // NaN (unfused) never passes
        if (grid.fused(i) && result.normalized[i] >= threshold) {
            mask.voxels.push_back(i);
            mask.centers.push_back(grid.center(i));
        }
    }
    return mask;
}

ImagePlane render_relevance(const SparseVoxelGrid& grid, const QueryResult& result, const Camera& camera,
                            const RenderOptions& options) {
    if (result.normalized.size() != grid.size()) throw DomainError("render_relevance: result does not belong to this grid");
    ImagePlane out(camera.width, camera.height, 1);
    const VoxelRayCaster caster(grid);
    parallel_for(static_cast<std::size_t>(camera.height), [&](std::size_t y0, std::size_t y1) {
        for (int y = static_cast<int>(y0); y < static_cast<int>(y1); ++y) {
            for (int x = 0; x < camera.width; ++x) {
                double value = 0.0;
                composite_ray(grid, caster, camera.center(), camera.pixel_ray(x, y), options, [&](const Contribution& c) {
                    const double s = result.normalized[c.voxel];
                    if (std::isfinite(s)) value += c.weight * s;
                });
                out.set(x, y, static_cast<float>(value));
            }
        }
    });
    return out;
}

TransferResult transfer_pointcloud(const SparseVoxelGrid& grid, std::span<const Vec3> points,
                                   std::span<const QueryEmbedding> classes, std::size_t k) {
    if (k < 1) throw DomainError("transfer_pointcloud: K must be >= 1");
    if (classes.empty()) throw DomainError("transfer_pointcloud: no class embeddings");
    for (const auto& c : classes) check_query(grid, c);
    std::vector<std::size_t> fused;
    std::vector<Vec3> centers;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!grid.fused(i)) continue;
        fused.push_back(i);
        centers.push_back(grid.center(i));
    }
    if (fused.empty()) throw DomainError("transfer_pointcloud: grid has no fused voxel");

    const std::size_t nc = classes.size();
    // Per-voxel class probabilities, computed once.
    std::vector<double> voxel_prob(fused.size() * nc);
    parallel_for(fused.size(), [&](std::size_t b, std::size_t e) {
        std::vector<double> logits(nc);
        for (std::size_t v = b; v < e; ++v) {
            for (std::size_t c = 0; c < nc; ++c) logits[c] = cosine(grid.feature(fused[v]), classes[c].vector);
            const double mx = *std::max_element(logits.begin(), logits.end());
            double z = 0.0;
            for (std::size_t c = 0; c < nc; ++c) z += std::exp(logits[c] - mx);
            for (std::size_t c = 0; c < nc; ++c) voxel_prob[v * nc + c] = std::exp(logits[c] - mx) / z;
        }
    });

    const double cell = 2.0 * grid.edge_at(grid.finest_level());
    const SpatialHash hash(std::move(centers), cell);
    TransferResult out;
    out.classes = nc;
    out.probabilities.assign(points.size() * nc, 0.0);
    out.labels.assign(points.size(), 0);
    parallel_for(points.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
            const auto nn = hash.knn(points[p], k);
            double wsum = 0.0;
            double* row = out.probabilities.data() + p * nc;
            for (const auto& n : nn) {
                const double w = std::exp(-0.5 * n.distance * n.distance);
                wsum += w;
                for (std::size_t c = 0; c < nc; ++c) row[c] += w * voxel_prob[n.index * nc + c];
            }
            if (wsum > 0.0) {
                for (std::size_t c = 0; c < nc; ++c) row[c] /= wsum;
            } else {
                // every candidate is too far for exp(-d^2/2) to register
                for (const auto& n : nn)
                    for (std::size_t c = 0; c < nc; ++c) row[c] += voxel_prob[n.index * nc + c] / double(nn.size());
            }
            out.labels[p] = static_cast<int>(std::max_element(row, row + nc) - row);
        }
    });
    return out;
}

MaskMetrics mask_metrics(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth) {
    if (predicted.size() != truth.size()) throw DomainError("mask_metrics: masks cover different universes");
    std::size_t inter = 0, uni = 0, gt = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] != 0, t = truth[i] != 0;
        inter += p && t;
        uni += p || t;
        gt += t;
    }
    MaskMetrics m;
    m.iou = uni == 0 ? 1.0 : double(inter) / double(uni);
    m.acc25_hit = m.iou >= 0.25;
    m.recall = gt == 0 ? 1.0 : double(inter) / double(gt);
    return m;
}

bool localization_hit(const ImagePlane& relevance_map, std::span<const std::uint8_t> region) {
    if (region.size() != relevance_map.pixel_count()) throw DomainError("localization_hit: region size mismatch");
    std::size_t best = region.size();
    float best_value = -std::numeric_limits<float>::infinity();
    for (std::size_t p = 0; p < relevance_map.pixel_count(); ++p) {
        if (!relevance_map.valid(p)) continue;
        const float v = relevance_map.at(p)[0];
        if (v > best_value) {
            best_value = v;
            best = p;
        }
    }
    return best < region.size() && region[best] != 0;
}

AggregateMetrics aggregate(std::span<const QueryMetrics> queries) {
    AggregateMetrics a;
    if (queries.empty()) return a;
    std::size_t loc_count = 0, loc_hits = 0;
    for (const auto& q : queries) {
        a.miou += q.mask.iou;
        a.acc25 += q.mask.acc25_hit ? 1.0 : 0.0;
        a.macc += q.mask.recall;
        if (q.loc_hit) {
            ++loc_count;
            loc_hits += *q.loc_hit;
        }
    }
    const double n = double(queries.size());
    a.miou /= n;
    a.acc25 /= n;
    a.macc /= n;
    a.loc_acc = loc_count ? double(loc_hits) / double(loc_count) : 0.0;
    return a;
}

double mean_class_accuracy(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) throw DomainError("mean_class_accuracy: size mismatch");
    std::vector<std::size_t> total, correct;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0) continue;
        const auto c = static_cast<std::size_t>(truth[i]);
        if (c >= total.size()) {
            total.resize(c + 1, 0);
            correct.resize(c + 1, 0);
        }
        ++total[c];
        correct[c] += predicted[i] == truth[i];
    }
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < total.size(); ++c) {
        if (total[c] == 0) continue;
        sum += double(correct[c]) / double(total[c]);
        ++present;
    }
    if (present == 0) throw DomainError("mean_class_accuracy: no labelled sample");
    return sum / double(present);
}

void edit_voxels(SparseVoxelGrid& grid, std::span<const VoxelKey> voxels, std::span<const float> coefficients) {
    const auto stride = static_cast<std::size_t>(grid.sh_stride());
    if (coefficients.size() != 3 && coefficients.size() != stride) {
        throw DomainError("edit_voxels: expected 3 or " + std::to_string(stride) + " coefficients");
    }
    std::vector<std::size_t> indices;
    indices.reserve(voxels.size());
    for (const auto& key : voxels) {
        const auto i = grid.find(key);
        if (!i) throw DomainError("edit_voxels: unknown voxel key (level " + std::to_string(key.level) + ", code " +
                                  std::to_string(key.code) + ")");
        indices.push_back(*i);
    }
    for (std::size_t i : indices) {
        auto sh = grid.sh(i);
        std::fill(sh.begin(), sh.end(), 0.0f);
        std::copy(coefficients.begin(), coefficients.end(), sh.begin());
    }
}

}  // namespace svf
