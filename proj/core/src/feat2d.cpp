// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include "svf/feat2d.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svf/errors.hpp"
#include "svf/parallel.hpp"

namespace svf {

double default_crop_sigma(int crop_width, int crop_height) { return 0.25 * std::max(crop_width, crop_height); }

std::vector<CropRect> crop_grid(int width, int height, int crop_size) {
    if (width <= 0 || height <= 0 || crop_size <= 0) throw DomainError("crop_grid: sizes must be positive");
    auto starts = [&](int extent) {
        const int size = std::min(crop_size, extent);
        const int stride = std::max(1, size / 2);
        std::vector<int> s;
        for (int a = 0; a + size <= extent; a += stride) s.push_back(a);
        if (s.back() + size < extent) s.push_back(extent - size);
        return std::pair{s, size};
    };
    const auto [xs, w] = starts(width);
    const auto [ys, h] = starts(height);
    std::vector<CropRect> crops;
    for (int y : ys)
        for (int x : xs) crops.push_back({x, y, w, h});
    return crops;
}

FeatureMap gaussian_window_blend(const std::vector<CropFeature>& crops, int out_width, int out_height,
                                 double sigma_g, double eps) {
    if (crops.empty()) throw DomainError("gaussian_window_blend: no crops");
    if (!(sigma_g > 0.0) || !(eps >= 0.0)) throw DomainError("gaussian_window_blend: sigma_g must be positive");
    const int channels = crops.front().feature.channels();
    const std::size_t pixels = std::size_t(out_width) * out_height;
    std::vector<double> num(pixels * channels, 0.0);
    std::vector<double> den(pixels, 0.0);
    std::vector<std::uint8_t> covered(pixels, 0);
    const double inv_two_sigma2 = 1.0 / (2.0 * sigma_g * sigma_g);
    for (const auto& crop : crops) {
        const FeatureMap& f = crop.feature;
        if (f.channels() != channels) throw DomainError("gaussian_window_blend: channel mismatch between crops");
        if (crop.anchor_x < 0 || crop.anchor_y < 0 || crop.anchor_x + f.width() > out_width ||
            crop.anchor_y + f.height() > out_height) {
            throw DomainError("gaussian_window_blend: crop extends outside the image");
        }
        const double cx = 0.5 * f.width(), cy = 0.5 * f.height();
        for (int y = 0; y < f.height(); ++y) {
            const double dy = y + 0.5 - cy;
            for (int x = 0; x < f.width(); ++x) {
                const std::size_t p = std::size_t(crop.anchor_y + y) * out_width + (crop.anchor_x + x);
                covered[p] = 1;
                if (!f.valid(x, y)) continue;
                const double dx = x + 0.5 - cx;
                const double g = std::exp(-(dx * dx + dy * dy) * inv_two_sigma2);
                const auto v = f.at(x, y);
                for (int c = 0; c < channels; ++c) num[p * channels + c] += g * v[c];
                den[p] += g;
            }
        }
    }
    FeatureMap out(out_width, out_height, channels);
    std::vector<float> value(channels);
    for (int y = 0; y < out_height; ++y) {
        for (int x = 0; x < out_width; ++x) {
            const std::size_t p = std::size_t(y) * out_width + x;
            if (!covered[p]) {
                throw DomainError("gaussian_window_blend: pixel (" + std::to_string(x) + ", " + std::to_string(y) +
                                  ") is not covered by any crop");
            }
            if (!(den[p] > 0.0)) continue;
            for (int c = 0; c < channels; ++c) value[c] = static_cast<float>(num[p * channels + c] / (den[p] + eps));
            out.set(x, y, value);
        }
    }
    return out;
}

void AttentionConfig::validate() const {
    if (!(cos_threshold >= -1.0 && cos_threshold < 1.0)) throw DomainError("attention: cos_threshold must be in [-1, 1)");
    if (iterations < 1) throw DomainError("attention: iterations must be >= 1");
    if (token_stride < 1) throw DomainError("attention: token_stride must be >= 1");
}

namespace {

FeatureMap aggregate(const FeatureMap& feature, const AttentionConfig& cfg, int iterations) {
    cfg.validate();
    const int s = cfg.token_stride;
    const int D = feature.channels();
    const int nx = (feature.width() + s - 1) / s;
    const int ny = (feature.height() + s - 1) / s;

    // Lattice slot -> token index, -1 where the lattice pixel is invalid.
    std::vector<int> slot(std::size_t(nx) * ny, -1);
    std::vector<double> tokens;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (!feature.valid(i * s, j * s)) continue;
            const auto v = feature.at(i * s, j * s);
            double norm = 0.0;
            for (float x : v) norm += double(x) * x;
            if (!(norm > 0.0)) {
                throw DomainError("attention: zero feature vector at pixel (" + std::to_string(i * s) + ", " +
                                  std::to_string(j * s) + ")");
            }
            slot[std::size_t(j) * nx + i] = static_cast<int>(tokens.size() / D);
            tokens.insert(tokens.end(), v.begin(), v.end());
        }
    }
    const std::size_t n = tokens.size() / D;

    std::vector<double> unit(tokens.size());
    std::vector<double> next(tokens.size());
    for (int it = 0; it < iterations; ++it) {
        for (std::size_t t = 0; t < n; ++t) {
            double norm = 0.0;
            for (int c = 0; c < D; ++c) norm += tokens[t * D + c] * tokens[t * D + c];
            norm = std::sqrt(norm);
            if (!(norm > 0.0)) throw DomainError("attention: token collapsed to zero");
            for (int c = 0; c < D; ++c) unit[t * D + c] = tokens[t * D + c] / norm;
        }
        parallel_for(n, [&](std::size_t begin, std::size_t end) {
            std::vector<double> acc(D);
            for (std::size_t a = begin; a < end; ++a) {
                std::fill(acc.begin(), acc.end(), 0.0);
                double wsum = 0.0;
                for (std::size_t b = 0; b < n; ++b) {
                    double cosine = 0.0;
                    for (int c = 0; c < D; ++c) cosine += unit[a * D + c] * unit[b * D + c];
                    if (!(cosine > cfg.cos_threshold)) continue;
                    wsum += cosine;
                    for (int c = 0; c < D; ++c) acc[c] += cosine * tokens[b * D + c];
                }
                for (int c = 0; c < D; ++c) next[a * D + c] = wsum > 0.0 ? acc[c] / wsum : tokens[a * D + c];
            }
        });
        tokens.swap(next);
    }

    FeatureMap out(feature.width(), feature.height(), D);
    std::vector<float> value(D);
    for (int y = 0; y < feature.height(); ++y) {
        const int j0 = y / s;
        const int j1 = std::min(j0 + 1, ny - 1);
        const double fy = j1 == j0 ? 0.0 : double(y - j0 * s) / s;
        for (int x = 0; x < feature.width(); ++x) {
            if (!feature.valid(x, y)) continue;
            const int i0 = x / s;
            const int i1 = std::min(i0 + 1, nx - 1);
            const double fx = i1 == i0 ? 0.0 : double(x - i0 * s) / s;
            const int corners[4][2] = {{i0, j0}, {i1, j0}, {i0, j1}, {i1, j1}};
            const double weights[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
            std::vector<double> blended(D, 0.0);
            double wsum = 0.0;
            for (int k = 0; k < 4; ++k) {
                const int t = slot[std::size_t(corners[k][1]) * nx + corners[k][0]];
                if (t < 0 || weights[k] == 0.0) continue;
                wsum += weights[k];
                for (int c = 0; c < D; ++c) blended[c] += weights[k] * tokens[std::size_t(t) * D + c];
            }
            if (wsum > 0.0) {
                for (int c = 0; c < D; ++c) value[c] = static_cast<float>(blended[c] / wsum);
                out.set(x, y, value);
            } else {
                out.set(x, y, feature.at(x, y));
            }
        }
    }
    return out;
}

}  // namespace

FeatureMap scra(const FeatureMap& feature, const AttentionConfig& cfg) {
    return aggregate(feature, cfg, cfg.iterations);
}

FeatureMap scga(const FeatureMap& feature, const AttentionConfig& cfg) { return aggregate(feature, cfg, 1); }

}  // namespace svf
