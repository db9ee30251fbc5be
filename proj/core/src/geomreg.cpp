// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include "svf/geomreg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "svf/errors.hpp"

namespace svf {

void PatchSpec::validate() const {
    if (size < 2 || stride < 1 || !(eps_std > 0.0)) throw DomainError("invalid patch spec");
}

namespace {

void standardize(std::vector<double>& v, double eps) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = std::max(std::sqrt(var / static_cast<double>(v.size())), eps);
    for (double& x : v) x = (x - mean) / sd;
}

}  // namespace

double patch_depth_loss(const DepthMap& rendered, const DepthMap& prior, const PatchSpec& spec) {
    spec.validate();
    if (!rendered.same_shape(prior)) throw DomainError("patch_depth_loss: map size mismatch");
    double total = 0.0;
    std::size_t patches = 0;
    std::vector<double> a, b;
    for (int y0 = 0; y0 + spec.size <= rendered.height(); y0 += spec.stride) {
        for (int x0 = 0; x0 + spec.size <= rendered.width(); x0 += spec.stride) {
            a.clear();
            b.clear();
            bool complete = true;
            for (int y = y0; y < y0 + spec.size && complete; ++y) {
                for (int x = x0; x < x0 + spec.size; ++x) {
                    if (!rendered.valid(x, y) || !prior.valid(x, y)) {
                        complete = false;
                        break;
                    }
                    a.push_back(rendered.scalar(x, y));
                    b.push_back(prior.scalar(x, y));
                }
            }
            if (!complete) continue;
            standardize(a, spec.eps_std);
            standardize(b, spec.eps_std);
            double sq = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
            total += sq;
            ++patches;
        }
    }
    if (patches == 0) throw DomainError("patch_depth_loss: no fully valid patch");
    return total / static_cast<double>(patches);
}

double normal_loss(const NormalMap& rendered, const NormalMap& prior) {
    if (!rendered.same_shape(prior) || rendered.channels() != 3 || prior.channels() != 3) {
        throw DomainError("normal_loss: map size mismatch");
    }
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t p = 0; p < rendered.pixel_count(); ++p) {
        if (!rendered.valid(p) || !prior.valid(p)) continue;
        const auto n = rendered.at(p);
        const auto m = prior.at(p);
        const double dot = double(n[0]) * m[0] + double(n[1]) * m[1] + double(n[2]) * m[2];
        total += 1.0 - dot;
        ++count;
    }
    if (count == 0) throw DomainError("normal_loss: no jointly valid pixel");
    return total / static_cast<double>(count);
}

}  // namespace svf
