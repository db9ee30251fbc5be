// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#include "svf/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "svf/errors.hpp"

namespace svf {

ImagePlane::ImagePlane(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
    if (width < 0 || height < 0 || channels <= 0) throw DomainError("ImagePlane: invalid shape");
    values_.assign(pixel_count() * channels_, std::numeric_limits<float>::quiet_NaN());
    valid_.assign(pixel_count(), 0);
}

void ImagePlane::set(int x, int y, std::span<const float> value) {
    if (value.size() != static_cast<std::size_t>(channels_)) throw DomainError("ImagePlane::set: channel mismatch");
    std::copy(value.begin(), value.end(), values_.begin() + index(x, y) * channels_);
    valid_[index(x, y)] = 1;
}

void ImagePlane::set(int x, int y, float value) { set(x, y, std::span<const float>(&value, 1)); }

void ImagePlane::invalidate(int x, int y) {
    std::fill_n(values_.begin() + index(x, y) * channels_, channels_, std::numeric_limits<float>::quiet_NaN());
    valid_[index(x, y)] = 0;
}

std::size_t ImagePlane::valid_count() const {
    return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{1}));
}

bool operator==(const ImagePlane& a, const ImagePlane& b) {
    if (a.width_ != b.width_ || a.height_ != b.height_ || a.channels_ != b.channels_) return false;
    if (a.valid_ != b.valid_) return false;
    // bitwise so NaN sentinels compare equal
    return std::memcmp(a.values_.data(), b.values_.data(), a.values_.size() * sizeof(float)) == 0;
}

}  // namespace svf
