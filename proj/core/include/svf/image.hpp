// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace svf {

// Row-major multi-channel float image with a per-pixel validity mask.
// Invalid pixels hold NaN in every channel and are skipped by reductions.
class ImagePlane {
public:
    ImagePlane() = default;
    ImagePlane(int width, int height, int channels);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }
    bool same_shape(const ImagePlane& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool valid(int x, int y) const { return valid_[index(x, y)] != 0; }
    bool valid(std::size_t pixel) const { return valid_[pixel] != 0; }

    std::span<float> at(int x, int y) { return {values_.data() + index(x, y) * channels_, std::size_t(channels_)}; }
    std::span<const float> at(int x, int y) const {
        return {values_.data() + index(x, y) * channels_, std::size_t(channels_)};
    }
    std::span<const float> at(std::size_t pixel) const {
        return {values_.data() + pixel * channels_, std::size_t(channels_)};
    }
    float scalar(int x, int y) const { return values_[index(x, y) * channels_]; }

    // Writes the value and marks the pixel valid.
    void set(int x, int y, std::span<const float> value);
    void set(int x, int y, float value);
    void invalidate(int x, int y);

    std::span<const float> values() const { return values_; }
    std::span<float> values() { return values_; }
    std::span<const std::uint8_t> validity() const { return valid_; }
    std::size_t valid_count() const;

    friend bool operator==(const ImagePlane&, const ImagePlane&);

private:
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<float> values_;
    std::vector<std::uint8_t> valid_;
};

// Channel conventions.
using DepthMap = ImagePlane;       // 1 channel, ray distance from the camera center (m)
using AlphaMap = ImagePlane;       // 1 channel
using ConfidenceMap = ImagePlane;  // 1 channel
using ColorMap = ImagePlane;       // 3 channels
using NormalMap = ImagePlane;      // 3 channels, unit world-space normals
using FeatureMap = ImagePlane;     // D channels

}  // namespace svf
