// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "svf/image.hpp"

namespace svf::cli {

// 8-bit PNG of a 1- or 3-channel plane. Values are clamped to [0, 1];
// invalid pixels are written black.
void write_png(const std::filesystem::path& path, const ImagePlane& image);

}  // namespace svf::cli
