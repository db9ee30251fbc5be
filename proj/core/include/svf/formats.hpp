// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

// On-disk formats. All multi-byte values are little-endian; all floating
// payloads are IEEE-754 binary32 unless noted.
//
// Grid (".lesv"):
//   char[4]  "LESV"
//   u32      version (1)
//   f64[6]   bounds min xyz, max xyz
//   u64      voxel count N
//   u32      feature dimension D (0 = no feature channel)
//   u32      SH degree S
//   N records sorted by (level, code):
//     u32 level, u64 code, f32[8] corner densities,
//     f32[3 (S+1)^2] SH coefficients (coefficient-major, RGB inner),
//     f32 feature weight sum, f32[D] feature        (last two only if D > 0)
//
// Image plane (".limg"):
//   char[4] "LIMG", u32 version (1), u32 dtype (0 = f32), u32 channels,
//   u32 width, u32 height, f32[width * height * channels] row-major values,
//   u8[ceil(width * height / 8)] validity bitmap, pixel p at bit p % 8 of
//   byte p / 8.
//
// TSDF field (".ltsd"):
//   char[4] "LTSD", u32 version (1), f64[6] bounds, u32 level, f64 trunc,
//   u64 count, then count records of i32 x, i32 y, i32 z, f32 phi,
//   f32 weight in brick order.
//
// Embedding vector: u32 dimension, f32[dimension].
// Embedding manifest: text, one "label path" per line ('#' comments). The
//   path is the last field; a label may contain single spaces.
// Crop manifest: text, one "anchor_x anchor_y width height path" per line,
//   each path an image plane with the crop's features.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "svf/feat2d.hpp"
#include "svf/grid.hpp"
#include "svf/image.hpp"
#include "svf/query.hpp"
#include "svf/tsdf.hpp"

namespace svf {

void write_grid(std::ostream& out, const SparseVoxelGrid& grid);
SparseVoxelGrid read_grid(std::istream& in);
void save_grid(const std::filesystem::path& path, const SparseVoxelGrid& grid);
SparseVoxelGrid load_grid(const std::filesystem::path& path);

void write_image(std::ostream& out, const ImagePlane& image);
ImagePlane read_image(std::istream& in);
void save_image(const std::filesystem::path& path, const ImagePlane& image);
ImagePlane load_image(const std::filesystem::path& path);

void write_tsdf(std::ostream& out, const TsdfField& field);
TsdfField read_tsdf(std::istream& in);
void save_tsdf(const std::filesystem::path& path, const TsdfField& field);
TsdfField load_tsdf(const std::filesystem::path& path);

void save_embedding(const std::filesystem::path& path, const std::vector<float>& vector);
std::vector<float> load_embedding(const std::filesystem::path& path);

// Relative paths resolve against the manifest's directory.
std::vector<QueryEmbedding> load_embedding_manifest(const std::filesystem::path& path);
// Writes <dir>/<label>.emb files plus the manifest.
void save_embedding_manifest(const std::filesystem::path& path, const std::vector<QueryEmbedding>& embeddings);

std::vector<CropFeature> load_crop_manifest(const std::filesystem::path& path);

// Text list "level code x y z label" of the given voxels.
void save_voxel_keys(const std::filesystem::path& path, const SparseVoxelGrid& grid,
                     const std::vector<std::size_t>& voxels, const std::string& label = {});

}  // namespace svf
