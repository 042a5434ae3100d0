// Copyright 2026 The VesselGrow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vesselgrow/image.hpp"

namespace vesselgrow {

struct DatasetEntry {
  std::string image_id;
  GrayImage image;
  BinaryMask truth;
};

// Decodes a PNG (8/16-bit gray, gray+alpha, RGB, RGBA, palette) or PGM (P2/P5)
// file, detected by content. Color is reduced with BT.601 luma weights;
// 16-bit samples are rescaled linearly to [0, 255]; alpha is dropped.
// Throws IoError when the file cannot be read, FormatError otherwise.
GrayImage load_gray(const std::filesystem::path& path);

// Writes an 8-bit grayscale PNG, vessel = 255, background = 0.
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

// Writes an 8-bit grayscale PNG of round(v) for each intensity.
void save_gray8(const GrayImage& img, const std::filesystem::path& path);

// Writes a 16-bit grayscale PNG of round(v * 65535) for values in [0, 1]
// (clamped). Used for probability planes.
void save_unit16(const Plane& plane, const std::filesystem::path& path);

// Rescales a plane linearly so that its min maps to 0 and its max to 255.
// A constant plane maps to all zeros.
GrayImage normalize_min_max(const Plane& plane);

// Reads `<id>.png` + `<id>_gt.png` pairs (PGM accepted too) from `dir`,
// sorted by id. Ground truth is thresholded at >= 128.
// Throws IoError, PairingError, DimensionError.
std::vector<DatasetEntry> load_dataset(const std::filesystem::path& dir);

// Writes a dataset directory in the layout load_dataset expects.
void save_dataset(const std::vector<DatasetEntry>& entries,
                  const std::filesystem::path& dir);

}  // namespace vesselgrow
