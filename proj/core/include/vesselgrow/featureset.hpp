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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vesselgrow/filters.hpp"
#include "vesselgrow/image.hpp"
#include "vesselgrow/imaging.hpp"

namespace vesselgrow {

inline constexpr std::size_t kGreyFeatureCount = 28;
inline constexpr std::size_t kFeatureCount = 30;
inline constexpr std::size_t kImmediateConnectivityIndex = 28;
inline constexpr std::size_t kRadialConnectivityIndex = 29;
inline constexpr int kDefaultRadialRadius = 7;

// Per-pixel feature vector:
//   [0-9]   Hessian: det, a, b, c, d, lambda1, lambda2, gamma-norm, modulus, trace
//   [10-13] 7x7 window: mean, max, min, median
//   [14-17] anisotropic diffusion, configs kDiffusionConfigs[0..3]
//   [18-23] morphology, configs kMorphConfigs[0..5]
//   [24-25] Kuwahara a = 5, a = 10
//   [26-27] light sobel (t=-10, d=2), (t=-10, d=5)
//   [28]    immediate connectivity, [29] radial connectivity
using FeatureVector = std::array<double, kFeatureCount>;

// Column names, in feature order (also the CSV header prefix).
const std::array<std::string_view, kFeatureCount>& feature_names();
std::vector<std::string> feature_name_list();

// Index of a grey-level plane by name, or -1.
int grey_plane_index(std::string_view name) noexcept;

inline constexpr DiffusionParams kDiffusionConfigs[4] = {
    {.lambda = 0.3, .kappa = 4.0, .iterations = 20},
    {.lambda = 0.5, .kappa = 3.0, .iterations = 10},
    {.lambda = 2.0, .kappa = 3.0, .iterations = 35},
    {.lambda = 0.8, .kappa = 6.0, .iterations = 40},
};

struct MorphConfig {
  int structuring_element;  // 1 = B1, 2 = B2
  int dilations;
  int erosions;
};
inline constexpr MorphConfig kMorphConfigs[6] = {
    {1, 1, 1}, {1, 1, 3}, {1, 3, 1}, {2, 1, 1}, {2, 1, 3}, {2, 3, 1},
};

inline constexpr int kKuwaharaHalfSizes[2] = {5, 10};

struct LightSobelConfig {
  double threshold;
  int distance;
};
inline constexpr LightSobelConfig kLightSobelConfigs[2] = {{-10.0, 2}, {-10.0, 5}};

// The 28 grey-level planes of one image.
struct FeatureStack {
  std::string source_id;
  std::array<Plane, kGreyFeatureCount> planes;

  int width() const noexcept { return planes[0].width(); }
  int height() const noexcept { return planes[0].height(); }

  // Writes planes[k](x, y) into out[k] for k < 28; leaves out[28..29] alone.
  void fill_grey(int x, int y, FeatureVector& out) const noexcept {
    const std::size_t i = planes[0].index(x, y);
    for (std::size_t k = 0; k < kGreyFeatureCount; ++k) out[k] = planes[k][i];
  }
};

// Runs the whole filter bank. Throws DimensionError below 3x3.
// `threads` = 0 uses thread_count().
FeatureStack extract_stack(const GrayImage& img, std::string source_id = {},
                           int threads = 0);

struct Connectivity {
  bool immediate = false;
  bool radial = false;
  friend bool operator==(const Connectivity&, const Connectivity&) = default;
};

// Offsets q != 0 with |q|^2 <= radius^2, row-major.
std::vector<Offset> radial_offsets(int radius);

// Connectivity flags read from a ground-truth mask. The pixel itself is
// never counted. Throws BoundsError when (x, y) lies outside the mask.
Connectivity truth_connectivity(const BinaryMask& truth, int x, int y,
                                int radius = kDefaultRadialRadius);

struct LabeledRow {
  FeatureVector features{};
  bool label = false;
  std::string image_id;
  int x = 0;
  int y = 0;
  friend bool operator==(const LabeledRow&, const LabeledRow&) = default;
};

struct LabeledDataset {
  std::vector<std::string> feature_names = feature_name_list();
  std::vector<LabeledRow> rows;

  std::size_t size() const noexcept { return rows.size(); }
  bool empty() const noexcept { return rows.empty(); }
  void append(const LabeledDataset& other);
  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

struct SampleOptions {
  double subsample = 1.0;   // retention rate in (0, 1]
  std::uint64_t seed = 0;
  bool balanced = false;    // equal vessel and background counts
  bool connectivity = true; // false forces features 28-29 to 0
  int radial_radius = kDefaultRadialRadius;

  void validate() const;
};

// Training rows in raster order: 28 stack values, ground-truth connectivity,
// label. Uniform mode keeps each pixel independently with probability
// `subsample`; balanced mode draws k = min(V, B, round(subsample * (V+B) / 2))
// pixels of each class without replacement. The stream depends on
// (seed, image_id) only.
LabeledDataset build_training_rows(const DatasetEntry& entry, const SampleOptions& opts);
LabeledDataset build_training_rows(const DatasetEntry& entry, const FeatureStack& stack,
                                   const SampleOptions& opts);

// CSV: 30 feature columns, then label,image_id,x,y. Numbers use the shortest
// representation that round-trips exactly.
void write_csv(const LabeledDataset& ds, const std::filesystem::path& path);
// Throws IoError, SchemaError.
LabeledDataset read_csv(const std::filesystem::path& path);

}  // namespace vesselgrow
