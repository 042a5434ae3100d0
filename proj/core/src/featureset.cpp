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

#include "vesselgrow/featureset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "vesselgrow/parallel.hpp"
#include "vesselgrow/rng.hpp"

namespace vesselgrow {
namespace {

constexpr std::array<std::string_view, kFeatureCount> kNames = {
    "hess_det", "hess_a",    "hess_b",    "hess_c",    "hess_d",    "hess_l1",
    "hess_l2",  "hess_gamma", "hess_mod", "hess_tr",   "win_mean",  "win_max",
    "win_min",  "win_med",   "aniso_1",   "aniso_2",   "aniso_3",   "aniso_4",
    "morph_1",  "morph_2",   "morph_3",   "morph_4",   "morph_5",   "morph_6",
    "kuw_11",   "kuw_21",    "lsobel_d2", "lsobel_d5", "conn_imm",  "conn_rad",
};

constexpr std::string_view kTrailingColumns[] = {"label", "image_id", "x", "y"};

// Precomputed connectivity flags for every pixel of a mask.
struct ConnectivityMaps {
  BinaryMask immediate;
  BinaryMask radial;
};

ConnectivityMaps connectivity_maps(const BinaryMask& truth, int radius) {
  const int w = truth.width();
  const int h = truth.height();
  ConnectivityMaps maps{BinaryMask(w, h), BinaryMask(w, h)};
  const std::vector<Offset> disc = radial_offsets(radius);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!truth(x, y)) continue;
      // Spread this vessel pixel to everyone who would see it.
      for (const Offset& o : disc) {
        const int qx = x + o.dx;
        const int qy = y + o.dy;
        if (!truth.contains(qx, qy)) continue;
        maps.radial(qx, qy) = 1;
        if (std::abs(o.dx) <= 1 && std::abs(o.dy) <= 1) maps.immediate(qx, qy) = 1;
      }
    }
  }
  return maps;
}

void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void append_number(std::string& out, long long v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename T>
T parse_field(std::string_view field, std::size_t line_no, std::string_view column) {
  T value{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw SchemaError("line " + std::to_string(line_no) + ": cannot parse column '" +
                      std::string(column) + "' value '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

const std::array<std::string_view, kFeatureCount>& feature_names() { return kNames; }

std::vector<std::string> feature_name_list() {
  return {kNames.begin(), kNames.end()};
}

int grey_plane_index(std::string_view name) noexcept {
  for (std::size_t k = 0; k < kGreyFeatureCount; ++k) {
    if (kNames[k] == name) return static_cast<int>(k);
  }
  return -1;
}

FeatureStack extract_stack(const GrayImage& img, std::string source_id, int threads) {
  if (img.width() < 3 || img.height() < 3) {
    throw DimensionError("feature extraction needs at least a 3x3 image");
  }
  FeatureStack stack;
  stack.source_id = std::move(source_id);
  const StructuringElement b1 = make_b1();
  const StructuringElement b2 = make_b2();

  // One task per independent filter group; each writes disjoint planes.
  enum Task { kHessian, kWindow, kDiffusion0, kMorph0 = kDiffusion0 + 4,
              kKuwahara0 = kMorph0 + 6, kSobel0 = kKuwahara0 + 2, kTaskCount = kSobel0 + 2 };
  parallel_for(kTaskCount, [&](std::size_t task) {
    const int t = static_cast<int>(task);
    if (t == kHessian) {
      HessianPlanes hp = hessian_planes(img);
      for (std::size_t k = 0; k < kHessianPlaneCount; ++k) stack.planes[k] = std::move(hp.planes[k]);
    } else if (t == kWindow) {
      WindowStats ws = window_stats(img, 7);
      stack.planes[10] = std::move(ws.mean);
      stack.planes[11] = std::move(ws.max);
      stack.planes[12] = std::move(ws.min);
      stack.planes[13] = std::move(ws.median);
    } else if (t < kMorph0) {
      const int k = t - kDiffusion0;
      stack.planes[14 + k] = anisotropic_diffusion(img, kDiffusionConfigs[k]).plane();
    } else if (t < kKuwahara0) {
      const int k = t - kMorph0;
      const MorphConfig& cfg = kMorphConfigs[k];
      stack.planes[18 + k] =
          morph_feature(img, cfg.structuring_element == 1 ? b1 : b2, cfg.dilations,
                        cfg.erosions).plane();
    } else if (t < kSobel0) {
      const int k = t - kKuwahara0;
      stack.planes[24 + k] = kuwahara(img, kKuwaharaHalfSizes[k]).plane();
    } else {
      const int k = t - kSobel0;
      stack.planes[26 + k] =
          light_sobel(img, kLightSobelConfigs[k].threshold, kLightSobelConfigs[k].distance);
    }
  }, threads);
  return stack;
}

std::vector<Offset> radial_offsets(int radius) {
  std::vector<Offset> out;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if ((dx != 0 || dy != 0) && dx * dx + dy * dy <= radius * radius) {
        out.push_back({dx, dy});
      }
    }
  }
  return out;
}

Connectivity truth_connectivity(const BinaryMask& truth, int x, int y, int radius) {
  if (!truth.contains(x, y)) {
    throw BoundsError("pixel (" + std::to_string(x) + ", " + std::to_string(y) +
                      ") outside " + std::to_string(truth.width()) + "x" +
                      std::to_string(truth.height()) + " mask");
  }
  Connectivity c;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if ((dx == 0 && dy == 0) || dx * dx + dy * dy > radius * radius) continue;
      const int qx = x + dx;
      const int qy = y + dy;
      if (!truth.contains(qx, qy) || !truth(qx, qy)) continue;
      c.radial = true;
      if (std::abs(dx) <= 1 && std::abs(dy) <= 1) c.immediate = true;
    }
  }
  return c;
}

void LabeledDataset::append(const LabeledDataset& other) {
  if (other.feature_names != feature_names) {
    throw SchemaError("cannot append datasets with different feature columns");
  }
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

void SampleOptions::validate() const {
  if (!(subsample > 0.0 && subsample <= 1.0)) {
    throw ParamError("subsample rate must lie in (0, 1]");
  }
  if (radial_radius < 1) throw ParamError("radial radius must be >= 1");
}

LabeledDataset build_training_rows(const DatasetEntry& entry, const SampleOptions& opts) {
  opts.validate();
  return build_training_rows(entry, extract_stack(entry.image, entry.image_id), opts);
}

LabeledDataset build_training_rows(const DatasetEntry& entry, const FeatureStack& stack,
                                   const SampleOptions& opts) {
  opts.validate();
  const BinaryMask& truth = entry.truth;
  if (stack.width() != truth.width() || stack.height() != truth.height()) {
    throw DimensionError("feature stack and ground truth differ in size for '" +
                         entry.image_id + "'");
  }
  const std::size_t n = truth.size();
  Rng rng(derive_seed(opts.seed, fnv1a(entry.image_id)));

  std::vector<std::uint8_t> keep(n, 0);
  if (!opts.balanced) {
    for (std::size_t i = 0; i < n; ++i) keep[i] = rng.uniform() < opts.subsample;
  } else {
    const std::size_t vessels = count_set(truth);
    const std::size_t background = n - vessels;
    const auto target = static_cast<std::size_t>(
        std::llround(opts.subsample * static_cast<double>(n) / 2.0));
    const std::size_t k = std::min({vessels, background, target});
    // Selection sampling per class keeps raster order.
    std::size_t seen[2] = {0, 0};
    std::size_t taken[2] = {0, 0};
    const std::size_t total[2] = {background, vessels};
    for (std::size_t i = 0; i < n; ++i) {
      const int cls = truth[i] ? 1 : 0;
      const std::size_t remaining = total[cls] - seen[cls];
      if (rng.below(remaining) < k - taken[cls]) {
        keep[i] = 1;
        ++taken[cls];
      }
      ++seen[cls];
    }
  }

  const ConnectivityMaps maps =
      opts.connectivity ? connectivity_maps(truth, opts.radial_radius)
                        : ConnectivityMaps{BinaryMask(truth.width(), truth.height()),
                                           BinaryMask(truth.width(), truth.height())};
  LabeledDataset ds;
  ds.rows.reserve(static_cast<std::size_t>(std::count(keep.begin(), keep.end(), 1)));
  for (int y = 0; y < truth.height(); ++y) {
    for (int x = 0; x < truth.width(); ++x) {
      const std::size_t i = truth.index(x, y);
      if (!keep[i]) continue;
      LabeledRow row;
      stack.fill_grey(x, y, row.features);
      row.features[kImmediateConnectivityIndex] = maps.immediate[i] ? 1.0 : 0.0;
      row.features[kRadialConnectivityIndex] = maps.radial[i] ? 1.0 : 0.0;
      row.label = truth[i] != 0;
      row.image_id = entry.image_id;
      row.x = x;
      row.y = y;
      ds.rows.push_back(std::move(row));
    }
  }
  return ds;
}

void write_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
  if (ds.feature_names.size() != kFeatureCount) {
    throw SchemaError("dataset has " + std::to_string(ds.feature_names.size()) +
                      " feature columns, expected 30");
  }
  std::string text;
  for (const auto& name : ds.feature_names) {
    text += name;
    text += ',';
  }
  text += "label,image_id,x,y\n";
  for (const LabeledRow& row : ds.rows) {
    if (row.image_id.find_first_of(",\"\r\n") != std::string::npos) {
      throw SchemaError("image id '" + row.image_id + "' cannot be stored in CSV");
    }
    for (double v : row.features) {
      append_number(text, v);
      text += ',';
    }
    text += row.label ? '1' : '0';
    text += ',';
    text += row.image_id;
    text += ',';
    append_number(text, static_cast<long long>(row.x));
    text += ',';
    append_number(text, static_cast<long long>(row.y));
    text += '\n';
  }

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
}

LabeledDataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("'" + path.string() + "' has no header");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_commas(line);
  constexpr std::size_t kColumns = kFeatureCount + 4;
  if (header.size() != kColumns) {
    throw SchemaError("'" + path.string() + "' has " + std::to_string(header.size()) +
                      " columns, expected " + std::to_string(kColumns));
  }
  for (std::size_t k = 0; k < 4; ++k) {
    if (header[kFeatureCount + k] != kTrailingColumns[k]) {
      throw SchemaError("'" + path.string() + "': column " +
                        std::to_string(kFeatureCount + k + 1) + " must be '" +
                        std::string(kTrailingColumns[k]) + "'");
    }
  }
  LabeledDataset ds;
  ds.feature_names.assign(header.begin(), header.begin() + kFeatureCount);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != kColumns) {
      throw SchemaError("'" + path.string() + "' line " + std::to_string(line_no) +
                        " has " + std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(kColumns));
    }
    LabeledRow row;
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      row.features[k] = parse_field<double>(fields[k], line_no, header[k]);
    }
    const int label = parse_field<int>(fields[kFeatureCount], line_no, "label");
    if (label != 0 && label != 1) {
      throw SchemaError("line " + std::to_string(line_no) + ": label must be 0 or 1");
    }
    row.label = label == 1;
    row.image_id = std::string(fields[kFeatureCount + 1]);
    row.x = parse_field<int>(fields[kFeatureCount + 2], line_no, "x");
    row.y = parse_field<int>(fields[kFeatureCount + 3], line_no, "y");
    ds.rows.push_back(std::move(row));
  }
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return ds;
}

}  // namespace vesselgrow
