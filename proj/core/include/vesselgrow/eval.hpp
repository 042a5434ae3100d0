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

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vesselgrow/element.hpp"
#include "vesselgrow/featureset.hpp"
#include "vesselgrow/forest.hpp"
#include "vesselgrow/imaging.hpp"

namespace vesselgrow {

// Pixel counts with vessel as the positive class.
struct Confusion {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  Confusion& operator+=(const Confusion& o) noexcept {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

// Throws DimensionError when the masks differ in size.
Confusion confusion(const BinaryMask& pred, const BinaryMask& truth);

// A rate is absent when its denominator is zero.
struct Rates {
  std::optional<double> accuracy;
  std::optional<double> tpr;
  std::optional<double> tnr;
  friend bool operator==(const Rates&, const Rates&) = default;
};

Rates rates(const Confusion& c) noexcept;

// Area under the ROC curve by the trapezoid rule over distinct-score blocks;
// ties contribute half credit. Throws SingleClassError if either class is
// missing, DimensionError on length mismatch, ParamError on NaN scores.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // score >= threshold counts as positive
};

// Curve from (0, 0) to (1, 1), one point per distinct score.
std::vector<RocPoint> roc_curve(std::span<const double> scores,
                                std::span<const std::uint8_t> labels);

struct ImageMetrics {
  Confusion confusion;
  Rates rates;
  std::optional<double> auc;  // absent for single-class truth
};

ImageMetrics score_segmentation(const BinaryMask& pred, const Plane& proba,
                                const BinaryMask& truth);

struct MetricsReport {
  std::map<std::string, ImageMetrics> per_image;
  ImageMetrics aggregate;  // pooled over every pixel of every image
  Rates mean_of_images;    // unweighted mean of per-image rates that exist
  std::optional<double> mean_auc;
  std::map<std::string, std::string> notes;

  std::string summary_line() const;
  std::string to_table() const;
  std::string to_json() const;
};

struct FoldOutcome {
  std::string image_id;
  BinaryMask mask;
  Plane proba;
  SegmentStats segment_stats;
  TrainReport train_report;
  std::uint64_t model_digest = 0;  // FNV-1a of the serialized model
  ImageMetrics metrics;
};

struct LoioOptions {
  ForestParams forest = element_forest_params();
  ElementParams element;
  // subsample/seed/balanced for training rows; the connectivity flag is taken
  // from element.use_connectivity so training and inference agree.
  SampleOptions sampling{.subsample = 0.1};
  int threads = 0;
  std::function<void(const FoldOutcome&, const ForestModel&)> on_fold;
  std::function<void(std::string_view)> log;
};

struct LoioResult {
  MetricsReport report;
  std::vector<FoldOutcome> folds;  // in entry order
  std::vector<RocPoint> pooled_roc;
};

// Leave-one-image-out: for each entry, train on all others and segment it.
// Throws ParamError with fewer than two entries.
LoioResult leave_one_image_out(const std::vector<DatasetEntry>& entries,
                               const LoioOptions& opts);

MetricsReport build_report(const std::vector<FoldOutcome>& folds,
                           const std::vector<const BinaryMask*>& truths);

}  // namespace vesselgrow
