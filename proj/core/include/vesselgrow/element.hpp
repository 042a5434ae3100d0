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

#include <cstddef>
#include <cstdint>
#include <deque>
#include <vector>

#include "vesselgrow/featureset.hpp"
#include "vesselgrow/forest.hpp"
#include "vesselgrow/image.hpp"

namespace vesselgrow {

enum class PixelLabel : std::uint8_t { kUnresolved = 0, kVessel = 1, kBackground = 2 };

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct ElementParams {
  double seed_threshold = 0.9;  // phase-1 acceptance, in (0.5, 1]
  double grow_threshold = 0.5;  // phase-2 acceptance, <= seed_threshold
  int radial_radius = kDefaultRadialRadius;
  // false forces both connectivity features to 0 (ablation).
  bool use_connectivity = true;
  // Phase 1 scores with Classifier::predict_seed_proba; false uses
  // predict_proba for both phases.
  bool use_seed_model = true;

  // Throws ParamError.
  void validate() const;
};

// Mutable per-image state of one segmentation run.
class SegmentationState {
 public:
  SegmentationState(int width, int height);

  int width() const noexcept { return labels_.width(); }
  int height() const noexcept { return labels_.height(); }

  PixelLabel label(int x, int y) const noexcept { return labels_(x, y); }
  void set_label(int x, int y, PixelLabel l) noexcept { labels_(x, y) = l; }
  double proba(int x, int y) const noexcept { return proba_(x, y); }
  void set_proba(int x, int y, double p) noexcept { proba_(x, y) = p; }

  const Grid<PixelLabel>& labels() const noexcept { return labels_; }
  const Plane& probabilities() const noexcept { return proba_; }

  // Queues (x, y) unless it was already queued in the current phase.
  bool enqueue(Point p);
  bool frontier_empty() const noexcept { return frontier_.empty(); }
  Point pop();
  // Clears the visited set so the next phase may queue pixels again.
  void start_phase();

  std::size_t count(PixelLabel l) const noexcept;

 private:
  Grid<PixelLabel> labels_;
  Plane proba_;
  Grid<std::uint8_t> queued_;
  std::deque<Point> frontier_;
};

// Connectivity read from the current labels, same geometry as
// truth_connectivity (8-neighbourhood, Euclidean disc, centre excluded).
// Throws BoundsError.
Connectivity state_connectivity(const SegmentationState& state, int x, int y,
                                int radius = kDefaultRadialRadius);

struct SegmentStats {
  std::size_t classifier_calls = 0;
  std::size_t phase1_calls = 0;
  std::size_t phase2_calls = 0;
  std::size_t seeds = 0;            // vessel after phase 1
  std::size_t grown = 0;            // vessel in phase 2
  std::size_t rejected = 0;         // background in phase 2
  std::size_t fallback_vessel = 0;  // unreached, vessel by phase-1 probability
  std::size_t fallback_background = 0;
  std::size_t unresolved = 0;       // after finalization; always 0
};

struct SegmentResult {
  BinaryMask mask;
  Plane proba;
  SegmentStats stats;
};

// Seed-then-grow classification.
//  1. Raster scan with connectivity (0, 0); proba >= seed_threshold -> vessel,
//     its 8-neighbours join the FIFO frontier.
//  2. Pop the frontier; each unresolved pixel is re-classified with
//     connectivity from the current labels; proba >= grow_threshold -> vessel
//     and its unresolved neighbours are queued, otherwise background (final).
//  3. Pixels never reached fall back to their phase-1 proba >= grow_threshold.
// The probability plane holds the last proba computed for every pixel.
// Throws DimensionError when the classifier does not take 30 features.
// Forest parameters for ELEMENT models: `base` plus a seed forest that
// ignores the two connectivity features.
ForestParams element_forest_params(ForestParams base = {});

SegmentResult segment(const FeatureStack& stack, const Classifier& model,
                      const ElementParams& params, int threads = 0);
SegmentResult segment(const GrayImage& img, const Classifier& model,
                      const ElementParams& params, int threads = 0);

}  // namespace vesselgrow
