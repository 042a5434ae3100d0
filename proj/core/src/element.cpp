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

#include "vesselgrow/element.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "vesselgrow/parallel.hpp"

namespace vesselgrow {

void ElementParams::validate() const {
  if (!(seed_threshold > 0.5 && seed_threshold <= 1.0)) {
    throw ParamError("seed threshold must lie in (0.5, 1]");
  }
  if (!(grow_threshold >= 0.0 && grow_threshold <= seed_threshold)) {
    throw ParamError("grow threshold must lie in [0, seed threshold]");
  }
  if (radial_radius < 1) throw ParamError("radial radius must be >= 1");
}

SegmentationState::SegmentationState(int width, int height)
    : labels_(width, height, PixelLabel::kUnresolved),
      proba_(width, height, 0.0),
      queued_(width, height, 0) {}

bool SegmentationState::enqueue(Point p) {
  std::uint8_t& q = queued_(p.x, p.y);
  if (q) return false;
  q = 1;
  frontier_.push_back(p);
  return true;
}

Point SegmentationState::pop() {
  const Point p = frontier_.front();
  frontier_.pop_front();
  return p;
}

void SegmentationState::start_phase() {
  std::fill(queued_.data().begin(), queued_.data().end(), std::uint8_t{0});
  for (const Point& p : frontier_) queued_(p.x, p.y) = 1;
}

std::size_t SegmentationState::count(PixelLabel l) const noexcept {
  return static_cast<std::size_t>(
      std::count(labels_.data().begin(), labels_.data().end(), l));
}

Connectivity state_connectivity(const SegmentationState& state, int x, int y, int radius) {
  if (!state.labels().contains(x, y)) {
    throw BoundsError("pixel (" + std::to_string(x) + ", " + std::to_string(y) +
                      ") outside the segmentation state");
  }
  Connectivity c;
  const int r2 = radius * radius;
  for (int dy = -radius; dy <= radius; ++dy) {
    const int qy = y + dy;
    if (qy < 0 || qy >= state.height()) continue;
    for (int dx = -radius; dx <= radius; ++dx) {
      if ((dx == 0 && dy == 0) || dx * dx + dy * dy > r2) continue;
      const int qx = x + dx;
      if (qx < 0 || qx >= state.width()) continue;
      if (state.label(qx, qy) != PixelLabel::kVessel) continue;
      c.radial = true;
      if (std::abs(dx) <= 1 && std::abs(dy) <= 1) {
        c.immediate = true;
        return c;
      }
    }
  }
  return c;
}

namespace {

void queue_unresolved_neighbours(SegmentationState& state, Point p) {
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const int qx = p.x + dx;
      const int qy = p.y + dy;
      if (qx < 0 || qy < 0 || qx >= state.width() || qy >= state.height()) continue;
      if (state.label(qx, qy) == PixelLabel::kUnresolved) state.enqueue({qx, qy});
    }
  }
}

}  // namespace

ForestParams element_forest_params(ForestParams base) {
  base.seed_masked_features = {static_cast<std::uint32_t>(kImmediateConnectivityIndex),
                               static_cast<std::uint32_t>(kRadialConnectivityIndex)};
  return base;
}

SegmentResult segment(const FeatureStack& stack, const Classifier& model,
                      const ElementParams& params, int threads) {
  params.validate();
  if (model.n_features() != kFeatureCount) {
    throw DimensionError("classifier expects " + std::to_string(model.n_features()) +
                         " features, segmentation provides " +
                         std::to_string(kFeatureCount));
  }
  const int w = stack.width();
  const int h = stack.height();
  SegmentationState state(w, h);
  SegmentStats stats;

  // Phase 1 is order-independent (no connectivity), so rows can be scored in
  // parallel; decisions are applied afterwards in raster order.
  Plane phase1(w, h);
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
    const int y = static_cast<int>(row);
    FeatureVector fv{};
    for (int x = 0; x < w; ++x) {
      stack.fill_grey(x, y, fv);
      fv[kImmediateConnectivityIndex] = 0.0;
      fv[kRadialConnectivityIndex] = 0.0;
      phase1(x, y) = params.use_seed_model ? model.predict_seed_proba(fv)
                                           : model.predict_proba(fv);
    }
  }, threads);
  stats.phase1_calls = phase1.size();

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double p = phase1(x, y);
      state.set_proba(x, y, p);
      if (p >= params.seed_threshold) {
        state.set_label(x, y, PixelLabel::kVessel);
        ++stats.seeds;
        queue_unresolved_neighbours(state, {x, y});
      }
    }
  }

  state.start_phase();
  FeatureVector fv{};
  while (!state.frontier_empty()) {
    const Point p = state.pop();
    if (state.label(p.x, p.y) != PixelLabel::kUnresolved) continue;
    stack.fill_grey(p.x, p.y, fv);
    if (params.use_connectivity) {
      const Connectivity c = state_connectivity(state, p.x, p.y, params.radial_radius);
      fv[kImmediateConnectivityIndex] = c.immediate ? 1.0 : 0.0;
      fv[kRadialConnectivityIndex] = c.radial ? 1.0 : 0.0;
    } else {
      fv[kImmediateConnectivityIndex] = 0.0;
      fv[kRadialConnectivityIndex] = 0.0;
    }
    const double proba = model.predict_proba(fv);
    ++stats.phase2_calls;
    state.set_proba(p.x, p.y, proba);
    if (proba >= params.grow_threshold) {
      state.set_label(p.x, p.y, PixelLabel::kVessel);
      ++stats.grown;
      queue_unresolved_neighbours(state, p);
    } else {
      state.set_label(p.x, p.y, PixelLabel::kBackground);
      ++stats.rejected;
    }
  }

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (state.label(x, y) != PixelLabel::kUnresolved) continue;
      if (phase1(x, y) >= params.grow_threshold) {
        state.set_label(x, y, PixelLabel::kVessel);
        ++stats.fallback_vessel;
      } else {
        state.set_label(x, y, PixelLabel::kBackground);
        ++stats.fallback_background;
      }
    }
  }
  stats.unresolved = state.count(PixelLabel::kUnresolved);
  stats.classifier_calls = stats.phase1_calls + stats.phase2_calls;

  SegmentResult result{BinaryMask(w, h), state.probabilities(), stats};
  for (std::size_t i = 0; i < result.mask.size(); ++i) {
    result.mask[i] = state.labels()[i] == PixelLabel::kVessel ? 1 : 0;
  }
  return result;
}

SegmentResult segment(const GrayImage& img, const Classifier& model,
                      const ElementParams& params, int threads) {
  params.validate();
  return segment(extract_stack(img, {}, threads), model, params, threads);
}

}  // namespace vesselgrow
