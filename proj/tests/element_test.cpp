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

#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "scenes.hpp"
#include "vesselgrow/element.hpp"
#include "vesselgrow/errors.hpp"

namespace vesselgrow {
namespace {

TEST(ElementParamsTest, Validation) {
  EXPECT_NO_THROW(ElementParams{}.validate());
  EXPECT_THROW((ElementParams{.seed_threshold = 0.5}).validate(), ParamError);
  EXPECT_THROW((ElementParams{.seed_threshold = 1.1}).validate(), ParamError);
  EXPECT_THROW((ElementParams{.seed_threshold = 0.7, .grow_threshold = 0.8}).validate(),
               ParamError);
  EXPECT_THROW((ElementParams{.radial_radius = 0}).validate(), ParamError);
}

TEST(SegmentationStateTest, FrontierVisitsOncePerPhase) {
  SegmentationState s(4, 4);
  EXPECT_TRUE(s.enqueue({1, 1}));
  EXPECT_FALSE(s.enqueue({1, 1}));
  EXPECT_EQ(s.pop(), (Point{1, 1}));
  EXPECT_TRUE(s.frontier_empty());
  EXPECT_FALSE(s.enqueue({1, 1}));
  s.start_phase();
  EXPECT_TRUE(s.enqueue({1, 1}));
  EXPECT_EQ(s.count(PixelLabel::kUnresolved), 16u);
  EXPECT_EQ(s.proba(3, 3), 0.0);
}

TEST(StateConnectivityTest, Examples) {
  SegmentationState s(32, 32);
  EXPECT_EQ(state_connectivity(s, 10, 10), (Connectivity{false, false}));
  s.set_label(9, 10, PixelLabel::kVessel);
  EXPECT_EQ(state_connectivity(s, 10, 10), (Connectivity{true, true}));

  SegmentationState far(32, 32);
  far.set_label(16, 10, PixelLabel::kVessel);  // distance 6
  EXPECT_EQ(state_connectivity(far, 10, 10), (Connectivity{false, true}));
  SegmentationState farther(32, 32);
  farther.set_label(16, 14, PixelLabel::kVessel);  // distance sqrt(52) ~ 7.2
  EXPECT_EQ(state_connectivity(farther, 10, 10), (Connectivity{false, false}));
}

TEST(StateConnectivityTest, OnlyVesselCountsAndCentreIsExcluded) {
  SegmentationState s(16, 16);
  s.set_label(5, 5, PixelLabel::kVessel);
  s.set_label(6, 5, PixelLabel::kBackground);
  EXPECT_EQ(state_connectivity(s, 5, 5), (Connectivity{false, false}));
  EXPECT_EQ(state_connectivity(s, 7, 5), (Connectivity{false, true}));
  EXPECT_THROW(state_connectivity(s, -1, 0), BoundsError);
}

TEST(StateConnectivityTest, AgreesWithTruthConnectivity) {
  const BinaryMask m = vgtest::random_mask(20, 20, 4, 0.03);
  SegmentationState s(20, 20);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x)
      if (m(x, y)) s.set_label(x, y, PixelLabel::kVessel);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x)
      ASSERT_EQ(state_connectivity(s, x, y, 5), truth_connectivity(m, x, y, 5));
}

TEST(SegmentTest, ConstantModels) {
  const GrayImage img = vgtest::random_image(24, 20, 1);
  const SegmentResult none = segment(img, vgtest::ConstantModel(0.0), {});
  EXPECT_EQ(count_set(none.mask), 0u);
  for (double p : none.proba.data()) EXPECT_EQ(p, 0.0);
  const SegmentResult all = segment(img, vgtest::ConstantModel(1.0), {});
  EXPECT_EQ(count_set(all.mask), img.size());
  EXPECT_EQ(all.stats.seeds, img.size());
  EXPECT_EQ(all.stats.phase2_calls, 0u);
}

TEST(SegmentTest, RejectsWrongFeatureCount) {
  const GrayImage img(8, 8, 1.0);
  EXPECT_THROW(segment(img, vgtest::ConstantModel(0.5, 29), {}), DimensionError);
}

TEST(SegmentTest, CurveSceneGrowsThroughConnectivity) {
  const vgtest::CurveScene scene = vgtest::make_curve_scene();
  const vgtest::TieredCurveModel model;
  const SegmentResult grown = segment(scene.image, model, {});
  EXPECT_EQ(grown.mask, scene.dark);
  EXPECT_EQ(grown.stats.seeds, count_set(scene.seeds));
  EXPECT_EQ(grown.stats.fallback_vessel, 0u);

  ElementParams ablated;
  ablated.use_connectivity = false;
  const SegmentResult plain = segment(scene.image, model, ablated);
  EXPECT_EQ(plain.mask, scene.seeds);
}

TEST(SegmentTest, CountersAndTotality) {
  const vgtest::CurveScene scene = vgtest::make_curve_scene();
  const SegmentResult r = segment(scene.image, vgtest::TieredCurveModel(), {});
  const std::size_t wh = scene.image.size();
  EXPECT_EQ(r.stats.phase1_calls, wh);
  EXPECT_EQ(r.stats.classifier_calls, r.stats.phase1_calls + r.stats.phase2_calls);
  EXPECT_LE(r.stats.classifier_calls, 2 * wh);
  EXPECT_EQ(r.stats.unresolved, 0u);
  EXPECT_EQ(r.stats.grown + r.stats.rejected, r.stats.phase2_calls);
  EXPECT_EQ(r.stats.seeds + r.stats.grown + r.stats.rejected + r.stats.fallback_vessel +
                r.stats.fallback_background,
            wh);
  EXPECT_EQ(r.stats.seeds + r.stats.grown + r.stats.fallback_vessel, count_set(r.mask));
}

// Scores a smooth function of grey features only.
class GreyOnlyModel : public Classifier {
 public:
  std::size_t n_features() const override { return kFeatureCount; }
  double predict_proba(std::span<const double> f) const override {
    return 1.0 / (1.0 + std::exp((f[10] - 128.0) / 12.0));
  }
};

TEST(SegmentTest, ConnectivityBlindModelReducesToThresholding) {
  const GrayImage img = vgtest::random_image(40, 30, 6);
  const FeatureStack stack = extract_stack(img);
  const GreyOnlyModel model;
  const ElementParams p{.seed_threshold = 0.7, .grow_threshold = 0.7};
  const SegmentResult r = segment(stack, model, p);
  FeatureVector fv{};
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      stack.fill_grey(x, y, fv);
      ASSERT_EQ(r.mask(x, y) != 0, model.predict_proba(fv) >= 0.7);
    }
  }
}

TEST(SegmentTest, DeterministicAcrossThreadCounts) {
  const GrayImage img = vgtest::random_image(40, 40, 8);
  const SegmentResult a = segment(img, GreyOnlyModel(), {}, 1);
  const SegmentResult b = segment(img, GreyOnlyModel(), {}, 3);
  EXPECT_EQ(a.mask, b.mask);
  EXPECT_EQ(a.proba, b.proba);
}

// Seeds everywhere through predict_seed_proba, rejects everything otherwise.
class SplitModel : public Classifier {
 public:
  std::size_t n_features() const override { return kFeatureCount; }
  double predict_proba(std::span<const double>) const override { return 0.0; }
  double predict_seed_proba(std::span<const double>) const override { return 1.0; }
};

TEST(SegmentTest, PhaseOneUsesTheSeedScore) {
  const GrayImage img(6, 5, 10.0);
  EXPECT_EQ(count_set(segment(img, SplitModel(), {}).mask), img.size());
  ElementParams single;
  single.use_seed_model = false;
  EXPECT_EQ(count_set(segment(img, SplitModel(), single).mask), 0u);
}

TEST(ElementForestParamsTest, MasksConnectivityFeatures) {
  const ForestParams p = element_forest_params();
  EXPECT_EQ(p.seed_masked_features,
            (std::vector<std::uint32_t>{kImmediateConnectivityIndex, kRadialConnectivityIndex}));
  EXPECT_EQ(p.n_trees, ForestParams{}.n_trees);
}

}  // namespace
}  // namespace vesselgrow
