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
#include <random>

#include <gtest/gtest.h>

#include "json.hpp"
#include "oracles.hpp"
#include "vesselgrow/errors.hpp"
#include "vesselgrow/eval.hpp"

namespace vesselgrow {
namespace {

BinaryMask mask_from(int w, int h, std::initializer_list<int> on) {
  BinaryMask m(w, h, 0);
  for (int i : on) m[static_cast<std::size_t>(i)] = 1;
  return m;
}

TEST(ConfusionTest, PerfectAndAllBackground) {
  BinaryMask truth(10, 10, 0);
  for (int i = 0; i < 10; ++i) truth[static_cast<std::size_t>(i * 7)] = 1;
  const Confusion perfect = confusion(truth, truth);
  EXPECT_EQ(perfect, (Confusion{10, 90, 0, 0}));
  EXPECT_EQ(rates(perfect).accuracy, 1.0);

  const Confusion none = confusion(BinaryMask(10, 10, 0), truth);
  EXPECT_EQ(none, (Confusion{0, 90, 0, 10}));
  const Rates r = rates(none);
  EXPECT_DOUBLE_EQ(*r.accuracy, 0.9);
  EXPECT_EQ(*r.tpr, 0.0);
  EXPECT_EQ(*r.tnr, 1.0);
}

TEST(ConfusionTest, MatchesPixelTally) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const BinaryMask pred = vgtest::random_mask(16, 16, seed);
    const BinaryMask truth = vgtest::random_mask(16, 16, seed + 500, 0.2);
    Confusion want;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pred[i] && truth[i]) ++want.tp;
      else if (!pred[i] && !truth[i]) ++want.tn;
      else if (pred[i]) ++want.fp;
      else ++want.fn;
    }
    EXPECT_EQ(confusion(pred, truth), want);
  }
}

TEST(ConfusionTest, ShapeMismatchIsDimensionError) {
  EXPECT_THROW(confusion(BinaryMask(3, 3), BinaryMask(3, 4)), DimensionError);
}

TEST(RatesTest, TableLevelRates) {
  const Rates r = rates({739, 973, 27, 261});
  EXPECT_DOUBLE_EQ(*r.tpr, 0.739);
  EXPECT_DOUBLE_EQ(*r.tnr, 0.973);
  EXPECT_DOUBLE_EQ(*r.accuracy, (739.0 + 973.0) / 2000.0);
}

TEST(RatesTest, UndefinedRatesAreAbsent) {
  const Rates r = rates({0, 5, 1, 0});
  EXPECT_FALSE(r.tpr.has_value());
  EXPECT_TRUE(r.tnr.has_value());
  EXPECT_FALSE(rates({}).accuracy.has_value());
  EXPECT_EQ(rates({3, 4, 0, 0}), (Rates{1.0, 1.0, 1.0}));
}

std::vector<std::uint8_t> labels_of(std::initializer_list<int> v) {
  return {v.begin(), v.end()};
}

TEST(AucTest, Examples) {
  EXPECT_EQ(roc_auc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, labels_of({1, 1, 0, 0})), 1.0);
  EXPECT_EQ(roc_auc(std::vector<double>{0.5, 0.5, 0.5}, labels_of({1, 0, 1})), 0.5);
  EXPECT_EQ(roc_auc(std::vector<double>{0.9, 0.8, 0.3, 0.2}, labels_of({1, 0, 1, 0})), 0.75);
  EXPECT_EQ(roc_auc(std::vector<double>{0.1, 0.9}, labels_of({1, 0})), 0.0);
}

TEST(AucTest, Errors) {
  EXPECT_THROW(roc_auc(std::vector<double>{0.1, 0.2}, labels_of({1, 1})), SingleClassError);
  EXPECT_THROW(roc_auc(std::vector<double>{0.1}, labels_of({1, 0})), DimensionError);
  EXPECT_THROW(roc_auc(std::vector<double>{NAN, 0.2}, labels_of({1, 0})), ParamError);
}

struct Instance {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
};

Instance random_instance(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> size(2, 50);
  std::uniform_int_distribution<int> levels(1, 6);
  const int n = size(gen);
  const int k = levels(gen);  // few levels -> heavy ties
  const bool heavy_ties = gen() % 2 == 0;
  std::uniform_int_distribution<int> level(0, k);
  std::uniform_real_distribution<double> u(0, 1);
  Instance inst;
  for (int i = 0; i < n; ++i) {
    inst.scores.push_back(heavy_ties ? level(gen) / double(k) : u(gen));
    inst.labels.push_back(gen() % 3 == 0);
  }
  inst.labels[0] = 1;
  inst.labels[1] = 0;
  return inst;
}

TEST(AucTest, MatchesPairwiseConcordance) {
  std::mt19937_64 gen(2026);
  for (int i = 0; i < 200; ++i) {
    const Instance inst = random_instance(gen);
    EXPECT_NEAR(roc_auc(inst.scores, inst.labels),
                vgtest::concordance_auc(inst.scores, inst.labels), 1e-9);
  }
}

TEST(AucTest, InvariantUnderMonotoneTransformAndComplement) {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 50; ++i) {
    Instance inst = random_instance(gen);
    const double base = roc_auc(inst.scores, inst.labels);
    std::vector<double> squashed;
    for (double s : inst.scores) squashed.push_back(std::exp(3 * s) - 7);
    EXPECT_NEAR(roc_auc(squashed, inst.labels), base, 1e-12);
    std::vector<double> negated;
    std::vector<std::uint8_t> flipped;
    for (std::size_t k = 0; k < inst.scores.size(); ++k) {
      negated.push_back(-inst.scores[k]);
      flipped.push_back(!inst.labels[k]);
    }
    EXPECT_NEAR(roc_auc(negated, flipped), base, 1e-12);
    EXPECT_NEAR(roc_auc(inst.scores, flipped), 1.0 - base, 1e-12);
  }
}

TEST(RocCurveTest, EndpointsAndMonotone) {
  std::mt19937_64 gen(3);
  const Instance inst = random_instance(gen);
  const auto curve = roc_curve(inst.scores, inst.labels);
  ASSERT_GE(curve.size(), 2u);
  EXPECT_EQ(curve.front().fpr, 0.0);
  EXPECT_EQ(curve.front().tpr, 0.0);
  EXPECT_EQ(curve.back().fpr, 1.0);
  EXPECT_EQ(curve.back().tpr, 1.0);
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    EXPECT_GE(curve[i].fpr, curve[i - 1].fpr);
    EXPECT_GE(curve[i].tpr, curve[i - 1].tpr);
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2;
  }
  EXPECT_NEAR(area, roc_auc(inst.scores, inst.labels), 1e-12);
}

TEST(ScoreSegmentationTest, SingleClassTruthHasNoAuc) {
  const BinaryMask empty(4, 4, 0);
  const ImageMetrics m = score_segmentation(empty, Plane(4, 4, 0.2), empty);
  EXPECT_FALSE(m.auc.has_value());
  EXPECT_EQ(m.rates.tnr, 1.0);
  EXPECT_FALSE(m.rates.tpr.has_value());
}

TEST(LoioTest, TwoTrivialEntries) {
  std::vector<DatasetEntry> entries;
  for (const char* id : {"a", "b"}) {
    entries.push_back({id, GrayImage(16, 16, 120.0), BinaryMask(16, 16, 0)});
  }
  LoioOptions opts;
  opts.forest.n_trees = 3;
  opts.sampling.subsample = 0.5;
  std::vector<std::string> folds_seen;
  opts.on_fold = [&](const FoldOutcome& f, const ForestModel& m) {
    folds_seen.push_back(f.image_id);
    EXPECT_EQ(m.n_features(), kFeatureCount);
  };
  const LoioResult r = leave_one_image_out(entries, opts);
  EXPECT_EQ(folds_seen, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(r.folds.size(), 2u);
  EXPECT_EQ(r.report.aggregate.confusion.total(), 512u);
  EXPECT_EQ(r.report.aggregate.rates.tnr, 1.0);
  EXPECT_FALSE(r.report.aggregate.rates.tpr.has_value());
  EXPECT_FALSE(r.report.aggregate.auc.has_value());
  EXPECT_NE(r.report.summary_line().find("n/a"), std::string::npos);
  const auto j = nlohmann::json::parse(r.report.to_json());
  EXPECT_TRUE(j["aggregate"]["tpr"].is_null());
}

TEST(LoioTest, NeedsTwoImages) {
  std::vector<DatasetEntry> one{{"a", GrayImage(8, 8), BinaryMask(8, 8, 0)}};
  EXPECT_THROW(leave_one_image_out(one, {}), ParamError);
}

std::vector<DatasetEntry> small_scenes() {
  std::vector<DatasetEntry> entries;
  for (std::uint64_t k = 0; k < 3; ++k) {
    Plane img(24, 24, 200.0);
    BinaryMask truth(24, 24, 0);
    const int row = 6 + static_cast<int>(k) * 4;
    for (int x = 0; x < 24; ++x) {
      for (int dy = 0; dy < 3; ++dy) {
        img(x, row + dy) = 40.0 + x;
        truth(x, row + dy) = 1;
      }
    }
    entries.push_back({"s" + std::to_string(k), GrayImage(img), truth});
  }
  return entries;
}

TEST(LoioTest, AggregateIsConsistentWithFolds) {
  LoioOptions opts;
  opts.forest.n_trees = 5;
  opts.sampling.subsample = 0.5;
  const auto entries = small_scenes();
  const LoioResult r = leave_one_image_out(entries, opts);
  Confusion sum;
  for (const FoldOutcome& f : r.folds) {
    sum += f.metrics.confusion;
    EXPECT_EQ(r.report.per_image.at(f.image_id).confusion, f.metrics.confusion);
    EXPECT_EQ(f.segment_stats.unresolved, 0u);
  }
  EXPECT_EQ(sum, r.report.aggregate.confusion);
  EXPECT_EQ(rates(sum), r.report.aggregate.rates);
  ASSERT_TRUE(r.report.aggregate.auc.has_value());
  EXPECT_GT(*r.report.aggregate.auc, 0.9);

  std::vector<const BinaryMask*> truths;
  for (const auto& e : entries) truths.push_back(&e.truth);
  const MetricsReport again = build_report(r.folds, truths);
  EXPECT_EQ(again.aggregate.confusion, r.report.aggregate.confusion);
  EXPECT_EQ(again.aggregate.auc, r.report.aggregate.auc);
}

TEST(LoioTest, RepeatRunsAreIdentical) {
  LoioOptions opts;
  opts.forest.n_trees = 4;
  opts.sampling.subsample = 0.5;
  const auto entries = small_scenes();
  const LoioResult a = leave_one_image_out(entries, opts);
  const LoioResult b = leave_one_image_out(entries, opts);
  for (std::size_t k = 0; k < a.folds.size(); ++k) {
    EXPECT_EQ(a.folds[k].mask, b.folds[k].mask);
    EXPECT_EQ(a.folds[k].proba, b.folds[k].proba);
    EXPECT_EQ(a.folds[k].model_digest, b.folds[k].model_digest);
  }
  EXPECT_EQ(a.report.to_json(), b.report.to_json());
}

}  // namespace
}  // namespace vesselgrow
