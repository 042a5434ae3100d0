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

#include "vesselgrow/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "vesselgrow/rng.hpp"

namespace vesselgrow {

Confusion confusion(const BinaryMask& pred, const BinaryMask& truth) {
  if (!pred.same_shape(truth)) {
    throw DimensionError("prediction and truth masks differ in size");
  }
  Confusion c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0;
    const bool t = truth[i] != 0;
    if (p && t) {
      ++c.tp;
    } else if (!p && !t) {
      ++c.tn;
    } else if (p) {
      ++c.fp;
    } else {
      ++c.fn;
    }
  }
  return c;
}

Rates rates(const Confusion& c) noexcept {
  auto ratio = [](std::uint64_t num, std::uint64_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  return {ratio(c.tp + c.tn, c.total()), ratio(c.tp, c.tp + c.fn), ratio(c.tn, c.tn + c.fp)};
}

namespace {

// Indices sorted by descending score, plus class totals.
struct RankedScores {
  std::vector<std::size_t> order;
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
};

RankedScores rank_scores(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw DimensionError("scores and labels differ in length");
  }
  RankedScores r;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw ParamError("ROC scores must not be NaN");
    (labels[i] ? r.positives : r.negatives) += 1;
  }
  if (r.positives == 0 || r.negatives == 0) {
    throw SingleClassError("ROC analysis needs both classes present");
  }
  r.order.resize(scores.size());
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::sort(r.order.begin(), r.order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return r;
}

// Calls visit(tp, fp, score) after each block of tied scores.
template <typename Visit>
void sweep_blocks(const RankedScores& r, std::span<const double> scores,
                  std::span<const std::uint8_t> labels, Visit visit) {
  std::uint64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < r.order.size()) {
    const double s = scores[r.order[i]];
    while (i < r.order.size() && scores[r.order[i]] == s) {
      (labels[r.order[i]] ? tp : fp) += 1;
      ++i;
    }
    visit(tp, fp, s);
  }
}

std::string percent(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", *v * 100.0);
  return buf;
}

std::string fixed4(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json metrics_json(const ImageMetrics& m) {
  nlohmann::ordered_json j;
  j["accuracy"] = optional_json(m.rates.accuracy);
  j["tpr"] = optional_json(m.rates.tpr);
  j["tnr"] = optional_json(m.rates.tnr);
  j["auc"] = optional_json(m.auc);
  j["confusion"] = {{"tp", m.confusion.tp},
                    {"tn", m.confusion.tn},
                    {"fp", m.confusion.fp},
                    {"fn", m.confusion.fn}};
  return j;
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const RankedScores r = rank_scores(scores, labels);
  // Twice the area in count units; every term is an exact integer.
  double twice_area = 0.0;
  std::uint64_t prev_tp = 0, prev_fp = 0;
  sweep_blocks(r, scores, labels, [&](std::uint64_t tp, std::uint64_t fp, double) {
    twice_area += static_cast<double>(fp - prev_fp) * static_cast<double>(tp + prev_tp);
    prev_tp = tp;
    prev_fp = fp;
  });
  return twice_area / (2.0 * static_cast<double>(r.positives) * static_cast<double>(r.negatives));
}

std::vector<RocPoint> roc_curve(std::span<const double> scores,
                                std::span<const std::uint8_t> labels) {
  const RankedScores r = rank_scores(scores, labels);
  std::vector<RocPoint> curve{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
  const auto P = static_cast<double>(r.positives);
  const auto N = static_cast<double>(r.negatives);
  sweep_blocks(r, scores, labels, [&](std::uint64_t tp, std::uint64_t fp, double s) {
    curve.push_back({static_cast<double>(fp) / N, static_cast<double>(tp) / P, s});
  });
  return curve;
}

ImageMetrics score_segmentation(const BinaryMask& pred, const Plane& proba,
                                const BinaryMask& truth) {
  if (!proba.same_shape(truth)) {
    throw DimensionError("probability plane and truth differ in size");
  }
  ImageMetrics m;
  m.confusion = confusion(pred, truth);
  m.rates = rates(m.confusion);
  const std::size_t positives = count_set(truth);
  if (positives > 0 && positives < truth.size()) {
    m.auc = roc_auc(proba.data(), truth.data());
  }
  return m;
}

MetricsReport build_report(const std::vector<FoldOutcome>& folds,
                           const std::vector<const BinaryMask*>& truths) {
  if (folds.size() != truths.size()) {
    throw DimensionError("fold and truth counts differ");
  }
  MetricsReport report;
  std::vector<double> pooled_scores;
  std::vector<std::uint8_t> pooled_labels;
  double sums[4] = {0, 0, 0, 0};
  int counts[4] = {0, 0, 0, 0};
  auto add = [&](int k, const std::optional<double>& v) {
    if (v) {
      sums[k] += *v;
      ++counts[k];
    }
  };
  for (std::size_t i = 0; i < folds.size(); ++i) {
    const FoldOutcome& f = folds[i];
    report.per_image[f.image_id] = f.metrics;
    report.aggregate.confusion += f.metrics.confusion;
    add(0, f.metrics.rates.accuracy);
    add(1, f.metrics.rates.tpr);
    add(2, f.metrics.rates.tnr);
    add(3, f.metrics.auc);
    pooled_scores.insert(pooled_scores.end(), f.proba.data().begin(), f.proba.data().end());
    for (std::uint8_t v : truths[i]->data()) pooled_labels.push_back(v ? 1 : 0);
  }
  report.aggregate.rates = rates(report.aggregate.confusion);
  const auto pos = std::count(pooled_labels.begin(), pooled_labels.end(), std::uint8_t{1});
  if (pos > 0 && static_cast<std::size_t>(pos) < pooled_labels.size()) {
    report.aggregate.auc = roc_auc(pooled_scores, pooled_labels);
  }
  auto mean = [&](int k) -> std::optional<double> {
    if (counts[k] == 0) return std::nullopt;
    return sums[k] / counts[k];
  };
  report.mean_of_images = {mean(0), mean(1), mean(2)};
  report.mean_auc = mean(3);
  return report;
}

std::string MetricsReport::summary_line() const {
  return "TP " + percent(aggregate.rates.tpr) + "  TN " + percent(aggregate.rates.tnr) +
         "  Acc " + percent(aggregate.rates.accuracy) + "  AUC " + fixed4(aggregate.auc);
}

std::string MetricsReport::to_table() const {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %10s %10s %10s %8s %10s\n", "image", "TP(%)",
                "TN(%)", "Acc(%)", "AUC", "pixels");
  out << line;
  auto row = [&](const std::string& name, const Rates& r, const std::optional<double>& auc,
                 std::optional<std::uint64_t> pixels) {
    std::snprintf(line, sizeof line, "%-20s %10s %10s %10s %8s %10s\n", name.c_str(),
                  percent(r.tpr).c_str(), percent(r.tnr).c_str(),
                  percent(r.accuracy).c_str(), fixed4(auc).c_str(),
                  pixels ? std::to_string(*pixels).c_str() : "");
    out << line;
  };
  for (const auto& [id, m] : per_image) row(id, m.rates, m.auc, m.confusion.total());
  row("pooled", aggregate.rates, aggregate.auc, aggregate.confusion.total());
  row("mean-of-images", mean_of_images, mean_auc, std::nullopt);
  for (const auto& [key, value] : notes) out << key << ": " << value << "\n";
  return out.str();
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["aggregate"] = metrics_json(aggregate);
  j["mean_of_images"] = {{"accuracy", optional_json(mean_of_images.accuracy)},
                         {"tpr", optional_json(mean_of_images.tpr)},
                         {"tnr", optional_json(mean_of_images.tnr)},
                         {"auc", optional_json(mean_auc)}};
  nlohmann::ordered_json images = nlohmann::ordered_json::object();
  for (const auto& [id, m] : per_image) images[id] = metrics_json(m);
  j["per_image"] = std::move(images);
  if (!notes.empty()) j["notes"] = notes;
  return j.dump(2) + "\n";
}

LoioResult leave_one_image_out(const std::vector<DatasetEntry>& entries,
                               const LoioOptions& opts) {
  if (entries.size() < 2) {
    throw ParamError("leave-one-image-out needs at least two images");
  }
  opts.element.validate();
  SampleOptions sampling = opts.sampling;
  sampling.connectivity = opts.element.use_connectivity;
  sampling.radial_radius = opts.element.radial_radius;
  sampling.validate();
  auto log = [&](const std::string& msg) {
    if (opts.log) opts.log(msg);
  };

  std::vector<LabeledDataset> rows(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const DatasetEntry& e = entries[i];
    log("extracting features for '" + e.image_id + "'");
    rows[i] = build_training_rows(e, extract_stack(e.image, e.image_id, opts.threads), sampling);
  }

  LoioResult result;
  std::vector<const BinaryMask*> truths;
  for (std::size_t held = 0; held < entries.size(); ++held) {
    const DatasetEntry& test = entries[held];
    TrainingData data;
    data.n_features = kFeatureCount;
    data.feature_names = feature_name_list();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (i == held) continue;
      for (const LabeledRow& r : rows[i].rows) {
        data.values.insert(data.values.end(), r.features.begin(), r.features.end());
        data.labels.push_back(r.label ? 1 : 0);
      }
    }
    log("fold '" + test.image_id + "': training on " + std::to_string(data.n_rows()) + " rows");
    FoldOutcome fold;
    fold.image_id = test.image_id;
    const ForestModel model = train(data, opts.forest, &fold.train_report, opts.threads);
    const std::vector<std::uint8_t> bytes = serialize_model(model);
    fold.model_digest = fnv1a(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                               bytes.size()));

    log("fold '" + test.image_id + "': segmenting");
    SegmentResult seg = segment(extract_stack(test.image, test.image_id, opts.threads), model,
                                opts.element, opts.threads);
    fold.metrics = score_segmentation(seg.mask, seg.proba, test.truth);
    fold.mask = std::move(seg.mask);
    fold.proba = std::move(seg.proba);
    fold.segment_stats = seg.stats;
    if (opts.on_fold) opts.on_fold(fold, model);
    result.folds.push_back(std::move(fold));
    truths.push_back(&test.truth);
  }
  result.report = build_report(result.folds, truths);

  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  for (std::size_t i = 0; i < result.folds.size(); ++i) {
    scores.insert(scores.end(), result.folds[i].proba.data().begin(),
                  result.folds[i].proba.data().end());
    for (std::uint8_t v : truths[i]->data()) labels.push_back(v ? 1 : 0);
  }
  if (result.report.aggregate.auc) result.pooled_roc = roc_curve(scores, labels);
  return result;
}

}  // namespace vesselgrow
