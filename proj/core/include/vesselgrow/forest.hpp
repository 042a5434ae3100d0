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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vesselgrow/featureset.hpp"

namespace vesselgrow {

// Anything that maps a feature vector to a vessel probability.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::size_t n_features() const = 0;
  virtual double predict_proba(std::span<const double> features) const = 0;

  // Probability used to pick region-growing seeds, before any neighbourhood
  // state exists. Defaults to predict_proba.
  virtual double predict_seed_proba(std::span<const double> features) const {
    return predict_proba(features);
  }
};

struct ForestParams {
  int n_trees = 100;
  int mtry = 5;        // floor(sqrt(30))
  int max_depth = 0;   // 0 = unlimited; otherwise max edges root to leaf
  int min_leaf = 1;
  std::uint64_t seed = 1;
  // When non-empty, a second "seed" forest is grown on the same bootstrap
  // draws with these features held constant. See ForestModel::seed_trees().
  std::vector<std::uint32_t> seed_masked_features;

  // Throws ParamError. mtry must lie in [1, n_features].
  void validate(std::size_t n_features) const;
  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

// One node of a preorder-laid-out tree. The left child of an internal node
// immediately follows it; `right` holds the right child's index.
struct TreeNode {
  std::int32_t feature = -1;  // -1 for leaves
  std::uint32_t right = 0;    // internal: right child; leaf: sample count
  double value = 0.0;         // internal: threshold (x <= t goes left); leaf: vessel fraction

  bool is_leaf() const noexcept { return feature < 0; }
  double threshold() const noexcept { return value; }
  double vessel_fraction() const noexcept { return value; }
  std::uint32_t sample_count() const noexcept { return right; }

  static TreeNode leaf(double fraction, std::uint32_t count) noexcept {
    return {-1, count, fraction};
  }
  static TreeNode split(std::int32_t feature, double threshold) noexcept {
    return {feature, 0, threshold};
  }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  // Throws CorruptModelError if the nodes do not form a valid preorder tree.
  explicit DecisionTree(std::vector<TreeNode> nodes);

  double predict(std::span<const double> features) const noexcept {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
      const TreeNode& n = nodes_[i];
      i = features[static_cast<std::size_t>(n.feature)] <= n.value ? i + 1 : n.right;
    }
    return nodes_[i].value;
  }

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const;
  std::size_t leaf_count() const noexcept;
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
};

class ForestModel final : public Classifier {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  ForestModel() = default;
  ForestModel(std::vector<DecisionTree> trees, ForestParams params,
              std::vector<std::string> feature_names, std::size_t n_features,
              std::vector<DecisionTree> seed_trees = {});

  std::size_t n_features() const override { return n_features_; }
  // Mean leaf vessel fraction over all trees. Throws DimensionError when the
  // input length differs from n_features().
  double predict_proba(std::span<const double> features) const override;
  // Mean over seed_trees(), or predict_proba when there are none.
  double predict_seed_proba(std::span<const double> features) const override;

  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
  // Trees that never split on params().seed_masked_features. Empty when no
  // mask was requested or the masked features were constant in training.
  const std::vector<DecisionTree>& seed_trees() const noexcept { return seed_trees_; }
  const ForestParams& params() const noexcept { return params_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  std::uint32_t format_version() const noexcept { return kFormatVersion; }

  friend bool operator==(const ForestModel& a, const ForestModel& b) {
    return a.trees_ == b.trees_ && a.seed_trees_ == b.seed_trees_ && a.params_ == b.params_ &&
           a.feature_names_ == b.feature_names_ && a.n_features_ == b.n_features_;
  }

 private:
  std::vector<DecisionTree> trees_;
  std::vector<DecisionTree> seed_trees_;
  ForestParams params_;
  std::vector<std::string> feature_names_;
  std::size_t n_features_ = 0;
};

// Dense row-major training table; the general entry point for training.
struct TrainingData {
  std::size_t n_features = 0;
  std::vector<double> values;  // n_rows * n_features
  std::vector<std::uint8_t> labels;
  std::vector<std::string> feature_names;

  std::size_t n_rows() const noexcept { return labels.size(); }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values.data() + i * n_features, n_features};
  }
  static TrainingData from(const LabeledDataset& ds);
};

struct TrainReport {
  std::optional<double> oob_error;  // absent when no row was ever out of bag
  std::optional<double> seed_oob_error;  // same, for the seed forest
  std::size_t oob_rows = 0;
  std::size_t positives = 0;
  std::size_t rows = 0;
  bool single_class = false;
  bool degenerate = false;  // identical feature rows with mixed labels
  std::vector<std::string> warnings;
};

// Bagged CART ensemble with Gini splits at midpoints between consecutive
// distinct values. Deterministic in (row order, params); `threads` only
// changes speed (0 = thread_count()).
// Throws EmptyDatasetError for an empty table, ParamError for bad params.
ForestModel train(const TrainingData& data, const ForestParams& params,
                  TrainReport* report = nullptr, int threads = 0);
ForestModel train(const LabeledDataset& ds, const ForestParams& params,
                  TrainReport* report = nullptr, int threads = 0);

// Binary model format, little-endian:
//   "VGFOREST" | u32 version | u32 n_features
//   | u32 n_trees u32 mtry u32 max_depth u32 min_leaf u64 seed
//   | u32 name_count { u32 len, bytes }*
//   | u32 tree_count { u32 node_count, preorder nodes }*
//   | u32 mask_count { u32 feature }* | u32 seed_tree_count { tree }*
// node: u8 0 (leaf) f64 fraction u32 sample_count | u8 1 (split) u32 feature f64 threshold
std::vector<std::uint8_t> serialize_model(const ForestModel& model);
// Throws VersionError, CorruptModelError.
ForestModel deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const ForestModel& model, const std::filesystem::path& path);
// Throws IoError, VersionError, CorruptModelError.
ForestModel load_model(const std::filesystem::path& path);

}  // namespace vesselgrow
