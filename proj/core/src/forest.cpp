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

#include "vesselgrow/forest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <system_error>

#include "vesselgrow/parallel.hpp"
#include "vesselgrow/rng.hpp"

namespace vesselgrow {

void ForestParams::validate(std::size_t n_features) const {
  if (n_trees < 1) throw ParamError("n_trees must be >= 1");
  if (mtry < 1 || static_cast<std::size_t>(mtry) > n_features) {
    throw ParamError("mtry must lie in [1, " + std::to_string(n_features) + "], got " +
                     std::to_string(mtry));
  }
  if (max_depth < 0) throw ParamError("max_depth must be >= 0 (0 = unlimited)");
  if (min_leaf < 1) throw ParamError("min_leaf must be >= 1");
  for (std::uint32_t f : seed_masked_features) {
    if (f >= n_features) {
      throw ParamError("seed-masked feature " + std::to_string(f) + " >= n_features " +
                       std::to_string(n_features));
    }
  }
}

// ------------------------------------------------------------ DecisionTree

DecisionTree::DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw CorruptModelError("tree has no nodes");
  // Walk the preorder layout and confirm every subtree closes where the
  // parent's right link says the next one starts.
  std::vector<std::size_t> pending{0};
  std::size_t expected = 0;
  while (!pending.empty()) {
    const std::size_t i = pending.back();
    pending.pop_back();
    if (i != expected || i >= nodes_.size()) {
      throw CorruptModelError("tree nodes are not in preorder");
    }
    ++expected;
    const TreeNode& n = nodes_[i];
    if (n.is_leaf()) {
      if (!(n.value >= 0.0 && n.value <= 1.0)) {
        throw CorruptModelError("leaf vessel fraction outside [0, 1]");
      }
      continue;
    }
    if (n.right <= i + 1 || n.right >= nodes_.size()) {
      throw CorruptModelError("split node has an invalid right child");
    }
    pending.push_back(n.right);
    pending.push_back(i + 1);
  }
  if (expected != nodes_.size()) throw CorruptModelError("tree has unreachable nodes");
}

std::size_t DecisionTree::depth() const {
  std::size_t deepest = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    const TreeNode& n = nodes_[i];
    if (n.is_leaf()) {
      deepest = std::max(deepest, d);
    } else {
      stack.emplace_back(i + 1, d + 1);
      stack.emplace_back(n.right, d + 1);
    }
  }
  return deepest;
}

std::size_t DecisionTree::leaf_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

// ------------------------------------------------------------- ForestModel

ForestModel::ForestModel(std::vector<DecisionTree> trees, ForestParams params,
                         std::vector<std::string> feature_names, std::size_t n_features,
                         std::vector<DecisionTree> seed_trees)
    : trees_(std::move(trees)),
      seed_trees_(std::move(seed_trees)),
      params_(std::move(params)),
      feature_names_(std::move(feature_names)),
      n_features_(n_features) {
  if (trees_.empty()) throw CorruptModelError("forest has no trees");
  for (const auto* set : {&trees_, &seed_trees_}) {
    for (const DecisionTree& t : *set) {
      for (const TreeNode& n : t.nodes()) {
        if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= n_features_) {
          throw CorruptModelError("split feature index " + std::to_string(n.feature) +
                                  " >= n_features " + std::to_string(n_features_));
        }
      }
    }
  }
}

namespace {

double mean_vote(const std::vector<DecisionTree>& trees, std::span<const double> features) {
  double sum = 0.0;
  for (const DecisionTree& t : trees) sum += t.predict(features);
  return std::clamp(sum / static_cast<double>(trees.size()), 0.0, 1.0);
}

}  // namespace

double ForestModel::predict_proba(std::span<const double> features) const {
  if (features.size() != n_features_) {
    throw DimensionError("feature vector has " + std::to_string(features.size()) +
                         " values, model expects " + std::to_string(n_features_));
  }
  return mean_vote(trees_, features);
}

double ForestModel::predict_seed_proba(std::span<const double> features) const {
  if (seed_trees_.empty()) return predict_proba(features);
  if (features.size() != n_features_) {
    throw DimensionError("feature vector has " + std::to_string(features.size()) +
                         " values, model expects " + std::to_string(n_features_));
  }
  return mean_vote(seed_trees_, features);
}

// --------------------------------------------------------------- training

TrainingData TrainingData::from(const LabeledDataset& ds) {
  if (ds.feature_names.size() != kFeatureCount) {
    throw SchemaError("dataset must have 30 feature columns");
  }
  TrainingData data;
  data.n_features = kFeatureCount;
  data.feature_names = ds.feature_names;
  data.values.reserve(ds.size() * kFeatureCount);
  data.labels.reserve(ds.size());
  for (const LabeledRow& row : ds.rows) {
    data.values.insert(data.values.end(), row.features.begin(), row.features.end());
    data.labels.push_back(row.label ? 1 : 0);
  }
  return data;
}

namespace {

// Column-major dense ranks: rank(f, row) indexes the sorted distinct values of
// feature f. Splits are searched in rank space and mapped back to midpoints.
class RankedColumns {
 public:
  explicit RankedColumns(const TrainingData& data, int threads)
      : n_rows_(data.n_rows()), ranks_(data.n_features * data.n_rows()),
        distinct_(data.n_features) {
    parallel_for(data.n_features, [&](std::size_t f) {
      std::vector<std::uint32_t> order(n_rows_);
      std::iota(order.begin(), order.end(), 0u);
      auto value = [&](std::uint32_t r) { return data.values[r * data.n_features + f]; };
      std::stable_sort(order.begin(), order.end(),
                       [&](std::uint32_t l, std::uint32_t r) { return value(l) < value(r); });
      std::vector<double>& uniq = distinct_[f];
      std::uint32_t* col = ranks_.data() + f * n_rows_;
      for (std::uint32_t r : order) {
        const double v = value(r);
        if (uniq.empty() || uniq.back() < v) uniq.push_back(v);
        col[r] = static_cast<std::uint32_t>(uniq.size() - 1);
      }
    }, threads);
  }

  const std::uint32_t* column(std::size_t f) const noexcept {
    return ranks_.data() + f * n_rows_;
  }
  const std::vector<double>& distinct(std::size_t f) const noexcept { return distinct_[f]; }
  std::size_t max_distinct() const noexcept {
    std::size_t m = 0;
    for (const auto& d : distinct_) m = std::max(m, d.size());
    return m;
  }

 private:
  std::size_t n_rows_;
  std::vector<std::uint32_t> ranks_;
  std::vector<std::vector<double>> distinct_;
};

// Midpoint strictly between two adjacent distinct values, falling back to the
// lower value when they are neighbouring doubles.
double split_threshold(double lo, double hi) noexcept {
  const double mid = lo + (hi - lo) / 2.0;
  return (mid >= hi || mid < lo) ? lo : mid;
}

struct Split {
  std::size_t feature = 0;
  std::uint32_t rank = 0;  // ranks <= rank go left
  double score = 0.0;
  bool found = false;
};

class TreeBuilder {
 public:
  TreeBuilder(const TrainingData& data, const RankedColumns& cols,
              const ForestParams& params, std::uint64_t stream,
              const std::vector<std::uint8_t>* masked = nullptr)
      : data_(data), cols_(cols), params_(params),
        rng_(derive_seed(params.seed, stream)),
        features_(data.n_features), masked_(masked) {
    std::iota(features_.begin(), features_.end(), std::size_t{0});
    const std::size_t d = cols.max_distinct();
    counts_.resize(d);
    positives_.resize(d);
  }

  // Fills `in_bag` with how often each row was drawn.
  DecisionTree build(std::vector<std::uint32_t>& in_bag) {
    const std::size_t n = data_.n_rows();
    samples_.resize(n);
    in_bag.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<std::uint32_t>(rng_.below(n));
      samples_[i] = r;
      ++in_bag[r];
    }

    struct Task {
      std::size_t begin, end, depth, parent;
      bool is_right;
    };
    std::vector<TreeNode> nodes;
    std::vector<Task> stack{{0, n, 0, 0, false}};
    while (!stack.empty()) {
      const Task task = stack.back();
      stack.pop_back();
      const std::size_t index = nodes.size();
      if (task.is_right) nodes[task.parent].right = static_cast<std::uint32_t>(index);

      const std::size_t count = task.end - task.begin;
      std::size_t pos = 0;
      for (std::size_t i = task.begin; i < task.end; ++i) pos += data_.labels[samples_[i]];

      Split split;
      const bool depth_ok = params_.max_depth == 0 ||
                            task.depth < static_cast<std::size_t>(params_.max_depth);
      if (pos != 0 && pos != count && depth_ok &&
          count >= 2 * static_cast<std::size_t>(params_.min_leaf)) {
        split = best_split(task.begin, task.end, pos);
      }
      if (!split.found) {
        nodes.push_back(TreeNode::leaf(static_cast<double>(pos) / static_cast<double>(count),
                                       static_cast<std::uint32_t>(count)));
        continue;
      }

      const std::vector<double>& uniq = cols_.distinct(split.feature);
      const std::uint32_t* col = cols_.column(split.feature);
      const auto mid = std::partition(samples_.begin() + task.begin, samples_.begin() + task.end,
                                      [&](std::uint32_t r) { return col[r] <= split.rank; });
      const auto split_at = static_cast<std::size_t>(mid - samples_.begin());
      // Smallest rank present on the right side bounds the threshold.
      std::uint32_t next_rank = std::numeric_limits<std::uint32_t>::max();
      for (std::size_t i = split_at; i < task.end; ++i) next_rank = std::min(next_rank, col[samples_[i]]);
      nodes.push_back(TreeNode::split(static_cast<std::int32_t>(split.feature),
                                      split_threshold(uniq[split.rank], uniq[next_rank])));
      stack.push_back({split_at, task.end, task.depth + 1, index, true});
      stack.push_back({task.begin, split_at, task.depth + 1, index, false});
    }
    return DecisionTree(std::move(nodes));
  }

 private:
  // Weighted Gini in sample-count units: sum over children of p * (n - p) / n.
  static double gini_mass(double pos, double n) noexcept { return pos * (n - pos) / n; }

  Split best_split(std::size_t begin, std::size_t end, std::size_t pos) {
    const std::size_t n = end - begin;
    const double parent = gini_mass(static_cast<double>(pos), static_cast<double>(n));
    const double min_gain = 1e-12 * static_cast<double>(n);
    const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);

    // Partial Fisher-Yates: the first mtry slots become this node's candidates.
    const std::size_t f_total = features_.size();
    for (std::size_t k = 0; k < static_cast<std::size_t>(params_.mtry); ++k) {
      const std::size_t j = k + rng_.below(f_total - k);
      std::swap(features_[k], features_[j]);
    }

    Split best;
    best.score = parent - min_gain;
    for (std::size_t k = 0; k < static_cast<std::size_t>(params_.mtry); ++k) {
      const std::size_t f = features_[k];
      const std::uint32_t* col = cols_.column(f);
      const std::size_t n_distinct = cols_.distinct(f).size();
      // Masked features behave as constant columns: drawn, never split on.
      if (n_distinct < 2 || (masked_ && (*masked_)[f])) continue;

      auto consider = [&](std::size_t left_n, std::size_t left_pos, std::uint32_t rank) {
        const std::size_t right_n = n - left_n;
        if (left_n < min_leaf || right_n < min_leaf) return;
        const double score =
            gini_mass(static_cast<double>(left_pos), static_cast<double>(left_n)) +
            gini_mass(static_cast<double>(pos - left_pos), static_cast<double>(right_n));
        if (score < best.score) {
          best.score = score;
          best.feature = f;
          best.rank = rank;
          best.found = true;
        }
      };

      if (n_distinct <= 2 * n) {
        // Histogram over ranks: O(n + distinct).
        std::fill_n(counts_.begin(), n_distinct, 0u);
        std::fill_n(positives_.begin(), n_distinct, 0u);
        for (std::size_t i = begin; i < end; ++i) {
          const std::uint32_t r = col[samples_[i]];
          ++counts_[r];
          positives_[r] += data_.labels[samples_[i]];
        }
        std::size_t left_n = 0, left_pos = 0;
        for (std::size_t r = 0; r < n_distinct; ++r) {
          if (counts_[r] == 0) continue;
          left_n += counts_[r];
          left_pos += positives_[r];
          if (left_n == n) break;
          consider(left_n, left_pos, static_cast<std::uint32_t>(r));
        }
      } else {
        // Sparse node: sort packed (rank, label) keys.
        keys_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          const std::uint32_t row = samples_[begin + i];
          keys_[i] = (static_cast<std::uint64_t>(col[row]) << 1) | data_.labels[row];
        }
        std::sort(keys_.begin(), keys_.end());
        std::size_t left_pos = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
          left_pos += keys_[i] & 1u;
          const auto rank = static_cast<std::uint32_t>(keys_[i] >> 1);
          if ((keys_[i + 1] >> 1) != rank) consider(i + 1, left_pos, rank);
        }
      }
    }
    return best;
  }

  const TrainingData& data_;
  const RankedColumns& cols_;
  const ForestParams& params_;
  Rng rng_;
  std::vector<std::size_t> features_;
  std::vector<std::uint32_t> samples_;
  std::vector<std::uint32_t> counts_;
  std::vector<std::uint32_t> positives_;
  std::vector<std::uint64_t> keys_;
  const std::vector<std::uint8_t>* masked_;
};

struct GrownForest {
  std::vector<DecisionTree> trees;
  std::optional<double> oob_error;
  std::size_t oob_rows = 0;
};

GrownForest grow_forest(const TrainingData& data, const RankedColumns& cols,
                        const ForestParams& params, const std::vector<std::uint8_t>* masked,
                        int threads) {
  const auto n_trees = static_cast<std::size_t>(params.n_trees);
  GrownForest out;
  out.trees.resize(n_trees);
  std::vector<std::vector<std::uint32_t>> in_bag(n_trees);
  parallel_for(n_trees, [&](std::size_t t) {
    TreeBuilder builder(data, cols, params, t, masked);
    out.trees[t] = builder.build(in_bag[t]);
  }, threads);

  // Out-of-bag estimate, accumulated per row in tree order.
  const std::size_t n = data.n_rows();
  std::vector<std::uint8_t> oob_wrong(n, 0), oob_seen(n, 0);
  parallel_for((n + 4095) / 4096, [&](std::size_t block) {
    const std::size_t lo = block * 4096;
    const std::size_t hi = std::min(n, lo + 4096);
    for (std::size_t r = lo; r < hi; ++r) {
      double sum = 0.0;
      std::size_t votes = 0;
      for (std::size_t t = 0; t < n_trees; ++t) {
        if (in_bag[t][r] != 0) continue;
        sum += out.trees[t].predict(data.row(r));
        ++votes;
      }
      if (votes == 0) continue;
      oob_seen[r] = 1;
      const bool predicted = sum / static_cast<double>(votes) >= 0.5;
      oob_wrong[r] = predicted != (data.labels[r] != 0);
    }
  }, threads);
  out.oob_rows = static_cast<std::size_t>(std::count(oob_seen.begin(), oob_seen.end(), 1));
  if (out.oob_rows > 0) {
    out.oob_error = static_cast<double>(std::count(oob_wrong.begin(), oob_wrong.end(), 1)) /
                    static_cast<double>(out.oob_rows);
  }
  return out;
}

}  // namespace

ForestModel train(const TrainingData& data, const ForestParams& params,
                  TrainReport* report, int threads) {
  if (data.n_rows() == 0) throw EmptyDatasetError("training data has no rows");
  if (data.values.size() != data.n_rows() * data.n_features) {
    throw DimensionError("training table size does not match rows x features");
  }
  if (data.n_rows() > std::numeric_limits<std::uint32_t>::max()) {
    throw ParamError("training table too large");
  }
  params.validate(data.n_features);

  TrainReport local;
  TrainReport& rep = report ? *report : local;
  rep = TrainReport{};
  rep.rows = data.n_rows();
  rep.positives = static_cast<std::size_t>(
      std::count(data.labels.begin(), data.labels.end(), std::uint8_t{1}));
  rep.single_class = rep.positives == 0 || rep.positives == rep.rows;
  if (rep.single_class) rep.warnings.push_back("training data contains a single class");

  const RankedColumns cols(data, threads);
  bool all_constant = true;
  for (std::size_t f = 0; f < data.n_features; ++f) {
    all_constant = all_constant && cols.distinct(f).size() < 2;
  }
  if (all_constant && !rep.single_class) {
    rep.degenerate = true;
    rep.warnings.push_back(
        "all rows share identical features with mixed labels; trees are single leaves");
  }

  GrownForest primary = grow_forest(data, cols, params, nullptr, threads);
  rep.oob_error = primary.oob_error;
  rep.oob_rows = primary.oob_rows;

  // The seed forest only differs from the main one if some masked feature
  // actually varies; otherwise it is omitted.
  std::vector<std::uint8_t> masked(data.n_features, 0);
  bool mask_matters = false;
  for (std::uint32_t f : params.seed_masked_features) {
    masked[f] = 1;
    mask_matters = mask_matters || cols.distinct(f).size() >= 2;
  }
  GrownForest seed;
  if (mask_matters) {
    seed = grow_forest(data, cols, params, &masked, threads);
    rep.seed_oob_error = seed.oob_error;
  }

  std::vector<std::string> names = data.feature_names;
  if (names.size() != data.n_features) {
    names.clear();
    for (std::size_t f = 0; f < data.n_features; ++f) names.push_back("f" + std::to_string(f));
  }
  return ForestModel(std::move(primary.trees), params, std::move(names), data.n_features,
                     std::move(seed.trees));
}

ForestModel train(const LabeledDataset& ds, const ForestParams& params,
                  TrainReport* report, int threads) {
  if (ds.empty()) throw EmptyDatasetError("training dataset has no rows");
  return train(TrainingData::from(ds), params, report, threads);
}

// ----------------------------------------------------------- serialization

namespace {

constexpr char kMagic[8] = {'V', 'G', 'F', 'O', 'R', 'E', 'S', 'T'};

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return need(1)[0]; }
  std::uint32_t u32() {
    const std::uint8_t* p = need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const std::uint8_t* p = need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(std::size_t n) {
    const std::uint8_t* p = need(n);
    return {reinterpret_cast<const char*>(p), n};
  }
  std::size_t remaining() const noexcept { return in_.size() - pos_; }

 private:
  const std::uint8_t* need(std::size_t n) {
    if (n > remaining()) throw CorruptModelError("model data is truncated");
    const std::uint8_t* p = in_.data() + pos_;
    pos_ += n;
    return p;
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_trees(ByteWriter& w, const std::vector<DecisionTree>& trees) {
  w.u32(static_cast<std::uint32_t>(trees.size()));
  for (const DecisionTree& tree : trees) {
    w.u32(static_cast<std::uint32_t>(tree.nodes().size()));
    for (const TreeNode& n : tree.nodes()) {
      if (n.is_leaf()) {
        w.u8(0);
        w.f64(n.vessel_fraction());
        w.u32(n.sample_count());
      } else {
        w.u8(1);
        w.u32(static_cast<std::uint32_t>(n.feature));
        w.f64(n.threshold());
      }
    }
  }
}

std::vector<DecisionTree> read_trees(ByteReader& r, std::uint32_t n_features) {
  const std::uint32_t tree_count = r.u32();
  if (tree_count > r.remaining() / 4) throw CorruptModelError("model data is truncated");
  std::vector<DecisionTree> trees;
  trees.reserve(tree_count);
  for (std::uint32_t t = 0; t < tree_count; ++t) {
    const std::uint32_t node_count = r.u32();
    if (node_count == 0 || node_count > r.remaining() / 13) {
      throw CorruptModelError("model data is truncated");
    }
    std::vector<TreeNode> nodes(node_count);
    // Rebuild right-child links from the preorder stream.
    std::vector<std::size_t> open_splits;
    for (std::uint32_t i = 0; i < node_count; ++i) {
      const std::uint8_t tag = r.u8();
      if (tag == 0) {
        const double fraction = r.f64();
        nodes[i] = TreeNode::leaf(fraction, r.u32());
      } else if (tag == 1) {
        const std::uint32_t feature = r.u32();
        if (feature >= n_features) throw CorruptModelError("split feature index out of range");
        nodes[i] = TreeNode::split(static_cast<std::int32_t>(feature), r.f64());
      } else {
        throw CorruptModelError("unknown node tag " + std::to_string(tag));
      }
      if (i > 0 && nodes[i - 1].is_leaf()) {
        // Previous node closed a left subtree: this node is a pending right child.
        if (open_splits.empty()) throw CorruptModelError("tree has dangling nodes");
        nodes[open_splits.back()].right = i;
        open_splits.pop_back();
      }
      if (!nodes[i].is_leaf()) open_splits.push_back(i);
    }
    if (!open_splits.empty() || !nodes.back().is_leaf()) {
      throw CorruptModelError("tree ends before all subtrees are closed");
    }
    trees.emplace_back(std::move(nodes));
  }
  return trees;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const ForestModel& model) {
  ByteWriter w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(ForestModel::kFormatVersion);
  w.u32(static_cast<std::uint32_t>(model.n_features()));
  const ForestParams& p = model.params();
  w.u32(static_cast<std::uint32_t>(p.n_trees));
  w.u32(static_cast<std::uint32_t>(p.mtry));
  w.u32(static_cast<std::uint32_t>(p.max_depth));
  w.u32(static_cast<std::uint32_t>(p.min_leaf));
  w.u64(p.seed);
  w.u32(static_cast<std::uint32_t>(model.feature_names().size()));
  for (const std::string& name : model.feature_names()) {
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes(name.data(), name.size());
  }
  write_trees(w, model.trees());
  const auto& mask = model.params().seed_masked_features;
  w.u32(static_cast<std::uint32_t>(mask.size()));
  for (std::uint32_t f : mask) w.u32(f);
  write_trees(w, model.seed_trees());
  return w.take();
}

ForestModel deserialize_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.str(sizeof kMagic) != std::string_view(kMagic, sizeof kMagic)) {
    throw CorruptModelError("not a VGFOREST model (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != ForestModel::kFormatVersion) {
    throw VersionError("unsupported model format_version " + std::to_string(version) +
                       " (this build reads " + std::to_string(ForestModel::kFormatVersion) +
                       ")");
  }
  const std::uint32_t n_features = r.u32();
  ForestParams p;
  p.n_trees = static_cast<int>(r.u32());
  p.mtry = static_cast<int>(r.u32());
  p.max_depth = static_cast<int>(r.u32());
  p.min_leaf = static_cast<int>(r.u32());
  p.seed = r.u64();

  const std::uint32_t name_count = r.u32();
  if (name_count > r.remaining() / 4) throw CorruptModelError("model data is truncated");
  std::vector<std::string> names;
  names.reserve(name_count);
  for (std::uint32_t i = 0; i < name_count; ++i) names.push_back(r.str(r.u32()));

  std::vector<DecisionTree> trees = read_trees(r, n_features);
  const std::uint32_t mask_count = r.u32();
  if (mask_count > n_features) throw CorruptModelError("seed mask longer than feature list");
  for (std::uint32_t i = 0; i < mask_count; ++i) {
    const std::uint32_t f = r.u32();
    if (f >= n_features) throw CorruptModelError("seed mask index out of range");
    p.seed_masked_features.push_back(f);
  }
  std::vector<DecisionTree> seed_trees = read_trees(r, n_features);
  if (r.remaining() != 0) throw CorruptModelError("trailing bytes after model data");
  return ForestModel(std::move(trees), p, std::move(names), n_features,
                     std::move(seed_trees));
}

void save_model(const ForestModel& model, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = serialize_model(model);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
}

ForestModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return deserialize_model(bytes);
}

}  // namespace vesselgrow
