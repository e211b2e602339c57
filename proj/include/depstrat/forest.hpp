/*
 * Copyright 2026 The depstrat Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "depstrat/dataset.hpp"
#include "depstrat/ecosystem.hpp"
#include "depstrat/error.hpp"
#include "depstrat/labeler.hpp"
#include "depstrat/metrics.hpp"
#include "depstrat/parallel.hpp"
#include "depstrat/rng.hpp"

namespace depstrat {

using ClassCounts = std::array<std::int64_t, kNumLabels>;

inline double gini(const ClassCounts& counts) {
  std::int64_t n = 0;
  for (auto c : counts) n += c;
  if (n == 0) return 0.0;
  double sum_sq = 0.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(n);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

struct ForestParams {
  int n_trees = 500;
  int min_samples_split = 8;
  int features_per_split = 0;  // 0 selects floor(sqrt(d))

  int resolved_features(std::size_t d) const {
    if (features_per_split > 0) return std::min<int>(features_per_split, static_cast<int>(d));
    int r = 1;
    while (static_cast<std::size_t>((r + 1) * (r + 1)) <= d) ++r;
    return d == 0 ? 0 : r;
  }

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

// Flat binary tree. Leaves have feature -1 and carry class counts.
struct DecisionTree {
  std::vector<std::int32_t> feature;
  std::vector<double> threshold;
  std::vector<std::int32_t> left;
  std::vector<std::int32_t> right;
  std::vector<ClassCounts> counts;

  std::size_t size() const { return feature.size(); }
  bool is_leaf(std::size_t node) const { return feature[node] < 0; }

  std::size_t add_node() {
    feature.push_back(-1);
    threshold.push_back(0.0);
    left.push_back(-1);
    right.push_back(-1);
    counts.push_back(ClassCounts{});
    return feature.size() - 1;
  }

  // Values equal to the threshold go left.
  std::size_t leaf_for(const double* x) const {
    std::size_t node = 0;
    while (feature[node] >= 0) {
      node = x[feature[node]] <= threshold[node] ? static_cast<std::size_t>(left[node])
                                                 : static_cast<std::size_t>(right[node]);
    }
    return node;
  }

  std::array<double, kNumLabels> leaf_proportions(const double* x) const {
    const auto& c = counts[leaf_for(x)];
    std::int64_t n = 0;
    for (auto v : c) n += v;
    std::array<double, kNumLabels> p{};
    for (std::size_t k = 0; k < kNumLabels; ++k) p[k] = static_cast<double>(c[k]) / static_cast<double>(n);
    return p;
  }

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

inline constexpr std::string_view kForestFormat = "depstrat-forest";
inline constexpr int kForestFormatVersion = 1;

struct ForestModel {
  ForestParams params;
  std::uint64_t seed = 0;
  std::vector<std::string> feature_names;
  std::vector<DecisionTree> trees;
  std::optional<double> oob_accuracy;
  std::vector<std::string> warnings;
  Json metadata = Json::object();

  Prediction predict(const double* x) const {
    Prediction p;
    for (const auto& t : trees) {
      const auto leaf = t.leaf_proportions(x);
      for (std::size_t k = 0; k < kNumLabels; ++k) p.probabilities[k] += leaf[k];
    }
    for (auto& v : p.probabilities) v /= static_cast<double>(trees.size());
    p.predicted = argmax_class(p.probabilities);
    return p;
  }

  Prediction predict(const std::vector<double>& x) const {
    if (x.size() != feature_names.size()) {
      throw Error(ErrorCode::kSchemaMismatch, "expected " + std::to_string(feature_names.size()) + " features, got " +
                                                  std::to_string(x.size()));
    }
    return predict(x.data());
  }

  std::vector<Prediction> predict(const Matrix& x, std::size_t threads = 1) const {
    if (x.cols() != feature_names.size()) throw Error(ErrorCode::kSchemaMismatch, "feature matrix width mismatch");
    std::vector<Prediction> out(x.rows());
    parallel_for(x.rows(), threads, [&](std::size_t r) { out[r] = predict(x.row(r)); });
    return out;
  }

  // Features that appear in at least one split.
  std::vector<bool> used_features() const {
    std::vector<bool> used(feature_names.size(), false);
    for (const auto& t : trees) {
      for (auto f : t.feature) {
        if (f >= 0) used[f] = true;
      }
    }
    return used;
  }

  friend bool operator==(const ForestModel& a, const ForestModel& b) {
    return a.params == b.params && a.seed == b.seed && a.feature_names == b.feature_names && a.trees == b.trees &&
           a.oob_accuracy == b.oob_accuracy && a.warnings == b.warnings && a.metadata == b.metadata;
  }
};

namespace detail {

struct TreeBuilder {
  const Matrix& x;
  const std::vector<int>& y;
  const ForestParams& params;
  int mtry;
  Rng rng;
  std::vector<std::pair<double, int>> scratch;
  std::vector<std::size_t> feature_order;

  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = -1.0;
  };

  // Best split on one feature over samples[begin, end); larger score is a
  // lower weighted Gini impurity.
  void evaluate_feature(const std::vector<std::uint32_t>& samples, std::size_t begin, std::size_t end, int f,
                        const ClassCounts& total, Split& best) {
    scratch.clear();
    for (std::size_t i = begin; i < end; ++i) scratch.emplace_back(x(samples[i], f), y[samples[i]]);
    std::sort(scratch.begin(), scratch.end());
    const auto n = static_cast<std::int64_t>(scratch.size());
    ClassCounts left{};
    for (std::int64_t i = 0; i + 1 < n; ++i) {
      ++left[scratch[i].second];
      if (scratch[i].first == scratch[i + 1].first) continue;
      const std::int64_t nl = i + 1, nr = n - nl;
      double sl = 0.0, sr = 0.0;
      for (std::size_t k = 0; k < kNumLabels; ++k) {
        const double cl = static_cast<double>(left[k]);
        const double cr = static_cast<double>(total[k] - left[k]);
        sl += cl * cl;
        sr += cr * cr;
      }
      const double score = sl / static_cast<double>(nl) + sr / static_cast<double>(nr);
      if (score > best.score) {
        const double a = scratch[i].first, b = scratch[i + 1].first;
        double mid = a + (b - a) / 2.0;
        if (!(mid >= a && mid < b)) mid = a;
        best = Split{f, mid, score};
      }
    }
  }

  DecisionTree build(std::vector<std::uint32_t>& samples) {
    DecisionTree tree;
    struct Pending {
      std::size_t node, begin, end;
    };
    std::vector<Pending> stack;
    stack.push_back({tree.add_node(), 0, samples.size()});
    feature_order.resize(x.cols());
    while (!stack.empty()) {
      const Pending job = stack.back();
      stack.pop_back();
      ClassCounts counts{};
      for (std::size_t i = job.begin; i < job.end; ++i) ++counts[y[samples[i]]];
      const auto n = static_cast<std::int64_t>(job.end - job.begin);
      const bool pure = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;
      if (n < params.min_samples_split || pure) {
        tree.counts[job.node] = counts;
        continue;
      }
      // Candidates come from a random permutation of all features. Features
      // constant within the node do not use up the candidate budget.
      std::iota(feature_order.begin(), feature_order.end(), 0);
      shuffle(feature_order, rng);
      Split best;
      int evaluated = 0;
      for (std::size_t fi = 0; fi < feature_order.size() && evaluated < mtry; ++fi) {
        const int f = static_cast<int>(feature_order[fi]);
        double lo = x(samples[job.begin], f), hi = lo;
        for (std::size_t i = job.begin + 1; i < job.end; ++i) {
          const double v = x(samples[i], f);
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        if (lo == hi) continue;
        ++evaluated;
        evaluate_feature(samples, job.begin, job.end, f, counts, best);
      }
      if (best.feature < 0) {
        tree.counts[job.node] = counts;
        continue;
      }
      auto mid_it = std::partition(samples.begin() + job.begin, samples.begin() + job.end,
                                   [&](std::uint32_t s) { return x(s, best.feature) <= best.threshold; });
      const auto mid = static_cast<std::size_t>(mid_it - samples.begin());
      const std::size_t l = tree.add_node();
      const std::size_t r = tree.add_node();
      tree.feature[job.node] = best.feature;
      tree.threshold[job.node] = best.threshold;
      tree.left[job.node] = static_cast<std::int32_t>(l);
      tree.right[job.node] = static_cast<std::int32_t>(r);
      stack.push_back({r, mid, job.end});
      stack.push_back({l, job.begin, mid});
    }
    return tree;
  }
};

}  // namespace detail

inline void check_training_data(const Dataset& d) {
  if (d.size() == 0) throw Error(ErrorCode::kTooFewRows, "no training rows");
  if (d.y.size() != d.size()) throw Error(ErrorCode::kInvalidArgument, "label count differs from row count");
  for (int label : d.y) {
    if (label < 0 || label >= static_cast<int>(kNumLabels)) {
      throw Error(ErrorCode::kInvalidArgument, "training label missing or out of range");
    }
  }
  for (std::size_t r = 0; r < d.x.rows(); ++r) {
    for (std::size_t c = 0; c < d.x.cols(); ++c) {
      if (!std::isfinite(d.x(r, c))) throw Error(ErrorCode::kInvalidArgument, "non-finite feature value");
    }
  }
}

// Bagged CART trees. Tree t draws its bootstrap sample and candidate
// features from its own stream derive_seed(seed, t), so the model does not
// depend on the worker count.
inline ForestModel train_forest(const Dataset& train, const ForestParams& params, std::uint64_t seed,
                                std::size_t threads = 1) {
  check_training_data(train);
  if (params.n_trees < 1 || params.min_samples_split < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need at least one tree and min_samples_split >= 2");
  }
  ForestModel m;
  m.params = params;
  m.seed = seed;
  m.feature_names = train.feature_names;
  if (m.feature_names.empty()) {
    for (std::size_t c = 0; c < train.x.cols(); ++c) m.feature_names.push_back("x" + std::to_string(c));
  }
  ClassCounts present{};
  for (int label : train.y) ++present[label];
  for (Label l : kLabelOrder) {
    if (present[static_cast<std::size_t>(l)] == 0) {
      m.warnings.push_back("EmptyClass: no training rows labeled " + std::string(to_string(l)));
    }
  }

  const std::size_t n = train.size();
  m.trees.resize(params.n_trees);
  std::vector<std::vector<char>> in_bag(params.n_trees);
  const int mtry = params.resolved_features(train.x.cols());
  parallel_blocks(params.n_trees, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      detail::TreeBuilder builder{train.x, train.y, params, mtry, Rng(derive_seed(seed, t)), {}, {}};
      std::vector<std::uint32_t> samples(n);
      in_bag[t].assign(n, 0);
      for (auto& s : samples) {
        s = static_cast<std::uint32_t>(uniform_index(builder.rng, n));
        in_bag[t][s] = 1;
      }
      m.trees[t] = builder.build(samples);
    }
  });

  std::vector<std::optional<int>> oob_pred(n);
  parallel_for(n, threads, [&](std::size_t r) {
    std::array<double, kNumLabels> sum{};
    bool any = false;
    for (std::size_t t = 0; t < m.trees.size(); ++t) {
      if (in_bag[t][r]) continue;
      any = true;
      const auto p = m.trees[t].leaf_proportions(train.x.row(r));
      for (std::size_t k = 0; k < kNumLabels; ++k) sum[k] += p[k];
    }
    if (any) oob_pred[r] = argmax_class(sum);
  });
  std::size_t scored = 0, correct = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (!oob_pred[r]) continue;
    ++scored;
    if (*oob_pred[r] == train.y[r]) ++correct;
  }
  if (scored > 0) m.oob_accuracy = static_cast<double>(correct) / static_cast<double>(scored);
  return m;
}

inline Json forest_to_json(const ForestModel& m) {
  Json j;
  j["format"] = kForestFormat;
  j["version"] = kForestFormatVersion;
  j["params"] = Json{{"n_trees", m.params.n_trees},
                     {"min_samples_split", m.params.min_samples_split},
                     {"features_per_split", m.params.features_per_split}};
  j["seed"] = m.seed;
  j["class_order"] = Json::array();
  for (Label l : kLabelOrder) j["class_order"].push_back(to_string(l));
  j["feature_names"] = m.feature_names;
  j["oob_accuracy"] = m.oob_accuracy ? Json(*m.oob_accuracy) : Json(nullptr);
  j["warnings"] = m.warnings;
  j["metadata"] = m.metadata;
  Json trees = Json::array();
  for (const auto& t : m.trees) {
    Json jt;
    jt["feature"] = t.feature;
    jt["threshold"] = t.threshold;
    jt["left"] = t.left;
    jt["right"] = t.right;
    jt["counts"] = t.counts;
    trees.push_back(std::move(jt));
  }
  j["trees"] = std::move(trees);
  return j;
}

inline ForestModel forest_from_json(const Json& j) {
  try {
    if (j.at("format").get<std::string>() != kForestFormat || j.at("version").get<int>() != kForestFormatVersion) {
      throw Error(ErrorCode::kSchemaMismatch, "not a depstrat forest model of a supported version");
    }
    std::vector<std::string> order;
    for (Label l : kLabelOrder) order.emplace_back(to_string(l));
    if (j.at("class_order").get<std::vector<std::string>>() != order) {
      throw Error(ErrorCode::kSchemaMismatch, "model class order differs");
    }
    ForestModel m;
    const auto& p = j.at("params");
    m.params.n_trees = p.at("n_trees").get<int>();
    m.params.min_samples_split = p.at("min_samples_split").get<int>();
    m.params.features_per_split = p.at("features_per_split").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    if (!j.at("oob_accuracy").is_null()) m.oob_accuracy = j.at("oob_accuracy").get<double>();
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    m.metadata = j.at("metadata");
    for (const auto& jt : j.at("trees")) {
      DecisionTree t;
      t.feature = jt.at("feature").get<std::vector<std::int32_t>>();
      t.threshold = jt.at("threshold").get<std::vector<double>>();
      t.left = jt.at("left").get<std::vector<std::int32_t>>();
      t.right = jt.at("right").get<std::vector<std::int32_t>>();
      t.counts = jt.at("counts").get<std::vector<ClassCounts>>();
      const std::size_t n = t.feature.size();
      if (n == 0 || t.threshold.size() != n || t.left.size() != n || t.right.size() != n || t.counts.size() != n) {
        throw Error(ErrorCode::kSchemaMismatch, "inconsistent tree arrays");
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (t.feature[i] >= static_cast<std::int32_t>(m.feature_names.size())) {
          throw Error(ErrorCode::kSchemaMismatch, "split feature out of range");
        }
        if (t.feature[i] >= 0 && (t.left[i] <= static_cast<std::int32_t>(i) || t.right[i] <= static_cast<std::int32_t>(i) ||
                                  t.left[i] >= static_cast<std::int32_t>(n) || t.right[i] >= static_cast<std::int32_t>(n))) {
          throw Error(ErrorCode::kSchemaMismatch, "child index out of range");
        }
      }
      m.trees.push_back(std::move(t));
    }
    if (m.trees.empty()) throw Error(ErrorCode::kSchemaMismatch, "model has no trees");
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchemaMismatch, std::string("model: ") + e.what());
  }
}

struct DatasetSplit {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::uint64_t seed = 0;
  bool stratified = true;
};

// 80/20 split. Stratified: each class contributes its largest-remainder share
// of round(n/5) test rows, so every class is within one row of 20%.
inline DatasetSplit split_dataset(const std::vector<int>& labels, std::uint64_t seed, bool stratify = true) {
  const std::size_t n = labels.size();
  if (n < 10) throw Error(ErrorCode::kTooFewRows, "need at least 10 rows to split, have " + std::to_string(n));
  DatasetSplit out;
  out.seed = seed;
  out.stratified = stratify;
  Rng rng(seed);
  const std::size_t total_test = (n + 2) / 5;
  std::vector<std::vector<std::size_t>> groups;
  if (stratify) {
    groups.resize(kNumLabels + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const int l = labels[i];
      groups[(l >= 0 && l < static_cast<int>(kNumLabels)) ? l : kNumLabels].push_back(i);
    }
  } else {
    groups.emplace_back(n);
    std::iota(groups[0].begin(), groups[0].end(), 0);
  }
  std::vector<std::size_t> quota(groups.size());
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    quota[g] = groups[g].size() / 5;
    assigned += quota[g];
  }
  std::vector<std::size_t> by_remainder(groups.size());
  std::iota(by_remainder.begin(), by_remainder.end(), 0);
  std::stable_sort(by_remainder.begin(), by_remainder.end(),
                   [&](std::size_t a, std::size_t b) { return groups[a].size() % 5 > groups[b].size() % 5; });
  for (std::size_t g : by_remainder) {
    if (assigned >= total_test || groups[g].size() % 5 == 0) break;
    ++quota[g];
    ++assigned;
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    shuffle(groups[g], rng);
    out.test_indices.insert(out.test_indices.end(), groups[g].begin(), groups[g].begin() + quota[g]);
    out.train_indices.insert(out.train_indices.end(), groups[g].begin() + quota[g], groups[g].end());
  }
  std::sort(out.test_indices.begin(), out.test_indices.end());
  std::sort(out.train_indices.begin(), out.train_indices.end());
  return out;
}

// Samples each label from the training prior; one-hot probabilities.
inline std::vector<Prediction> baseline_stratified(const std::vector<int>& train_labels, std::size_t test_n,
                                                   std::uint64_t seed) {
  if (train_labels.empty()) throw Error(ErrorCode::kTooFewRows, "empty training labels");
  std::array<double, kNumLabels> prior{};
  for (int l : train_labels) prior[l] += 1.0;
  for (auto& p : prior) p /= static_cast<double>(train_labels.size());
  Rng rng(seed);
  std::vector<Prediction> out;
  out.reserve(test_n);
  for (std::size_t i = 0; i < test_n; ++i) {
    const double u = uniform01(rng);
    double cum = 0.0;
    int pick = -1;
    for (int c = 0; c < static_cast<int>(kNumLabels); ++c) {
      if (prior[c] == 0.0) continue;
      cum += prior[c];
      pick = c;
      if (u < cum) break;
    }
    out.push_back(one_hot(pick));
  }
  return out;
}

inline std::vector<Prediction> baseline_balanced(std::size_t test_n) {
  return std::vector<Prediction>(test_n, one_hot(static_cast<int>(Label::kBalanced)));
}

// Fold of every row for k-fold stratified cross-validation.
inline std::vector<int> stratified_folds(const std::vector<int>& labels, int k, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> groups(kNumLabels);
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
  Rng rng(seed);
  std::vector<int> fold(labels.size(), 0);
  std::size_t next = 0;
  for (auto& g : groups) {
    shuffle(g, rng);
    for (auto i : g) fold[i] = static_cast<int>(next++ % static_cast<std::size_t>(k));
  }
  return fold;
}

struct CvResult {
  ForestParams best;
  std::vector<std::pair<ForestParams, double>> mean_auc;  // grid order
};

inline std::vector<ForestParams> default_grid() {
  std::vector<ForestParams> grid;
  for (int trees : {100, 300, 500}) {
    for (int split : {2, 8, 16}) grid.push_back(ForestParams{trees, split, 0});
  }
  return grid;
}

// Grid search by mean macro one-vs-rest ROC-AUC over stratified folds;
// earlier grid points win ties.
inline CvResult tune_cv(const Dataset& train, const std::vector<ForestParams>& grid, std::uint64_t seed,
                        int folds = 10, std::size_t threads = 1) {
  check_training_data(train);
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "empty parameter grid");
  if (train.size() < static_cast<std::size_t>(folds)) throw Error(ErrorCode::kTooFewRows, "fewer rows than folds");
  const auto fold = stratified_folds(train.y, folds, derive_seed(seed, "cv-folds"));
  CvResult out;
  double best_auc = -1.0;
  for (const auto& params : grid) {
    double sum = 0.0;
    int scored = 0;
    for (int f = 0; f < folds; ++f) {
      std::vector<std::size_t> tr, te;
      for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? te : tr).push_back(i);
      const auto model = train_forest(train.subset(tr), params, derive_seed(seed, static_cast<std::uint64_t>(f)), threads);
      const auto held = train.subset(te);
      if (auto auc = macro_auc(model.predict(held.x, threads), held.y)) {
        sum += *auc;
        ++scored;
      }
    }
    const double mean = scored > 0 ? sum / scored : 0.0;
    out.mean_auc.emplace_back(params, mean);
    if (mean > best_auc) {
      best_auc = mean;
      out.best = params;
    }
  }
  return out;
}

}  // namespace depstrat
