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
#include <string>
#include <vector>

#include "depstrat/dataset.hpp"
#include "depstrat/error.hpp"
#include "depstrat/forest.hpp"
#include "depstrat/metrics.hpp"
#include "depstrat/parallel.hpp"
#include "depstrat/rng.hpp"

namespace depstrat {

// Linear-interpolation quantile of sorted values, q in [0, 1].
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct FeatureImportance {
  std::string feature;
  std::vector<double> drops;  // one per repetition
  double mean = 0.0;
  double q1 = 0.0, median = 0.0, q3 = 0.0;
  double min = 0.0, max = 0.0;
};

struct ImportanceReport {
  double baseline_auc = 0.0;
  int repetitions = 0;
  std::uint64_t seed = 0;
  std::vector<FeatureImportance> features;  // model feature order

  // Feature indices by decreasing mean drop, names breaking ties.
  std::vector<std::size_t> ranking() const {
    std::vector<std::size_t> order(features.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (features[a].mean != features[b].mean) return features[a].mean > features[b].mean;
      return features[a].feature < features[b].feature;
    });
    return order;
  }
};

// Drop in macro one-vs-rest ROC-AUC when one test column is shuffled.
// Repetition r applies the same row permutation to whichever column is
// shuffled, so results do not depend on column order.
inline ImportanceReport permutation_importance(const ForestModel& m, const Dataset& test, std::uint64_t seed,
                                               int repetitions = 10, std::size_t threads = 1) {
  if (test.size() == 0) throw Error(ErrorCode::kTooFewRows, "empty test set");
  const auto base = macro_auc(m.predict(test.x, threads), test.y);
  if (!base) throw Error(ErrorCode::kSingleClassTruth, "baseline ROC-AUC undefined on the test set");
  ImportanceReport rep;
  rep.baseline_auc = *base;
  rep.repetitions = repetitions;
  rep.seed = seed;
  const std::size_t d = test.x.cols();
  const std::size_t n = test.size();

  std::vector<std::vector<std::size_t>> perms(repetitions);
  for (int r = 0; r < repetitions; ++r) {
    perms[r].resize(n);
    std::iota(perms[r].begin(), perms[r].end(), 0);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    shuffle(perms[r], rng);
  }

  std::vector<double> drops(d * repetitions);
  parallel_for(d * repetitions, threads, [&](std::size_t task) {
    const std::size_t f = task / repetitions;
    const std::size_t r = task % repetitions;
    Matrix x = test.x;
    for (std::size_t i = 0; i < n; ++i) x(i, f) = test.x(perms[r][i], f);
    const auto auc = macro_auc(m.predict(x), test.y);
    drops[task] = *base - auc.value_or(*base);
  });

  for (std::size_t f = 0; f < d; ++f) {
    FeatureImportance fi;
    fi.feature = f < m.feature_names.size() ? m.feature_names[f] : "x" + std::to_string(f);
    fi.drops.assign(drops.begin() + f * repetitions, drops.begin() + (f + 1) * repetitions);
    for (double v : fi.drops) fi.mean += v;
    fi.mean /= repetitions;
    auto sorted = fi.drops;
    std::sort(sorted.begin(), sorted.end());
    fi.q1 = quantile_sorted(sorted, 0.25);
    fi.median = quantile_sorted(sorted, 0.5);
    fi.q3 = quantile_sorted(sorted, 0.75);
    fi.min = sorted.front();
    fi.max = sorted.back();
    rep.features.push_back(std::move(fi));
  }
  return rep;
}

struct PdpOptions {
  int grid_points = 20;
  std::size_t subsample_above = 50000;
  std::uint64_t seed = 0;
};

struct PDPGrid {
  std::string feature;
  bool categorical = false;
  std::vector<double> grid;                                  // ascending
  std::vector<std::array<double, kNumLabels>> mean_probability;  // per grid value, class order
  std::vector<double> deciles;                               // 10th..90th percentiles of the data

  std::vector<double> curve(int label) const {
    std::vector<double> out;
    for (const auto& p : mean_probability) out.push_back(p[label]);
    return out;
  }
};

inline std::vector<double> pdp_grid_values(const std::vector<double>& column, bool categorical, int grid_points) {
  std::vector<double> sorted = column;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> grid;
  if (categorical) {
    grid = sorted;
  } else {
    for (int i = 0; i < grid_points; ++i) {
      grid.push_back(quantile_sorted(sorted, grid_points == 1 ? 0.0 : static_cast<double>(i) / (grid_points - 1)));
    }
  }
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

// Mean predicted class probabilities with `feature` overridden to each grid
// value across all rows (a seeded subsample of rows above the size limit).
inline PDPGrid partial_dependence(const ForestModel& m, const Matrix& data, std::size_t feature, bool categorical,
                                  const PdpOptions& opt = {}, std::size_t threads = 1) {
  if (data.rows() == 0) throw Error(ErrorCode::kTooFewRows, "no rows for partial dependence");
  if (feature >= data.cols()) throw Error(ErrorCode::kInvalidArgument, "feature index out of range");
  Matrix rows = data;
  if (data.rows() > opt.subsample_above) {
    std::vector<std::size_t> pick(data.rows());
    std::iota(pick.begin(), pick.end(), 0);
    Rng rng(derive_seed(opt.seed, "pdp-subsample"));
    shuffle(pick, rng);
    pick.resize(opt.subsample_above);
    std::sort(pick.begin(), pick.end());
    rows = data.select_rows(pick);
  }
  PDPGrid out;
  out.feature = feature < m.feature_names.size() ? m.feature_names[feature] : "x" + std::to_string(feature);
  out.categorical = categorical;
  const auto column = rows.column(feature);
  out.grid = pdp_grid_values(column, categorical, opt.grid_points);
  auto sorted = column;
  std::sort(sorted.begin(), sorted.end());
  for (int q = 1; q <= 9; ++q) out.deciles.push_back(quantile_sorted(sorted, q / 10.0));

  std::vector<std::array<double, kNumLabels>> per_row(rows.rows());
  for (double g : out.grid) {
    parallel_blocks(rows.rows(), threads, [&](std::size_t begin, std::size_t end) {
      std::vector<double> x(rows.cols());
      for (std::size_t r = begin; r < end; ++r) {
        std::copy(rows.row(r), rows.row(r) + rows.cols(), x.begin());
        x[feature] = g;
        per_row[r] = m.predict(x.data()).probabilities;
      }
    });
    std::array<double, kNumLabels> mean{};
    for (const auto& p : per_row) {
      for (std::size_t k = 0; k < kNumLabels; ++k) mean[k] += p[k];
    }
    for (auto& v : mean) v /= static_cast<double>(per_row.size());
    out.mean_probability.push_back(mean);
  }
  return out;
}

}  // namespace depstrat
