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
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "depstrat/ecosystem.hpp"
#include "depstrat/error.hpp"
#include "depstrat/labeler.hpp"

namespace depstrat {

struct Prediction {
  std::array<double, kNumLabels> probabilities{};
  int predicted = 0;
};

// Index of the largest probability; earlier classes win ties.
inline int argmax_class(const std::array<double, kNumLabels>& p) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(kNumLabels); ++c) {
    if (p[c] > p[best]) best = c;
  }
  return best;
}

inline Prediction one_hot(int label) {
  Prediction p;
  p.probabilities[label] = 1.0;
  p.predicted = label;
  return p;
}

// Area under the ROC curve from the Mann-Whitney statistic, with midranks
// for tied scores. Absent when either side is empty.
inline std::optional<double> binary_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (positive[order[k]]) {
        rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double u = rank_sum - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

inline void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::kInvalidArgument, "predictions and truth differ in length");
}

// One-vs-rest AUC per class on that class's probability column.
inline std::array<std::optional<double>, kNumLabels> ovr_auc(const std::vector<Prediction>& preds,
                                                             const std::vector<int>& truth) {
  check_lengths(preds.size(), truth.size());
  std::array<std::optional<double>, kNumLabels> out;
  std::vector<double> scores(preds.size());
  std::vector<bool> positive(preds.size());
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    for (std::size_t i = 0; i < preds.size(); ++i) {
      scores[i] = preds[i].probabilities[c];
      positive[i] = truth[i] == static_cast<int>(c);
    }
    out[c] = binary_auc(scores, positive);
  }
  return out;
}

// Unweighted mean over classes with a defined AUC.
inline std::optional<double> macro_auc(const std::array<std::optional<double>, kNumLabels>& per_class) {
  double sum = 0.0;
  int n = 0;
  for (const auto& a : per_class) {
    if (a) {
      sum += *a;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

inline std::optional<double> macro_auc(const std::vector<Prediction>& preds, const std::vector<int>& truth) {
  return macro_auc(ovr_auc(preds, truth));
}

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
  bool precision_defined = true;
  bool recall_defined = true;
};

struct EvaluationReport {
  std::array<std::array<std::int64_t, kNumLabels>, kNumLabels> confusion{};  // [truth][predicted]
  std::array<ClassMetrics, kNumLabels> per_class{};
  std::array<std::optional<double>, kNumLabels> per_class_auc{};
  std::optional<double> macro_ovr_roc_auc;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
  std::size_t n = 0;
  std::vector<std::string> warnings;

  Json to_json() const {
    Json j;
    j["n"] = n;
    j["class_order"] = Json::array();
    for (Label l : kLabelOrder) j["class_order"].push_back(to_string(l));
    j["confusion"] = confusion;
    Json pc = Json::object();
    for (Label l : kLabelOrder) {
      const auto& m = per_class[static_cast<std::size_t>(l)];
      const auto& auc = per_class_auc[static_cast<std::size_t>(l)];
      Json e;
      e["precision"] = m.precision;
      e["recall"] = m.recall;
      e["f1"] = m.f1;
      e["support"] = m.support;
      e["roc_auc"] = auc ? Json(*auc) : Json(nullptr);
      pc[std::string(to_string(l))] = e;
    }
    j["per_class"] = pc;
    j["macro_ovr_roc_auc"] = macro_ovr_roc_auc ? Json(*macro_ovr_roc_auc) : Json(nullptr);
    j["weighted_f1"] = weighted_f1;
    j["accuracy"] = accuracy;
    j["warnings"] = warnings;
    return j;
  }
};

// Undefined precision or recall (empty denominator) counts as 0. Aggregate
// F1 weights each class by its support.
inline EvaluationReport evaluate(const std::vector<Prediction>& preds, const std::vector<int>& truth) {
  check_lengths(preds.size(), truth.size());
  EvaluationReport r;
  r.n = preds.size();
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= static_cast<int>(kNumLabels)) {
      throw Error(ErrorCode::kInvalidArgument, "truth label out of range");
    }
    ++r.confusion[truth[i]][preds[i].predicted];
  }
  std::int64_t correct = 0;
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    std::int64_t tp = r.confusion[c][c], row = 0, col = 0;
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      row += r.confusion[c][k];
      col += r.confusion[k][c];
    }
    correct += tp;
    auto& m = r.per_class[c];
    m.support = row;
    m.precision_defined = col > 0;
    m.recall_defined = row > 0;
    m.precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    m.recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    // 2PR/(P+R) written over counts: one rounding instead of several.
    m.f1 = tp > 0 ? 2.0 * static_cast<double>(tp) / static_cast<double>(row + col) : 0.0;
    if (r.n > 0) r.weighted_f1 += static_cast<double>(row) / static_cast<double>(r.n) * m.f1;
  }
  r.accuracy = r.n > 0 ? static_cast<double>(correct) / static_cast<double>(r.n) : 0.0;
  r.per_class_auc = ovr_auc(preds, truth);
  r.macro_ovr_roc_auc = macro_auc(r.per_class_auc);
  int present = 0;
  for (const auto& m : r.per_class) present += m.support > 0 ? 1 : 0;
  if (present < 2) r.warnings.push_back(std::string(error_code_name(ErrorCode::kSingleClassTruth)) +
                                        ": fewer than two classes in truth; ROC-AUC undefined");
  return r;
}

}  // namespace depstrat
