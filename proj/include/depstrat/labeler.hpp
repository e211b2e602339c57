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

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "depstrat/csv.hpp"
#include "depstrat/ecosystem.hpp"
#include "depstrat/error.hpp"
#include "depstrat/parallel.hpp"
#include "depstrat/semver.hpp"

namespace depstrat {

using semver::UpdateStrategy;

// Package labels in model class order.
enum class Label { kBalanced = 0, kPermissive = 1, kRestrictive = 2, kUnspecialized = 3 };

inline constexpr std::size_t kNumLabels = 4;
inline constexpr std::array<Label, kNumLabels> kLabelOrder = {Label::kBalanced, Label::kPermissive,
                                                               Label::kRestrictive, Label::kUnspecialized};

inline std::string_view to_string(Label l) {
  switch (l) {
    case Label::kBalanced: return "balanced";
    case Label::kPermissive: return "permissive";
    case Label::kRestrictive: return "restrictive";
    case Label::kUnspecialized: return "unspecialized";
  }
  return "?";
}

inline std::optional<Label> parse_label(std::string_view text) {
  for (Label l : kLabelOrder) {
    if (to_string(l) == text) return l;
  }
  return std::nullopt;
}

inline Label label_of(UpdateStrategy s) {
  switch (s) {
    case UpdateStrategy::kBalanced: return Label::kBalanced;
    case UpdateStrategy::kRestrictive: return Label::kRestrictive;
    case UpdateStrategy::kPermissive: return Label::kPermissive;
  }
  return Label::kUnspecialized;
}

struct StrategyDistribution {
  std::array<std::int64_t, 3> counts{};  // indexed by UpdateStrategy
  std::int64_t total = 0;
  std::int64_t excluded = 0;
  std::int64_t mixed = 0;  // constraints spanning both sides of 1.0.0

  std::int64_t count(UpdateStrategy s) const { return counts[static_cast<std::size_t>(s)]; }

  void add(UpdateStrategy s) {
    ++counts[static_cast<std::size_t>(s)];
    ++total;
  }
};

struct SpecializationLabel {
  Label value = Label::kUnspecialized;
  double agreement = 0.0;
};

// Classification of one constraint string, or nothing if it cannot be
// classified (unsupported source, malformed or empty range).
struct ConstraintClass {
  std::optional<UpdateStrategy> strategy;
  bool mixed = false;
};

inline ConstraintClass classify_constraint(std::string_view text) {
  try {
    const auto set = semver::parse_range(text);
    return ConstraintClass{semver::classify(set), semver::spans_first_stable(set)};
  } catch (const Error&) {
    return ConstraintClass{};
  }
}

inline StrategyDistribution distribution_of(const std::vector<std::string>& constraints) {
  StrategyDistribution d;
  for (const auto& c : constraints) {
    const auto cls = classify_constraint(c);
    if (!cls.strategy) {
      ++d.excluded;
      continue;
    }
    d.add(*cls.strategy);
    if (cls.mixed) ++d.mixed;
  }
  return d;
}

// Runtime constraints declared on `package` by the latest version of each of
// its dependents.
inline std::vector<std::string> dependent_constraints(const EcosystemSnapshot& s, std::string_view package) {
  s.package(package);
  std::vector<std::string> out;
  for (const auto& e : s.latest_edges) {
    if (e.kind == DependencyKind::kRuntime && e.target == package) out.push_back(e.constraint_text);
  }
  return out;
}

inline StrategyDistribution strategy_distribution(const EcosystemSnapshot& s, std::string_view package) {
  return distribution_of(dependent_constraints(s, package));
}

inline void check_threshold(double threshold) {
  if (!(threshold >= 0.5 && threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "threshold must lie in [0.5, 1)");
  }
}

inline SpecializationLabel label(const StrategyDistribution& d, double threshold = 0.5) {
  check_threshold(threshold);
  if (d.total < 2) {
    throw Error(ErrorCode::kInsufficientDependents,
                "need at least 2 classifiable dependents, have " + std::to_string(d.total));
  }
  // Walk strategies in class order so equal counts resolve deterministically;
  // a tie at the maximum can never exceed a threshold of one half.
  std::size_t best = static_cast<std::size_t>(UpdateStrategy::kBalanced);
  for (UpdateStrategy s : {UpdateStrategy::kPermissive, UpdateStrategy::kRestrictive}) {
    if (d.count(s) > d.counts[best]) best = static_cast<std::size_t>(s);
  }
  const double share = static_cast<double>(d.counts[best]) / static_cast<double>(d.total);
  SpecializationLabel out;
  out.agreement = share;
  out.value = share > threshold ? label_of(static_cast<UpdateStrategy>(best)) : Label::kUnspecialized;
  return out;
}

struct PackageLabel {
  SpecializationLabel label;
  StrategyDistribution distribution;
};

// Distributions for every package with at least two runtime dependents among
// latest versions. Each distinct constraint string is classified once.
inline std::map<std::string, StrategyDistribution> all_distributions(const EcosystemSnapshot& s,
                                                                     std::size_t threads = 1) {
  std::map<std::string, std::vector<const std::string*>> incoming;
  std::unordered_map<std::string, std::size_t> distinct_index;
  std::vector<std::string> distinct;
  for (const auto& e : s.latest_edges) {
    if (e.kind != DependencyKind::kRuntime) continue;
    incoming[e.target].push_back(&e.constraint_text);
    if (distinct_index.emplace(e.constraint_text, distinct.size()).second) distinct.push_back(e.constraint_text);
  }
  std::vector<ConstraintClass> classes(distinct.size());
  parallel_for(distinct.size(), threads, [&](std::size_t i) { classes[i] = classify_constraint(distinct[i]); });

  std::map<std::string, StrategyDistribution> out;
  for (const auto& [target, constraints] : incoming) {
    if (constraints.size() < 2) continue;
    StrategyDistribution d;
    for (const auto* c : constraints) {
      const auto& cls = classes[distinct_index.at(*c)];
      if (!cls.strategy) {
        ++d.excluded;
        continue;
      }
      d.add(*cls.strategy);
      if (cls.mixed) ++d.mixed;
    }
    out.emplace(target, d);
  }
  return out;
}

inline std::map<std::string, PackageLabel> label_distributions(const std::map<std::string, StrategyDistribution>& dists,
                                                               double threshold) {
  check_threshold(threshold);
  std::map<std::string, PackageLabel> out;
  for (const auto& [name, d] : dists) {
    if (d.total < 2) continue;
    out.emplace(name, PackageLabel{label(d, threshold), d});
  }
  return out;
}

inline std::map<std::string, PackageLabel> label_all(const EcosystemSnapshot& s, double threshold = 0.5,
                                                     std::size_t threads = 1) {
  return label_distributions(all_distributions(s, threads), threshold);
}

struct SweepRow {
  double threshold = 0.0;
  std::array<std::int64_t, kNumLabels> counts{};  // in class order
  std::int64_t labeled = 0;

  double share(Label l) const {
    return labeled == 0 ? 0.0 : static_cast<double>(counts[static_cast<std::size_t>(l)]) / labeled;
  }
};

inline std::vector<SweepRow> threshold_sweep(const std::map<std::string, StrategyDistribution>& dists,
                                             const std::vector<double>& thresholds) {
  std::vector<SweepRow> rows;
  for (double t : thresholds) {
    SweepRow row;
    row.threshold = t;
    for (const auto& [name, pl] : label_distributions(dists, t)) {
      ++row.counts[static_cast<std::size_t>(pl.label.value)];
      ++row.labeled;
    }
    rows.push_back(row);
  }
  return rows;
}

inline const std::vector<double>& default_sweep_thresholds() {
  static const std::vector<double> kThresholds = {0.5, 0.75, 0.9, 0.95};
  return kThresholds;
}

inline void write_labels_csv(std::ostream& out, const std::map<std::string, PackageLabel>& labels) {
  write_csv_row(out, {"package", "label", "agreement", "n_dependents", "n_excluded"});
  for (const auto& [name, pl] : labels) {
    write_csv_row(out, {name, std::string(to_string(pl.label.value)), format_double(pl.label.agreement),
                        std::to_string(pl.distribution.total), std::to_string(pl.distribution.excluded)});
  }
}

struct LabelRow {
  Label label = Label::kUnspecialized;
  double agreement = 0.0;
  std::int64_t n_dependents = 0;
  std::int64_t n_excluded = 0;
};

inline std::map<std::string, LabelRow> read_labels_csv(std::istream& in) {
  CsvReader reader(in, true);
  std::vector<std::string> row;
  if (!reader.next(row)) throw Error(ErrorCode::kSchemaMismatch, "labels file is empty");
  CsvHeader header(row);
  const auto c_pkg = header.require("package", "labels");
  const auto c_label = header.require("label", "labels");
  const auto c_agree = header.require("agreement", "labels");
  const auto c_dep = header.require("n_dependents", "labels");
  const auto c_exc = header.require("n_excluded", "labels");
  std::map<std::string, LabelRow> out;
  while (reader.next(row)) {
    if (row.size() != header.size()) {
      throw Error(ErrorCode::kMalformedInput, "labels line " + std::to_string(reader.line()) + ": wrong arity");
    }
    auto l = parse_label(row[c_label]);
    auto dep = parse_int(row[c_dep]);
    auto exc = parse_int(row[c_exc]);
    if (!l || !dep || !exc) {
      throw Error(ErrorCode::kMalformedInput, "labels line " + std::to_string(reader.line()) + ": bad value");
    }
    out[row[c_pkg]] = LabelRow{*l, parse_double(row[c_agree]), *dep, *exc};
  }
  return out;
}

}  // namespace depstrat
