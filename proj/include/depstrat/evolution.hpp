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
#include <cstdlib>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "depstrat/csv.hpp"
#include "depstrat/date.hpp"
#include "depstrat/ecosystem.hpp"
#include "depstrat/error.hpp"
#include "depstrat/labeler.hpp"
#include "depstrat/rng.hpp"
#include "depstrat/semver.hpp"

namespace depstrat {

struct MonthCounts {
  YearMonth month;
  std::array<std::int64_t, 3> counts{};  // indexed by UpdateStrategy
  std::int64_t excluded = 0;             // unclassifiable constraints

  std::int64_t count(UpdateStrategy s) const { return counts[static_cast<std::size_t>(s)]; }
};

struct EvolutionSeries {
  std::string target;
  std::vector<MonthCounts> months;
  std::optional<YearMonth> first_post_1_0_0;
};

// Month of the earliest release at or above 1.0.0.
inline std::optional<YearMonth> first_stable_month(const PackageRecord& p) {
  std::optional<Date> first;
  for (const auto& r : p.versions) {
    if (r.version >= semver::first_stable() && (!first || r.published_at < *first)) first = r.published_at;
  }
  if (!first) return std::nullopt;
  return YearMonth::of(*first);
}

// Latest release of `p` published on or before `cutoff`: highest publish
// date, ties broken by version precedence.
inline const Release* latest_release_at(const PackageRecord& p, const Date& cutoff) {
  const Release* best = nullptr;
  for (const auto& r : p.versions) {
    if (r.published_at > cutoff) continue;
    if (!best || r.published_at > best->published_at ||
        (r.published_at == best->published_at && r.version > best->version)) {
      best = &r;
    }
  }
  return best;
}

// Monthly strategy counts over dependents of `target`, using each dependent's
// latest version as of the end of every month. Each dependent counts at most
// once per month.
inline EvolutionSeries evolution_series(const EcosystemSnapshot& s, std::string_view target, YearMonth from,
                                        YearMonth to) {
  const PackageRecord& t = s.package(target);
  if (to < from) throw Error(ErrorCode::kInvalidArgument, "month range is reversed");
  EvolutionSeries out;
  out.target = std::string(target);
  out.first_post_1_0_0 = first_stable_month(t);

  // dependent -> version text -> constraint on target
  std::map<std::string, std::map<std::string, std::string>> declared;
  for (const auto& e : s.edges) {
    if (e.kind != DependencyKind::kRuntime || e.target != target || e.dependent == target) continue;
    declared[e.dependent].emplace(semver::to_string(e.dependent_version), e.constraint_text);
  }
  std::map<std::string, ConstraintClass> classes;
  for (const auto& [dep, by_version] : declared) {
    for (const auto& [v, c] : by_version) {
      if (!classes.count(c)) classes.emplace(c, classify_constraint(c));
    }
  }

  for (YearMonth m = from; m <= to; m = m.next()) {
    MonthCounts mc;
    mc.month = m;
    const Date cutoff = m.last_day();
    for (const auto& [dep, by_version] : declared) {
      auto pit = s.packages.find(dep);
      if (pit == s.packages.end()) continue;
      const Release* latest = latest_release_at(pit->second, cutoff);
      if (!latest) continue;
      auto vit = by_version.find(semver::to_string(latest->version));
      if (vit == by_version.end()) continue;
      const auto& cls = classes.at(vit->second);
      if (cls.strategy) {
        ++mc.counts[static_cast<std::size_t>(*cls.strategy)];
      } else {
        ++mc.excluded;
      }
    }
    out.months.push_back(mc);
  }
  return out;
}

struct ShiftEvent {
  YearMonth month;
  UpdateStrategy from_strategy = UpdateStrategy::kBalanced;
  UpdateStrategy to_strategy = UpdateStrategy::kBalanced;
  int persisted_months = 0;
  bool at_first_stable = false;  // within two months of the first 1.0.0 release
};

// Strategy with the strictly largest count; none on ties or empty months.
inline std::optional<UpdateStrategy> dominant_strategy(const MonthCounts& mc) {
  std::optional<UpdateStrategy> best;
  std::int64_t best_count = 0;
  bool tied = false;
  for (UpdateStrategy s : {UpdateStrategy::kBalanced, UpdateStrategy::kRestrictive, UpdateStrategy::kPermissive}) {
    const auto c = mc.count(s);
    if (c > best_count) {
      best = s;
      best_count = c;
      tied = false;
    } else if (c == best_count && c > 0) {
      tied = true;
    }
  }
  if (tied) return std::nullopt;
  return best;
}

// A shift is a change of dominant strategy whose new dominant holds for at
// least `persistence` consecutive months. The first dominant to hold that
// long establishes the baseline and is not itself a shift.
inline std::vector<ShiftEvent> detect_shifts(const EvolutionSeries& series, int persistence = 3) {
  if (persistence < 1) throw Error(ErrorCode::kInvalidArgument, "persistence must be at least 1");
  std::vector<ShiftEvent> events;
  std::optional<UpdateStrategy> established;
  const auto& months = series.months;
  for (std::size_t i = 0; i < months.size();) {
    const auto d = dominant_strategy(months[i]);
    std::size_t j = i + 1;
    while (j < months.size() && dominant_strategy(months[j]) == d) ++j;
    const int run = static_cast<int>(j - i);
    if (d && run >= persistence) {
      if (established && *established != *d) {
        ShiftEvent e;
        e.month = months[i].month;
        e.from_strategy = *established;
        e.to_strategy = *d;
        e.persisted_months = run;
        if (series.first_post_1_0_0) {
          e.at_first_stable = std::abs(e.month.index() - series.first_post_1_0_0->index()) <= 2;
        }
        events.push_back(e);
      }
      established = d;
    }
    i = j;
  }
  return events;
}

inline void write_evolution_csv(std::ostream& out, const EvolutionSeries& series) {
  write_csv_row(out, {"month", "balanced", "restrictive", "permissive", "marker_1_0_0"});
  for (const auto& mc : series.months) {
    const bool marker = series.first_post_1_0_0 && *series.first_post_1_0_0 == mc.month;
    write_csv_row(out, {to_string(mc.month), std::to_string(mc.count(UpdateStrategy::kBalanced)),
                        std::to_string(mc.count(UpdateStrategy::kRestrictive)),
                        std::to_string(mc.count(UpdateStrategy::kPermissive)), marker ? "1" : "0"});
  }
}

inline Json shifts_to_json(const EvolutionSeries& series, const std::vector<ShiftEvent>& events, int persistence) {
  Json j;
  j["target"] = series.target;
  j["persistence"] = persistence;
  j["first_post_1_0_0"] = series.first_post_1_0_0 ? Json(to_string(*series.first_post_1_0_0)) : Json(nullptr);
  Json list = Json::array();
  for (const auto& e : events) {
    list.push_back(Json{{"month", to_string(e.month)},
                        {"from", std::string(semver::to_string(e.from_strategy))},
                        {"to", std::string(semver::to_string(e.to_strategy))},
                        {"persisted_months", e.persisted_months},
                        {"at_1_0_0", e.at_first_stable}});
  }
  j["shifts"] = list;
  return j;
}

struct SampleOptions {
  std::size_t per_class = 40;
  std::int64_t min_dependents = 100;
  std::optional<std::int64_t> max_dependents = 1000;
  std::uint64_t seed = 0;
};

struct SampledPackage {
  std::string package;
  Label label = Label::kUnspecialized;
  std::int64_t dependents = 0;
};

// Seeded sample of up to `per_class` packages per label among packages whose
// dependent count lies in the requested band.
inline std::vector<SampledPackage> convenience_sample(const std::map<std::string, PackageLabel>& labels,
                                                      const SampleOptions& opt) {
  std::array<std::vector<SampledPackage>, kNumLabels> pools;
  for (const auto& [name, pl] : labels) {
    const auto deps = pl.distribution.total + pl.distribution.excluded;
    if (deps < opt.min_dependents || (opt.max_dependents && deps > *opt.max_dependents)) continue;
    pools[static_cast<std::size_t>(pl.label.value)].push_back({name, pl.label.value, deps});
  }
  Rng rng(opt.seed);
  std::vector<SampledPackage> out;
  for (auto& pool : pools) {
    shuffle(pool, rng);
    if (pool.size() > opt.per_class) pool.resize(opt.per_class);
    std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.package < b.package; });
    out.insert(out.end(), pool.begin(), pool.end());
  }
  return out;
}

}  // namespace depstrat
