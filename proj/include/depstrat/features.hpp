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
#include <cctype>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "depstrat/csv.hpp"
#include "depstrat/dataset.hpp"
#include "depstrat/date.hpp"
#include "depstrat/domain.hpp"
#include "depstrat/ecosystem.hpp"
#include "depstrat/graph.hpp"
#include "depstrat/labeler.hpp"
#include "depstrat/parallel.hpp"

namespace depstrat {

inline constexpr std::size_t kNumFeatures = 19;

enum class Feature : std::size_t {
  kDependencyCount,
  kTransitiveDependencyCount,
  kDependentCount,
  kVersionFrequency,
  kAgeMonths,
  kHasDescription,
  kHasKeywords,
  kHasHomepage,
  kLicenseCode,
  kSourcerank,
  kReleaseStatus,
  kDaysSinceLastRelease,
  kDependentRepositories,
  kRepositorySizeKb,
  kRepositoryOpenIssues,
  kRepositoryStars,
  kHasRepoLicense,
  kHasRepoReadme,
  kDomain,
};

inline const std::array<std::string, kNumFeatures>& feature_names() {
  static const std::array<std::string, kNumFeatures> kNames = {
      "dependency_count",       "transitive_dependency_count", "dependent_count",
      "version_frequency",      "age_months",                  "has_description",
      "has_keywords",           "has_homepage",                "license_code",
      "sourcerank",             "release_status",              "days_since_last_release",
      "dependent_repositories", "repository_size_kb",          "repository_open_issues",
      "repository_stars",       "has_repo_license",            "has_repo_readme",
      "domain"};
  return kNames;
}

inline std::optional<std::size_t> feature_index(std::string_view name) {
  const auto& names = feature_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

// Features whose values are codes or flags rather than magnitudes.
inline bool is_categorical_feature(std::string_view name) {
  return name.rfind("has_", 0) == 0 || name == "license_code" || name == "release_status" || name == "domain";
}

inline bool is_integer_feature(std::size_t index) { return index != static_cast<std::size_t>(Feature::kVersionFrequency); }

using FeatureVector = std::array<double, kNumFeatures>;

inline double get(const FeatureVector& v, Feature f) { return v[static_cast<std::size_t>(f)]; }

inline std::string normalize_license(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  std::string out(text.substr(b, e - b));
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Distinct normalized license strings in lexicographic order, coded 1..n.
// The empty string codes as 0.
inline std::map<std::string, int> license_codes(const EcosystemSnapshot& s) {
  std::set<std::string> distinct;
  for (const auto& [name, p] : s.packages) {
    auto l = normalize_license(p.license_text);
    if (!l.empty()) distinct.insert(std::move(l));
  }
  std::map<std::string, int> codes;
  int next = 1;
  for (const auto& l : distinct) codes.emplace(l, next++);
  return codes;
}

struct FeatureRow {
  std::string package;
  FeatureVector values{};
};

inline FeatureVector package_features(const PackageRecord& p, const DepGraph& g,
                                      const std::vector<TransitiveCounts>& transitive, const DomainModel& dm,
                                      const std::map<std::string, int>& licenses, const Date& snapshot_date) {
  FeatureVector v{};
  auto set = [&](Feature f, double value) { v[static_cast<std::size_t>(f)] = value; };
  const auto node = g.require(p.name);
  const int age = std::max(0, months_between(p.created_at, snapshot_date));
  const auto releases = static_cast<double>(p.versions.size());
  Date last = p.versions.empty() ? p.created_at : p.versions.front().published_at;
  for (const auto& r : p.versions) last = std::max(last, r.published_at);
  const auto lic = normalize_license(p.license_text);
  const RepoMetadata repo = p.repo.value_or(RepoMetadata{});

  set(Feature::kDependencyCount, static_cast<double>(g.forward(node).size()));
  set(Feature::kTransitiveDependencyCount, static_cast<double>(transitive[node].descendants));
  set(Feature::kDependentCount, static_cast<double>(g.reverse(node).size()));
  set(Feature::kVersionFrequency, age > 0 ? releases / age : releases);
  set(Feature::kAgeMonths, age);
  set(Feature::kHasDescription, p.has_description ? 1 : 0);
  set(Feature::kHasKeywords, p.keywords.empty() ? 0 : 1);
  set(Feature::kHasHomepage, p.has_homepage ? 1 : 0);
  set(Feature::kLicenseCode, lic.empty() ? 0 : licenses.at(lic));
  set(Feature::kSourcerank, static_cast<double>(p.sourcerank));
  set(Feature::kReleaseStatus, p.latest_version >= semver::first_stable() ? 1 : 0);
  set(Feature::kDaysSinceLastRelease, static_cast<double>(std::max<std::int64_t>(0, days_between(last, snapshot_date))));
  set(Feature::kDependentRepositories, static_cast<double>(p.dependent_repositories));
  set(Feature::kRepositorySizeKb, static_cast<double>(repo.size_kb.value_or(0)));
  set(Feature::kRepositoryOpenIssues, static_cast<double>(repo.open_issues.value_or(0)));
  set(Feature::kRepositoryStars, static_cast<double>(repo.stars.value_or(0)));
  set(Feature::kHasRepoLicense, repo.has_license_file ? 1 : 0);
  set(Feature::kHasRepoReadme, repo.has_readme ? 1 : 0);
  set(Feature::kDomain, dm.assign(p.keywords));
  return v;
}

// Features for `names` (sorted output). The license dictionary is built over
// the whole snapshot.
inline std::vector<FeatureRow> derive_features(const EcosystemSnapshot& s, const DepGraph& g, const DomainModel& dm,
                                               const Date& snapshot_date, std::vector<std::string> names,
                                               std::size_t threads = 1) {
  std::sort(names.begin(), names.end());
  const auto transitive = all_transitive_counts(g, threads);
  const auto licenses = license_codes(s);
  std::vector<FeatureRow> rows(names.size());
  parallel_for(names.size(), threads, [&](std::size_t i) {
    rows[i].package = names[i];
    rows[i].values = package_features(s.package(names[i]), g, transitive, dm, licenses, snapshot_date);
  });
  return rows;
}

// Feature table joined with labels; `label` is -1 where unknown.
struct FeatureTable {
  std::vector<FeatureRow> rows;
  std::vector<int> labels;

  Dataset dataset() const {
    Dataset d;
    d.feature_names.assign(feature_names().begin(), feature_names().end());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      d.row_ids.push_back(rows[i].package);
      d.x.append_row(std::vector<double>(rows[i].values.begin(), rows[i].values.end()));
      d.y.push_back(labels[i]);
    }
    if (rows.empty()) d.x = Matrix(0, kNumFeatures);
    return d;
  }

  std::optional<std::size_t> find(std::string_view package) const {
    auto it = std::lower_bound(rows.begin(), rows.end(), package,
                               [](const FeatureRow& r, std::string_view p) { return r.package < p; });
    if (it == rows.end() || it->package != package) return std::nullopt;
    return static_cast<std::size_t>(it - rows.begin());
  }
};

inline std::string format_feature(std::size_t index, double value) {
  if (is_integer_feature(index)) return std::to_string(static_cast<std::int64_t>(value));
  return format_double(value);
}

inline void write_features_csv(std::ostream& out, const FeatureTable& t) {
  std::vector<std::string> header{"package"};
  header.insert(header.end(), feature_names().begin(), feature_names().end());
  header.push_back("label");
  write_csv_row(out, header);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    std::vector<std::string> fields{t.rows[i].package};
    for (std::size_t f = 0; f < kNumFeatures; ++f) fields.push_back(format_feature(f, t.rows[i].values[f]));
    fields.push_back(t.labels[i] < 0 ? "" : std::string(to_string(static_cast<Label>(t.labels[i]))));
    write_csv_row(out, fields);
  }
}

inline FeatureTable read_features_csv(std::istream& in) {
  CsvReader reader(in, true);
  std::vector<std::string> row;
  if (!reader.next(row)) throw Error(ErrorCode::kSchemaMismatch, "features file is empty");
  std::vector<std::string> expected{"package"};
  expected.insert(expected.end(), feature_names().begin(), feature_names().end());
  expected.push_back("label");
  if (!row.empty() && row[0].rfind("\xEF\xBB\xBF", 0) == 0) row[0].erase(0, 3);
  if (row != expected) throw Error(ErrorCode::kSchemaMismatch, "features header does not match the expected columns");
  FeatureTable t;
  while (reader.next(row)) {
    const std::string where = "features line " + std::to_string(reader.line());
    if (row.size() != expected.size()) throw Error(ErrorCode::kSchemaMismatch, where + ": wrong arity");
    FeatureRow r;
    r.package = row[0];
    for (std::size_t f = 0; f < kNumFeatures; ++f) r.values[f] = parse_double(row[f + 1]);
    int label = -1;
    if (!row.back().empty()) {
      auto l = parse_label(row.back());
      if (!l) throw Error(ErrorCode::kMalformedInput, where + ": unknown label '" + row.back() + "'");
      label = static_cast<int>(*l);
    }
    if (!t.rows.empty() && !(t.rows.back().package < r.package)) {
      throw Error(ErrorCode::kMalformedInput, where + ": packages must be unique and sorted");
    }
    t.rows.push_back(std::move(r));
    t.labels.push_back(label);
  }
  return t;
}

// Pearson correlation audit over all column pairs.
struct CorrelationPair {
  std::string a, b;
  std::optional<double> r;  // absent when either column is constant
  bool flagged = false;
  std::string keep, drop;
};

struct CorrelationReport {
  double limit = 0.7;
  std::vector<CorrelationPair> pairs;
  std::vector<std::string> constant_columns;

  Json to_json() const {
    Json j;
    j["limit"] = limit;
    j["constant_columns"] = constant_columns;
    Json flagged = Json::array();
    Json all = Json::array();
    for (const auto& p : pairs) {
      Json e;
      e["a"] = p.a;
      e["b"] = p.b;
      e["r"] = p.r ? Json(*p.r) : Json(nullptr);
      if (p.flagged) {
        e["keep"] = p.keep;
        e["drop"] = p.drop;
        flagged.push_back(e);
      }
      all.push_back(e);
    }
    j["flagged"] = flagged;
    j["pairs"] = all;
    return j;
  }
};

inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Flags pairs with |r| > limit. Within a flagged pair the column listed
// earlier in `keep_preference` is kept; otherwise the earlier column.
inline CorrelationReport correlation_audit(const Matrix& m, const std::vector<std::string>& names,
                                           const std::vector<std::string>& keep_preference = {},
                                           double limit = 0.7) {
  CorrelationReport rep;
  rep.limit = limit;
  std::vector<std::vector<double>> cols;
  std::vector<bool> constant;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    cols.push_back(m.column(c));
    const bool is_const = std::all_of(cols.back().begin(), cols.back().end(),
                                      [&](double v) { return v == cols.back().front(); });
    constant.push_back(is_const);
    if (is_const) rep.constant_columns.push_back(names[c]);
  }
  auto rank = [&](const std::string& n) {
    auto it = std::find(keep_preference.begin(), keep_preference.end(), n);
    return static_cast<std::size_t>(it - keep_preference.begin());
  };
  for (std::size_t a = 0; a < m.cols(); ++a) {
    for (std::size_t b = a + 1; b < m.cols(); ++b) {
      CorrelationPair p;
      p.a = names[a];
      p.b = names[b];
      if (!constant[a] && !constant[b]) p.r = pearson(cols[a], cols[b]);
      if (p.r && std::fabs(*p.r) > limit) {
        p.flagged = true;
        const bool keep_b = rank(p.b) < rank(p.a);
        p.keep = keep_b ? p.b : p.a;
        p.drop = keep_b ? p.a : p.b;
      }
      rep.pairs.push_back(std::move(p));
    }
  }
  return rep;
}

}  // namespace depstrat
