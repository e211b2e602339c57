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
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "depstrat/csv.hpp"
#include "depstrat/date.hpp"
#include "depstrat/ecosystem.hpp"
#include "depstrat/error.hpp"
#include "depstrat/semver.hpp"

namespace depstrat {

// Counters for everything dropped, repaired or imputed while loading. Up to
// kMaxExamples offending names are kept per counter.
class IngestReport {
 public:
  static constexpr std::size_t kMaxExamples = 20;

  void count(const std::string& key, std::int64_t n = 1) { counters_[key] += n; }
  void note(const std::string& key, const std::string& example) {
    count(key);
    auto& list = examples_[key];
    if (list.size() < kMaxExamples) list.push_back(example);
  }
  void set(const std::string& key, std::int64_t value) { counters_[key] = value; }

  std::int64_t get(const std::string& key) const {
    auto it = counters_.find(key);
    return it == counters_.end() ? 0 : it->second;
  }

  Json to_json() const {
    Json j;
    j["counters"] = Json::object();
    for (const auto& [k, v] : counters_) j["counters"][k] = v;
    j["examples"] = Json::object();
    for (const auto& [k, v] : examples_) j["examples"][k] = v;
    return j;
  }

 private:
  std::map<std::string, std::int64_t> counters_;
  std::map<std::string, std::vector<std::string>> examples_;
};

namespace detail {

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

inline std::string trim_copy(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open '" + path + "'");
  return in;
}

inline std::vector<std::string> split_keywords(std::string_view field) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::size_t start = 0;
  while (start <= field.size()) {
    auto comma = field.find(',', start);
    std::string kw = lower(trim_copy(field.substr(start, comma == std::string_view::npos ? field.npos : comma - start)));
    if (!kw.empty() && seen.insert(kw).second) out.push_back(kw);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline const std::string& field_or_empty(const std::vector<std::string>& row, std::optional<std::size_t> col) {
  static const std::string kEmpty;
  return col && *col < row.size() ? row[*col] : kEmpty;
}

}  // namespace detail

// Loads the libraries.io open-data exports (projects, versions,
// dependencies), keeping NPM rows only. Malformed rows are counted in the
// report and skipped.
inline EcosystemSnapshot load_librariesio(const std::string& projects_csv, const std::string& versions_csv,
                                          const std::string& dependencies_csv, const Date& snapshot_date,
                                          IngestReport* report = nullptr) {
  IngestReport scratch;
  IngestReport& rep = report ? *report : scratch;
  EcosystemSnapshot s;
  s.snapshot_date = snapshot_date;
  auto is_npm = [](const std::string& platform) { return detail::lower(platform) == "npm"; };

  // Open all inputs first so a missing file fails before any work.
  auto projects_in = detail::open_input(projects_csv);
  auto versions_in = detail::open_input(versions_csv);
  auto deps_in = detail::open_input(dependencies_csv);

  std::vector<std::string> row;

  // Projects.
  {
    CsvReader reader(projects_in);
    if (!reader.next(row)) throw Error(ErrorCode::kSchemaMismatch, projects_csv + ": empty file");
    const CsvHeader h(row);
    const auto c_platform = h.require("Platform", projects_csv);
    const auto c_name = h.require("Name", projects_csv);
    const auto c_created = h.require("Created Timestamp", projects_csv);
    const auto c_desc = h.find("Description");
    const auto c_keywords = h.find("Keywords");
    const auto c_homepage = h.find("Homepage URL");
    const auto c_license = h.find("Licenses");
    const auto c_sourcerank = h.find("SourceRank");
    const auto c_dep_repos = h.find("Dependent Repositories Count");
    const auto c_repo_id = h.find("Repository ID");
    const auto c_repo_url = h.find("Repository URL");
    const auto c_stars = h.find("Repository Stars Count");
    const auto c_size = h.find("Repository Size");
    const auto c_issues = h.find("Repository Open Issues Count");
    const auto c_repo_license = h.find("Repository License");
    const auto c_readme = h.find("Repository Readme filename");
    const bool has_repo_columns = c_stars || c_size || c_issues || c_repo_license || c_readme;

    while (reader.next(row)) {
      rep.count("projects_rows");
      if (row.size() != h.size()) {
        rep.note("projects_malformed", "line " + std::to_string(reader.line()));
        continue;
      }
      if (!is_npm(row[c_platform])) {
        rep.count("projects_other_platform");
        continue;
      }
      PackageRecord p;
      p.name = detail::trim_copy(row[c_name]);
      if (p.name.empty()) {
        rep.note("projects_malformed", "line " + std::to_string(reader.line()));
        continue;
      }
      try {
        p.created_at = parse_date(row[c_created]);
      } catch (const Error&) {
        rep.note("projects_bad_created_timestamp", p.name);
        continue;
      }
      p.has_description = !detail::trim_copy(detail::field_or_empty(row, c_desc)).empty();
      p.keywords = detail::split_keywords(detail::field_or_empty(row, c_keywords));
      p.has_homepage = !detail::trim_copy(detail::field_or_empty(row, c_homepage)).empty();
      p.license_text = detail::trim_copy(detail::field_or_empty(row, c_license));
      if (auto v = parse_int(detail::field_or_empty(row, c_sourcerank))) {
        p.sourcerank = *v;
      } else {
        rep.count("projects_missing_sourcerank");
      }
      if (auto v = parse_int(detail::field_or_empty(row, c_dep_repos))) {
        p.dependent_repositories = *v;
      } else {
        rep.count("projects_missing_dependent_repositories");
      }
      const bool has_repo = !detail::trim_copy(detail::field_or_empty(row, c_repo_id)).empty() ||
                            !detail::trim_copy(detail::field_or_empty(row, c_repo_url)).empty();
      if (has_repo && has_repo_columns) {
        RepoMetadata r;
        auto non_negative = [](std::optional<std::int64_t> v) {
          return v && *v >= 0 ? v : std::nullopt;
        };
        r.stars = non_negative(parse_int(detail::field_or_empty(row, c_stars)));
        r.size_kb = non_negative(parse_int(detail::field_or_empty(row, c_size)));
        r.open_issues = non_negative(parse_int(detail::field_or_empty(row, c_issues)));
        r.has_license_file = !detail::trim_copy(detail::field_or_empty(row, c_repo_license)).empty();
        r.has_readme = !detail::trim_copy(detail::field_or_empty(row, c_readme)).empty();
        p.repo = r;
      }
      const std::string name = p.name;
      if (!s.packages.emplace(name, std::move(p)).second) rep.note("projects_duplicate", name);
    }
  }

  // Versions.
  {
    CsvReader reader(versions_in);
    if (!reader.next(row)) throw Error(ErrorCode::kSchemaMismatch, versions_csv + ": empty file");
    const CsvHeader h(row);
    const auto c_platform = h.require("Platform", versions_csv);
    const auto c_project = h.require("Project Name", versions_csv);
    const auto c_number = h.require("Number", versions_csv);
    const auto c_published = h.require("Published Timestamp", versions_csv);
    while (reader.next(row)) {
      rep.count("versions_rows");
      if (row.size() != h.size()) {
        rep.note("versions_malformed", "line " + std::to_string(reader.line()));
        continue;
      }
      if (!is_npm(row[c_platform])) continue;
      auto it = s.packages.find(detail::trim_copy(row[c_project]));
      if (it == s.packages.end()) {
        rep.note("versions_unknown_project", row[c_project]);
        continue;
      }
      Release r;
      try {
        r.version = semver::parse_version(row[c_number]);
        r.published_at = parse_date(row[c_published]);
      } catch (const Error&) {
        rep.note("versions_malformed", it->first + "@" + row[c_number]);
        continue;
      }
      if (r.published_at > snapshot_date) {
        rep.count("versions_after_snapshot");
        continue;
      }
      it->second.versions.push_back(std::move(r));
    }
  }

  // Finalize packages: sort releases, derive latest, enforce date order.
  for (auto it = s.packages.begin(); it != s.packages.end();) {
    PackageRecord& p = it->second;
    if (p.versions.empty()) {
      rep.note("packages_without_versions", p.name);
      it = s.packages.erase(it);
      continue;
    }
    sort_releases(p.versions);
    // Duplicate version numbers keep their earliest publish date.
    std::vector<Release> unique;
    std::set<std::string> seen_numbers;
    for (auto& r : p.versions) {
      if (!seen_numbers.insert(semver::to_string(r.version)).second) {
        rep.count("versions_duplicate");
      } else {
        unique.push_back(std::move(r));
      }
    }
    p.versions = std::move(unique);
    p.latest_version = pick_latest_version(p.versions);
    if (p.created_at > p.versions.front().published_at) {
      rep.note("packages_created_after_first_release", p.name);
      p.created_at = p.versions.front().published_at;
    }
    if (p.created_at > snapshot_date) p.created_at = snapshot_date;
    ++it;
  }

  std::unordered_map<std::string, std::set<std::string>> known_versions;
  for (const auto& [name, p] : s.packages) {
    auto& set = known_versions[name];
    for (const auto& r : p.versions) set.insert(semver::to_string(r.version));
  }

  // Dependencies.
  {
    CsvReader reader(deps_in);
    if (!reader.next(row)) throw Error(ErrorCode::kSchemaMismatch, dependencies_csv + ": empty file");
    const CsvHeader h(row);
    const auto c_platform = h.require("Platform", dependencies_csv);
    const auto c_project = h.require("Project Name", dependencies_csv);
    const auto c_version = h.require("Version Number", dependencies_csv);
    const auto c_dep_name = h.require("Dependency Name", dependencies_csv);
    const auto c_kind = h.require("Dependency Kind", dependencies_csv);
    const auto c_req = h.require("Dependency Requirements", dependencies_csv);
    const auto c_dep_platform = h.find("Dependency Platform");
    const auto c_optional = h.find("Optional Dependency");
    while (reader.next(row)) {
      rep.count("dependencies_rows");
      if (row.size() != h.size()) {
        rep.note("dependencies_malformed", "line " + std::to_string(reader.line()));
        continue;
      }
      if (!is_npm(row[c_platform])) continue;
      if (c_dep_platform && !row[*c_dep_platform].empty() && !is_npm(row[*c_dep_platform])) {
        rep.count("dependencies_other_platform_target");
        continue;
      }
      DependencyEdge e;
      e.dependent = detail::trim_copy(row[c_project]);
      e.target = detail::trim_copy(row[c_dep_name]);
      e.constraint_text = detail::trim_copy(row[c_req]);
      auto kind = parse_dependency_kind(detail::trim_copy(row[c_kind]));
      if (!kind) {
        rep.note("dependencies_unknown_kind", row[c_kind]);
        continue;
      }
      e.kind = *kind;
      if (c_optional && detail::lower(detail::trim_copy(row[*c_optional])) == "true") {
        e.kind = DependencyKind::kOptional;
      }
      auto dep = s.packages.find(e.dependent);
      if (dep == s.packages.end()) {
        rep.note("dependencies_unknown_dependent", e.dependent);
        continue;
      }
      try {
        e.dependent_version = semver::parse_version(row[c_version]);
      } catch (const Error&) {
        rep.note("dependencies_malformed", e.dependent + "@" + row[c_version]);
        continue;
      }
      if (!known_versions[e.dependent].count(semver::to_string(e.dependent_version))) {
        rep.note("dependencies_unknown_version", e.dependent + "@" + row[c_version]);
        continue;
      }
      if (e.dependent == e.target) {
        rep.note("dependencies_self_edge", e.dependent);
        continue;
      }
      if (!s.packages.count(e.target)) {
        rep.note("dependencies_dangling_target", e.target);
        continue;
      }
      s.edges.push_back(std::move(e));
    }
  }

  rebuild_latest_edges(s);
  rep.set("packages_loaded", static_cast<std::int64_t>(s.packages.size()));
  rep.set("edges_loaded", static_cast<std::int64_t>(s.edges.size()));
  return s;
}

struct FilterOptions {
  // Anchored, case-sensitive; each matches "<stem>-<digits>".
  std::vector<std::string> spam_stems = {"all-packages", "wowdude", "neat"};
  std::int64_t min_dependents = 2;
};

// Reads spam stems, one per line; blank lines and '#' comments ignored.
inline std::vector<std::string> load_denylist(const std::string& path) {
  auto in = detail::open_input(path);
  std::vector<std::string> stems;
  std::string line;
  while (std::getline(in, line)) {
    line = detail::trim_copy(line);
    if (line.empty() || line.front() == '#') continue;
    stems.push_back(line);
  }
  return stems;
}

inline std::regex spam_pattern(const std::vector<std::string>& stems) {
  std::string alternation;
  for (const auto& stem : stems) {
    std::string escaped;
    for (char c : stem) {
      if (std::string_view(".^$|()[]{}*+?\\").find(c) != std::string_view::npos) escaped += '\\';
      escaped += c;
    }
    if (!alternation.empty()) alternation += '|';
    alternation += escaped;
  }
  if (alternation.empty()) return std::regex("(?!)");
  return std::regex("^(" + alternation + ")-[0-9]+$");
}

// Drops non-runtime edges and spam packages, then marks the labeled
// population: packages with at least `min_dependents` runtime dependents
// among latest-version edges. Excluded packages stay in the snapshot as
// dependents.
inline EcosystemSnapshot apply_filters(EcosystemSnapshot s, const FilterOptions& options = {},
                                       IngestReport* report = nullptr) {
  IngestReport scratch;
  IngestReport& rep = report ? *report : scratch;

  const auto before = s.edges.size();
  std::erase_if(s.edges, [](const DependencyEdge& e) { return e.kind != DependencyKind::kRuntime; });
  rep.count("filter_non_runtime_edges", static_cast<std::int64_t>(before - s.edges.size()));

  const std::regex spam = spam_pattern(options.spam_stems);
  std::set<std::string> removed;
  for (auto it = s.packages.begin(); it != s.packages.end();) {
    if (std::regex_match(it->first, spam)) {
      removed.insert(it->first);
      rep.note("filter_spam_packages", it->first);
      it = s.packages.erase(it);
    } else {
      ++it;
    }
  }
  if (!removed.empty()) {
    const auto n = s.edges.size();
    std::erase_if(s.edges, [&](const DependencyEdge& e) {
      return removed.count(e.dependent) > 0 || removed.count(e.target) > 0;
    });
    rep.count("filter_spam_edges", static_cast<std::int64_t>(n - s.edges.size()));
  }

  rebuild_latest_edges(s);
  std::unordered_map<std::string, std::int64_t> dependents;
  for (const auto& e : s.latest_edges) ++dependents[e.target];
  std::int64_t labeled = 0;
  for (auto& [name, p] : s.packages) {
    auto it = dependents.find(name);
    p.labeled = it != dependents.end() && it->second >= options.min_dependents;
    labeled += p.labeled ? 1 : 0;
  }
  rep.set("labeled_population", labeled);
  s.filtered = true;
  return s;
}

struct ImputationReport {
  std::int64_t stars = 0;
  std::int64_t open_issues = 0;
  std::int64_t size_kb = 0;
  std::int64_t size_kb_median = 0;
  std::int64_t missing_repo = 0;

  Json to_json() const {
    Json j;
    j["repository_stars"] = stars;
    j["repository_open_issues"] = open_issues;
    j["repository_size_kb"] = size_kb;
    j["repository_size_kb_median"] = size_kb_median;
    j["packages_without_repository"] = missing_repo;
    return j;
  }
};

// Median of the present values; the mean of the two middle values is
// truncated toward zero for even counts. Zero when nothing is present.
inline std::int64_t integer_median(std::vector<std::int64_t> values) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2;
}

// Missing counts whose natural default is zero become zero; a missing
// repository size becomes the median of the present sizes.
inline EcosystemSnapshot impute_missing(EcosystemSnapshot s, ImputationReport* report = nullptr) {
  ImputationReport scratch;
  ImputationReport& rep = report ? *report : scratch;
  std::vector<std::int64_t> sizes;
  for (const auto& [name, p] : s.packages) {
    if (p.repo && p.repo->size_kb) sizes.push_back(*p.repo->size_kb);
  }
  rep.size_kb_median = integer_median(std::move(sizes));
  for (auto& [name, p] : s.packages) {
    if (!p.repo) {
      p.repo = RepoMetadata{};
      ++rep.missing_repo;
    }
    RepoMetadata& r = *p.repo;
    if (!r.stars) {
      r.stars = 0;
      ++rep.stars;
    }
    if (!r.open_issues) {
      r.open_issues = 0;
      ++rep.open_issues;
    }
    if (!r.size_kb) {
      r.size_kb = rep.size_kb_median;
      ++rep.size_kb;
    }
  }
  s.imputed = true;
  return s;
}

}  // namespace depstrat
