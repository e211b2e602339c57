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
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "depstrat/date.hpp"
#include "depstrat/error.hpp"
#include "depstrat/semver.hpp"
#include "json.hpp"

namespace depstrat {

using Json = nlohmann::ordered_json;

struct RepoMetadata {
  std::optional<std::int64_t> stars;
  std::optional<std::int64_t> size_kb;
  std::optional<std::int64_t> open_issues;
  bool has_license_file = false;
  bool has_readme = false;

  friend bool operator==(const RepoMetadata&, const RepoMetadata&) = default;
};

struct Release {
  semver::Version version;
  Date published_at;
};

struct PackageRecord {
  std::string name;
  Date created_at;
  std::vector<Release> versions;  // sorted by publish date, then precedence
  semver::Version latest_version;
  std::vector<std::string> keywords;
  bool has_description = false;
  bool has_homepage = false;
  std::string license_text;
  std::int64_t sourcerank = 0;
  std::optional<RepoMetadata> repo;
  std::int64_t dependent_repositories = 0;
  // Member of the labeled population (enough runtime dependents).
  bool labeled = false;
};

enum class DependencyKind { kRuntime, kDevelopment, kOptional };

inline std::string_view to_string(DependencyKind kind) {
  switch (kind) {
    case DependencyKind::kRuntime: return "runtime";
    case DependencyKind::kDevelopment: return "development";
    case DependencyKind::kOptional: return "optional";
  }
  return "?";
}

inline std::optional<DependencyKind> parse_dependency_kind(std::string_view text) {
  std::string k(text);
  std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) { return std::tolower(c); });
  if (k == "runtime" || k == "normal" || k == "dependencies" || k == "production") {
    return DependencyKind::kRuntime;
  }
  if (k == "development" || k == "dev" || k == "devdependencies") return DependencyKind::kDevelopment;
  if (k == "optional" || k == "optionaldependencies") return DependencyKind::kOptional;
  return std::nullopt;
}

struct DependencyEdge {
  std::string dependent;
  semver::Version dependent_version;
  std::string target;
  std::string constraint_text;
  DependencyKind kind = DependencyKind::kRuntime;
};

struct EcosystemSnapshot {
  Date snapshot_date;
  std::map<std::string, PackageRecord> packages;
  // Every version's edges, used for evolution analysis.
  std::vector<DependencyEdge> edges;
  // Edges of each dependent's latest version; one per (dependent, target),
  // sorted by (dependent, target). Rebuilt by rebuild_latest_edges().
  std::vector<DependencyEdge> latest_edges;
  bool filtered = false;
  bool imputed = false;

  const PackageRecord& package(std::string_view name) const {
    auto it = packages.find(std::string(name));
    if (it == packages.end()) {
      throw Error(ErrorCode::kUnknownPackage, "package '" + std::string(name) + "' not in snapshot");
    }
    return it->second;
  }
};

// Highest non-prerelease version, falling back to the highest overall.
inline semver::Version pick_latest_version(const std::vector<Release>& versions) {
  const Release* best_release = nullptr;
  const Release* best_any = nullptr;
  for (const auto& r : versions) {
    if (!best_any || r.version > best_any->version) best_any = &r;
    if (!r.version.is_prerelease() && (!best_release || r.version > best_release->version)) {
      best_release = &r;
    }
  }
  if (best_release) return best_release->version;
  if (best_any) return best_any->version;
  throw Error(ErrorCode::kMalformedInput, "package without versions");
}

inline void sort_releases(std::vector<Release>& versions) {
  std::stable_sort(versions.begin(), versions.end(), [](const Release& a, const Release& b) {
    if (a.published_at != b.published_at) return a.published_at < b.published_at;
    return a.version < b.version;
  });
}

inline void rebuild_latest_edges(EcosystemSnapshot& s) {
  auto rank = [](DependencyKind k) {
    return k == DependencyKind::kRuntime ? 0 : (k == DependencyKind::kOptional ? 1 : 2);
  };
  std::map<std::pair<std::string, std::string>, const DependencyEdge*> chosen;
  for (const auto& e : s.edges) {
    auto it = s.packages.find(e.dependent);
    if (it == s.packages.end() || !(e.dependent_version == it->second.latest_version)) continue;
    auto [slot, inserted] = chosen.try_emplace({e.dependent, e.target}, &e);
    if (!inserted && rank(e.kind) < rank(slot->second->kind)) slot->second = &e;
  }
  s.latest_edges.clear();
  s.latest_edges.reserve(chosen.size());
  for (const auto& [key, edge] : chosen) s.latest_edges.push_back(*edge);
}

// ---------------------------------------------------------------------------
// Normalized newline-delimited JSON format: a meta line, then one line per
// package (sorted by name), then one line per edge (in stored order).

inline constexpr std::string_view kEcosystemFormat = "depstrat-ecosystem";
inline constexpr int kEcosystemFormatVersion = 1;

namespace detail {

inline Json optional_int(const std::optional<std::int64_t>& v) {
  return v ? Json(*v) : Json(nullptr);
}

inline std::optional<std::int64_t> read_optional_int(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::int64_t>();
}

}  // namespace detail

inline Json package_to_json(const PackageRecord& p) {
  Json versions = Json::array();
  for (const auto& r : p.versions) {
    versions.push_back(Json::array({semver::to_string(r.version), to_string(r.published_at)}));
  }
  Json repo = nullptr;
  if (p.repo) {
    repo = Json::object();
    repo["stars"] = detail::optional_int(p.repo->stars);
    repo["size_kb"] = detail::optional_int(p.repo->size_kb);
    repo["open_issues"] = detail::optional_int(p.repo->open_issues);
    repo["has_license_file"] = p.repo->has_license_file;
    repo["has_readme"] = p.repo->has_readme;
  }
  Json j;
  j["type"] = "package";
  j["name"] = p.name;
  j["created_at"] = to_string(p.created_at);
  j["latest_version"] = semver::to_string(p.latest_version);
  j["versions"] = std::move(versions);
  j["keywords"] = p.keywords;
  j["has_description"] = p.has_description;
  j["has_homepage"] = p.has_homepage;
  j["license"] = p.license_text;
  j["sourcerank"] = p.sourcerank;
  j["dependent_repositories"] = p.dependent_repositories;
  j["repo"] = std::move(repo);
  j["labeled"] = p.labeled;
  return j;
}

inline PackageRecord package_from_json(const Json& j) {
  PackageRecord p;
  p.name = j.at("name").get<std::string>();
  p.created_at = parse_date(j.at("created_at").get<std::string>());
  p.latest_version = semver::parse_version(j.at("latest_version").get<std::string>());
  for (const auto& r : j.at("versions")) {
    p.versions.push_back(Release{semver::parse_version(r.at(0).get<std::string>()),
                                 parse_date(r.at(1).get<std::string>())});
  }
  p.keywords = j.at("keywords").get<std::vector<std::string>>();
  p.has_description = j.at("has_description").get<bool>();
  p.has_homepage = j.at("has_homepage").get<bool>();
  p.license_text = j.at("license").get<std::string>();
  p.sourcerank = j.at("sourcerank").get<std::int64_t>();
  p.dependent_repositories = j.at("dependent_repositories").get<std::int64_t>();
  const Json& repo = j.at("repo");
  if (!repo.is_null()) {
    RepoMetadata r;
    r.stars = detail::read_optional_int(repo.at("stars"));
    r.size_kb = detail::read_optional_int(repo.at("size_kb"));
    r.open_issues = detail::read_optional_int(repo.at("open_issues"));
    r.has_license_file = repo.at("has_license_file").get<bool>();
    r.has_readme = repo.at("has_readme").get<bool>();
    p.repo = r;
  }
  p.labeled = j.at("labeled").get<bool>();
  return p;
}

inline Json edge_to_json(const DependencyEdge& e) {
  Json j;
  j["type"] = "edge";
  j["dependent"] = e.dependent;
  j["version"] = semver::to_string(e.dependent_version);
  j["target"] = e.target;
  j["constraint"] = e.constraint_text;
  j["kind"] = std::string(to_string(e.kind));
  return j;
}

inline DependencyEdge edge_from_json(const Json& j) {
  DependencyEdge e;
  e.dependent = j.at("dependent").get<std::string>();
  e.dependent_version = semver::parse_version(j.at("version").get<std::string>());
  e.target = j.at("target").get<std::string>();
  e.constraint_text = j.at("constraint").get<std::string>();
  auto kind = parse_dependency_kind(j.at("kind").get<std::string>());
  if (!kind) throw Error(ErrorCode::kMalformedInput, "unknown edge kind");
  e.kind = *kind;
  return e;
}

inline void write_ndjson(std::ostream& out, const EcosystemSnapshot& s, const Json& provenance = nullptr) {
  Json meta;
  meta["type"] = "meta";
  meta["format"] = std::string(kEcosystemFormat);
  meta["version"] = kEcosystemFormatVersion;
  meta["snapshot_date"] = to_string(s.snapshot_date);
  meta["filtered"] = s.filtered;
  meta["imputed"] = s.imputed;
  meta["packages"] = s.packages.size();
  meta["edges"] = s.edges.size();
  if (!provenance.is_null()) meta["provenance"] = provenance;
  out << meta.dump() << '\n';
  for (const auto& [name, p] : s.packages) out << package_to_json(p).dump() << '\n';
  for (const auto& e : s.edges) out << edge_to_json(e).dump() << '\n';
}

inline EcosystemSnapshot read_ndjson(std::istream& in) {
  EcosystemSnapshot s;
  std::string line;
  std::size_t line_no = 0;
  bool saw_meta = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "meta") {
        if (j.at("format").get<std::string>() != kEcosystemFormat ||
            j.at("version").get<int>() != kEcosystemFormatVersion) {
          throw Error(ErrorCode::kSchemaMismatch, "not a depstrat ecosystem file");
        }
        s.snapshot_date = parse_date(j.at("snapshot_date").get<std::string>());
        s.filtered = j.at("filtered").get<bool>();
        s.imputed = j.at("imputed").get<bool>();
        saw_meta = true;
      } else if (type == "package") {
        PackageRecord p = package_from_json(j);
        std::string name = p.name;
        s.packages.emplace(std::move(name), std::move(p));
      } else if (type == "edge") {
        s.edges.push_back(edge_from_json(j));
      } else {
        throw Error(ErrorCode::kMalformedInput, "unknown record type '" + type + "'");
      }
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kMalformedInput,
                  "ecosystem line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!saw_meta) throw Error(ErrorCode::kSchemaMismatch, "ecosystem file has no meta line");
  rebuild_latest_edges(s);
  return s;
}

inline EcosystemSnapshot read_ndjson_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open '" + path + "'");
  return read_ndjson(in);
}

}  // namespace depstrat
