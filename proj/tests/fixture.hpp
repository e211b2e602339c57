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


// Small helpers for building snapshots and scratch directories in tests.
#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "depstrat/ecosystem.hpp"
#include "depstrat/semver.hpp"

namespace depstrat::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("depstrat-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Builds an in-memory snapshot. Packages get one release per entry in
// `versions`; edges reference an existing release of the dependent.
class SnapshotBuilder {
 public:
  explicit SnapshotBuilder(Date snapshot = Date{2020, 1, 12}) { s_.snapshot_date = snapshot; }

  SnapshotBuilder& package(const std::string& name, std::vector<std::pair<std::string, Date>> versions) {
    PackageRecord p;
    p.name = name;
    for (auto& [v, d] : versions) p.versions.push_back(Release{semver::parse_version(v), d});
    sort_releases(p.versions);
    p.created_at = p.versions.front().published_at;
    p.latest_version = pick_latest_version(p.versions);
    s_.packages[name] = std::move(p);
    return *this;
  }

  // Package with a single 1.0.0 release on 2015-01-01.
  SnapshotBuilder& package(const std::string& name, const std::string& version = "1.0.0") {
    return package(name, {{version, Date{2015, 1, 1}}});
  }

  SnapshotBuilder& edge(const std::string& dependent, const std::string& target, const std::string& constraint,
                        DependencyKind kind = DependencyKind::kRuntime) {
    return edge_at(dependent, semver::to_string(s_.packages.at(dependent).latest_version), target, constraint,
                   kind);
  }

  SnapshotBuilder& edge_at(const std::string& dependent, const std::string& version, const std::string& target,
                           const std::string& constraint, DependencyKind kind = DependencyKind::kRuntime) {
    s_.edges.push_back(DependencyEdge{dependent, semver::parse_version(version), target, constraint, kind});
    return *this;
  }

  PackageRecord& at(const std::string& name) { return s_.packages.at(name); }

  EcosystemSnapshot build() {
    rebuild_latest_edges(s_);
    return s_;
  }

 private:
  EcosystemSnapshot s_;
};

}  // namespace depstrat::testing
