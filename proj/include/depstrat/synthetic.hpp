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
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "depstrat/csv.hpp"
#include "depstrat/date.hpp"
#include "depstrat/ecosystem.hpp"
#include "depstrat/labeler.hpp"
#include "depstrat/rng.hpp"
#include "depstrat/semver.hpp"

namespace depstrat {

// Synthetic ecosystem whose package labels follow a known rule:
//   pre-1.0.0                           -> permissive
//   post-1.0.0, fewer than 5 dependents -> unspecialized
//   post-1.0.0, age <= 45 months        -> balanced
//   post-1.0.0, older                   -> restrictive
// A fraction of targets receive a different feasible label. Every other
// package attribute is noise.
struct SynthOptions {
  std::size_t targets = 2000;
  std::size_t consumers = 1500;
  std::size_t utilities = 20;
  double post_share = 0.655;
  double label_noise = 0.10;
  int max_age_months = 120;
  int young_months = 45;
  std::int64_t min_specialized_dependents = 5;
  std::int64_t max_dependents = 150;
  Date snapshot_date{2020, 1, 12};
  bool with_spam = true;
  bool with_dev_edges = true;
  std::uint64_t seed = 42;
};

struct SyntheticEcosystem {
  EcosystemSnapshot snapshot;             // unfiltered, not imputed
  std::map<std::string, Label> intended;  // label the constraints were drawn for
  std::map<std::string, Label> rule;      // label of the rule before noise
};

inline Label planted_rule(bool post, std::int64_t dependents, int age_months, const SynthOptions& opt = {}) {
  if (!post) return Label::kPermissive;
  if (dependents < opt.min_specialized_dependents) return Label::kUnspecialized;
  return age_months <= opt.young_months ? Label::kBalanced : Label::kRestrictive;
}

namespace detail {

inline std::string numbered(const char* prefix, std::size_t i, int width) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s-%0*zu", prefix, width, i);
  return buf;
}

inline Date add_days(const Date& d, std::int64_t days) { return civil_from_days(days_from_civil(d) + days); }

inline std::string pick(const std::vector<std::string>& options, Rng& rng) {
  return options[uniform_index(rng, options.size())];
}

// A constraint on a package whose latest version is `v` that classifies as `s`.
inline std::string constraint_for(UpdateStrategy s, const semver::Version& v, Rng& rng) {
  const std::string M = std::to_string(v.major), m = std::to_string(v.minor), p = std::to_string(v.patch);
  const std::string full = M + "." + m + "." + p;
  if (v.major >= 1) {
    switch (s) {
      case UpdateStrategy::kBalanced: return pick({"^" + full, M + ".x", M + ".x.x", "^" + M + ".0.0", M}, rng);
      case UpdateStrategy::kRestrictive: return pick({"~" + full, M + "." + m + ".x", full, "=" + full}, rng);
      case UpdateStrategy::kPermissive: return pick({"*", ">=" + full, "latest", ">=" + M + ".0.0", ""}, rng);
    }
  }
  switch (s) {
    case UpdateStrategy::kBalanced: return full;
    case UpdateStrategy::kPermissive: return pick({"^" + full, "~" + full, M + "." + m + ".x", ">=" + full}, rng);
    case UpdateStrategy::kRestrictive: break;
  }
  throw Error(ErrorCode::kInternal, "no restrictive constraint exists below 1.0.0");
}

inline std::vector<UpdateStrategy> strategies_for(Label label, bool post, std::int64_t k, Rng& rng) {
  const std::vector<UpdateStrategy> feasible =
      post ? std::vector<UpdateStrategy>{UpdateStrategy::kBalanced, UpdateStrategy::kRestrictive,
                                         UpdateStrategy::kPermissive}
           : std::vector<UpdateStrategy>{UpdateStrategy::kBalanced, UpdateStrategy::kPermissive};
  std::vector<UpdateStrategy> out;
  if (label == Label::kUnspecialized) {
    // No strategy may exceed half: deal round-robin from a random start.
    const std::size_t start = uniform_index(rng, feasible.size());
    const std::size_t width = (k % 2 == 0) ? 2 : feasible.size();
    for (std::int64_t i = 0; i < k; ++i) out.push_back(feasible[(start + i % width) % feasible.size()]);
  } else {
    UpdateStrategy major = UpdateStrategy::kBalanced;
    if (label == Label::kPermissive) major = UpdateStrategy::kPermissive;
    if (label == Label::kRestrictive) major = UpdateStrategy::kRestrictive;
    const double agreement = 0.6 + 0.4 * uniform01(rng);
    auto n_major = static_cast<std::int64_t>(std::ceil(agreement * static_cast<double>(k)));
    n_major = std::clamp<std::int64_t>(n_major, k / 2 + 1, k);
    for (std::int64_t i = 0; i < n_major; ++i) out.push_back(major);
    std::vector<UpdateStrategy> others;
    for (auto s : feasible) {
      if (s != major) others.push_back(s);
    }
    for (std::int64_t i = n_major; i < k; ++i) out.push_back(others[uniform_index(rng, others.size())]);
  }
  shuffle(out, rng);
  return out;
}

inline const std::vector<std::vector<std::string>>& topics() {
  static const std::vector<std::vector<std::string>> kTopics = {
      {"react", "component", "ui", "jsx", "hooks"},
      {"express", "middleware", "http", "server", "router"},
      {"cli", "command", "terminal", "args", "prompt"},
      {"test", "mocha", "assert", "mock", "coverage"},
      {"webpack", "loader", "plugin", "bundle", "build"},
      {"string", "format", "parse", "text", "unicode"},
      {"array", "util", "lodash", "collection", "functional"},
      {"stream", "buffer", "pipe", "transform", "io"},
      {"promise", "async", "callback", "flow", "control"},
      {"css", "style", "sass", "postcss", "theme"},
      {"database", "sql", "orm", "query", "mongo"},
      {"crypto", "hash", "security", "random", "token"},
  };
  return kTopics;
}

}  // namespace detail

inline SyntheticEcosystem generate_synthetic(const SynthOptions& opt = {}) {
  Rng rng(derive_seed(opt.seed, "synthetic"));
  SyntheticEcosystem out;
  EcosystemSnapshot& s = out.snapshot;
  s.snapshot_date = opt.snapshot_date;
  const YearMonth snap_month = YearMonth::of(opt.snapshot_date);
  const std::vector<std::string> licenses = {"MIT", "ISC", "Apache-2.0", "BSD-3-Clause", "mit", ""};

  auto noise_attributes = [&](PackageRecord& p) {
    const auto& topic = detail::topics()[uniform_index(rng, detail::topics().size())];
    const std::size_t start = uniform_index(rng, 2);
    const std::size_t count = 2 + uniform_index(rng, 3);
    for (std::size_t i = 0; i < count && start + i < topic.size(); ++i) p.keywords.push_back(topic[start + i]);
    if (uniform01(rng) < 0.15) p.keywords.clear();
    p.has_description = uniform01(rng) < 0.9;
    p.has_homepage = uniform01(rng) < 0.7;
    p.license_text = licenses[uniform_index(rng, licenses.size())];
    p.sourcerank = static_cast<std::int64_t>(uniform_index(rng, 30));
    p.dependent_repositories = static_cast<std::int64_t>(uniform_index(rng, 500));
    if (uniform01(rng) < 0.9) {
      RepoMetadata r;
      if (uniform01(rng) < 0.9) r.stars = static_cast<std::int64_t>(uniform_index(rng, 5000));
      if (uniform01(rng) < 0.9) r.size_kb = static_cast<std::int64_t>(10 + uniform_index(rng, 20000));
      if (uniform01(rng) < 0.9) r.open_issues = static_cast<std::int64_t>(uniform_index(rng, 200));
      r.has_license_file = uniform01(rng) < 0.8;
      r.has_readme = uniform01(rng) < 0.95;
      p.repo = r;
    }
  };

  auto single_release = [&](PackageRecord& p, const semver::Version& v) {
    const int age = 1 + static_cast<int>(uniform_index(rng, opt.max_age_months));
    const YearMonth ym = YearMonth::from_index(snap_month.index() - age);
    p.created_at = Date{ym.year, ym.month, 1 + static_cast<int>(uniform_index(rng, 28))};
    p.versions = {Release{v, p.created_at}};
    p.latest_version = v;
  };

  // Utilities every target may depend on.
  std::vector<std::string> utilities;
  for (std::size_t i = 0; i < opt.utilities; ++i) {
    PackageRecord p;
    p.name = detail::numbered("util", i, 3);
    single_release(p, semver::make_version(1, 0, 0));
    noise_attributes(p);
    utilities.push_back(p.name);
    s.packages.emplace(p.name, std::move(p));
  }

  // Consumers: one release each, edges filled in below.
  std::vector<std::string> consumers;
  for (std::size_t i = 0; i < opt.consumers; ++i) {
    PackageRecord p;
    p.name = detail::numbered("app", i, 4);
    single_release(p, semver::make_version(1, 0, 0));
    noise_attributes(p);
    consumers.push_back(p.name);
    s.packages.emplace(p.name, std::move(p));
  }
  auto add_edge = [&](const std::string& from, const std::string& to, const std::string& constraint,
                      DependencyKind kind) {
    s.edges.push_back(DependencyEdge{from, s.packages.at(from).latest_version, to, constraint, kind});
  };

  const double log_min = std::log(2.0), log_max = std::log(static_cast<double>(opt.max_dependents) + 1.0);
  std::vector<std::string> target_names;
  for (std::size_t i = 0; i < opt.targets; ++i) {
    PackageRecord p;
    p.name = detail::numbered("pkg", i, 4);
    const bool post = uniform01(rng) < opt.post_share;
    const int age = 1 + static_cast<int>(uniform_index(rng, opt.max_age_months));
    const YearMonth created_month = YearMonth::from_index(snap_month.index() - age);
    p.created_at = Date{created_month.year, created_month.month, 1 + static_cast<int>(uniform_index(rng, 28))};

    const std::size_t releases = 1 + uniform_index(rng, 30);
    const std::int64_t span = std::max<std::int64_t>(0, days_between(p.created_at, opt.snapshot_date));
    std::vector<Date> dates{p.created_at};
    for (std::size_t r = 1; r < releases; ++r) {
      dates.push_back(detail::add_days(p.created_at, static_cast<std::int64_t>(uniform_index(rng, span + 1))));
    }
    std::sort(dates.begin(), dates.end());
    const std::size_t stable_at = post ? uniform_index(rng, releases) : releases;
    semver::Version v = semver::make_version(0, 1, 0);
    for (std::size_t r = 0; r < releases; ++r) {
      if (r == stable_at) {
        v = semver::make_version(1, 0, 0);
      } else if (r > 0) {
        const double u = uniform01(rng);
        if (v.major >= 1 && u < 0.05) {
          v = semver::make_version(v.major + 1, 0, 0);
        } else if (u < 0.35) {
          v = semver::make_version(v.major, v.minor + 1, 0);
        } else {
          v = semver::make_version(v.major, v.minor, v.patch + 1);
        }
      }
      p.versions.push_back(Release{v, dates[r]});
    }
    p.latest_version = pick_latest_version(p.versions);
    noise_attributes(p);

    auto k = static_cast<std::int64_t>(std::floor(std::exp(log_min + (log_max - log_min) * uniform01(rng))));
    k = std::clamp<std::int64_t>(k, 2, static_cast<std::int64_t>(opt.consumers));
    const Label rule = planted_rule(post, k, age, opt);
    Label label = rule;
    if (uniform01(rng) < opt.label_noise) {
      std::vector<Label> alternatives;
      for (Label l : kLabelOrder) {
        if (l != rule && (post || l != Label::kRestrictive)) alternatives.push_back(l);
      }
      label = alternatives[uniform_index(rng, alternatives.size())];
    }
    if (label == Label::kUnspecialized && !post && k % 2 == 1) {
      k = k + 1 <= static_cast<std::int64_t>(opt.consumers) ? k + 1 : k - 1;
    }

    // Distinct consumers by a partial Fisher-Yates pass over the pool.
    std::vector<std::size_t> pool(consumers.size());
    for (std::size_t c = 0; c < pool.size(); ++c) pool[c] = c;
    for (std::int64_t c = 0; c < k; ++c) {
      const std::size_t j =
          static_cast<std::size_t>(c) + uniform_index(rng, pool.size() - static_cast<std::size_t>(c));
      std::swap(pool[c], pool[j]);
    }
    const auto strategies = detail::strategies_for(label, post, k, rng);
    const std::string name = p.name;
    const semver::Version latest = p.latest_version;
    s.packages.emplace(name, std::move(p));
    for (std::int64_t c = 0; c < k; ++c) {
      add_edge(consumers[pool[c]], name, detail::constraint_for(strategies[c], latest, rng), DependencyKind::kRuntime);
    }
    if (opt.with_dev_edges && uniform01(rng) < 0.3) {
      add_edge(consumers[pool[k % static_cast<std::int64_t>(pool.size())]], name, "*", DependencyKind::kDevelopment);
      add_edge(consumers[pool[(k + 1) % static_cast<std::int64_t>(pool.size())]], name, "latest",
               DependencyKind::kOptional);
    }
    const std::size_t n_utils = uniform_index(rng, 4);
    for (std::size_t u = 0; u < n_utils && !utilities.empty(); ++u) {
      add_edge(name, utilities[uniform_index(rng, utilities.size())], "^1.0.0", DependencyKind::kRuntime);
    }
    out.intended.emplace(name, label);
    out.rule.emplace(name, rule);
    target_names.push_back(name);
  }

  if (opt.with_spam) {
    for (const char* stem : {"wowdude", "all-packages"}) {
      PackageRecord p;
      p.name = std::string(stem) + "-1";
      single_release(p, semver::make_version(1, 0, 0));
      s.packages.emplace(p.name, p);
      for (std::size_t t = 0; t < target_names.size(); t += 7) {
        add_edge(p.name, target_names[t], "*", DependencyKind::kRuntime);
      }
    }
  }

  // A target may draw the same utility twice; keep one row per
  // (dependent, target, kind).
  std::sort(s.edges.begin(), s.edges.end(), [](const DependencyEdge& a, const DependencyEdge& b) {
    return std::tie(a.dependent, a.target, a.kind) < std::tie(b.dependent, b.target, b.kind);
  });
  s.edges.erase(std::unique(s.edges.begin(), s.edges.end(),
                            [](const DependencyEdge& a, const DependencyEdge& b) {
                              return a.dependent == b.dependent && a.target == b.target && a.kind == b.kind;
                            }),
                s.edges.end());
  rebuild_latest_edges(s);
  return out;
}

// Writes projects, versions and dependencies CSVs in the libraries.io layout.
inline void write_librariesio(const EcosystemSnapshot& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + (dir / name).string());
    return f;
  };
  auto stamp = [](const Date& d) { return to_string(d) + " 00:00:00 UTC"; };
  auto opt_int = [](const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : std::string(); };
  {
    auto f = open("projects.csv");
    write_csv_row(f, {"ID", "Platform", "Name", "Created Timestamp", "Description", "Keywords", "Homepage URL",
                      "Licenses", "SourceRank", "Dependent Repositories Count", "Repository URL",
                      "Repository Stars Count", "Repository Size", "Repository Open Issues Count",
                      "Repository License", "Repository Readme filename"});
    std::size_t id = 1;
    for (const auto& [name, p] : s.packages) {
      std::string keywords;
      for (const auto& k : p.keywords) keywords += (keywords.empty() ? "" : ",") + k;
      const bool repo = p.repo.has_value();
      write_csv_row(f, {std::to_string(id++), "NPM", name, stamp(p.created_at),
                        p.has_description ? "Synthetic package " + name : "", keywords,
                        p.has_homepage ? "https://example.org/" + name : "", p.license_text,
                        std::to_string(p.sourcerank), std::to_string(p.dependent_repositories),
                        repo ? "https://example.org/repo/" + name : "", repo ? opt_int(p.repo->stars) : "",
                        repo ? opt_int(p.repo->size_kb) : "", repo ? opt_int(p.repo->open_issues) : "",
                        repo && p.repo->has_license_file ? "MIT" : "",
                        repo && p.repo->has_readme ? "README.md" : ""});
    }
  }
  {
    auto f = open("versions.csv");
    write_csv_row(f, {"Platform", "Project Name", "Number", "Published Timestamp"});
    for (const auto& [name, p] : s.packages) {
      for (const auto& r : p.versions) {
        write_csv_row(f, {"NPM", name, semver::to_string(r.version), stamp(r.published_at)});
      }
    }
  }
  {
    auto f = open("dependencies.csv");
    write_csv_row(f, {"Platform", "Project Name", "Version Number", "Dependency Name", "Dependency Platform",
                      "Dependency Kind", "Optional Dependency", "Dependency Requirements"});
    for (const auto& e : s.edges) {
      const std::string kind = e.kind == DependencyKind::kDevelopment ? "Development" : "runtime";
      write_csv_row(f, {"NPM", e.dependent, semver::to_string(e.dependent_version), e.target, "NPM", kind,
                        e.kind == DependencyKind::kOptional ? "true" : "false", e.constraint_text});
    }
  }
}

}  // namespace depstrat
