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


#include "depstrat/features.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "depstrat/graph.hpp"
#include "depstrat/ingest.hpp"
#include "depstrat/rng.hpp"
#include "fixture.hpp"

namespace depstrat {
namespace {

using testing::SnapshotBuilder;

constexpr Date kSnapshot{2020, 1, 12};

std::vector<std::pair<std::string, Date>> monthly_releases(int n, Date first) {
  std::vector<std::pair<std::string, Date>> out;
  for (int i = 0; i < n; ++i) {
    const YearMonth ym = YearMonth::from_index(YearMonth::of(first).index() + i % 3);
    out.emplace_back("1." + std::to_string(i) + ".0", Date{ym.year, ym.month, 1});
  }
  return out;
}

FeatureVector features_of(const EcosystemSnapshot& s, const std::string& name) {
  const DepGraph g = build_graph(s);
  const auto rows = derive_features(s, g, DomainModel{}, kSnapshot, {name});
  return rows.at(0).values;
}

TEST(DeriveFeatures, VersionFrequencyIsReleasesPerMonth) {
  // Created 2019-08, five months before the snapshot month.
  auto s = SnapshotBuilder().package("p", monthly_releases(10, Date{2019, 8, 20})).build();
  const auto v = features_of(s, "p");
  EXPECT_EQ(get(v, Feature::kAgeMonths), 5);
  EXPECT_DOUBLE_EQ(get(v, Feature::kVersionFrequency), 2.0);
}

TEST(DeriveFeatures, ZeroAgeUsesVersionCount) {
  auto s = SnapshotBuilder().package("p", monthly_releases(4, Date{2020, 1, 2})).build();
  s.packages.at("p").versions.resize(4);
  for (auto& r : s.packages.at("p").versions) r.published_at = Date{2020, 1, 3};
  const auto v = features_of(s, "p");
  EXPECT_EQ(get(v, Feature::kAgeMonths), 0);
  EXPECT_DOUBLE_EQ(get(v, Feature::kVersionFrequency), 4.0);
}

TEST(DeriveFeatures, ReleaseStatusFollowsLatestVersion) {
  auto s = SnapshotBuilder()
               .package("pre", {{"0.9.1", Date{2018, 1, 1}}})
               .package("post", {{"0.9.1", Date{2018, 1, 1}}, {"1.0.0", Date{2019, 1, 1}}})
               .package("rc", {{"0.9.0", Date{2018, 1, 1}}, {"1.0.0-rc.1", Date{2019, 1, 1}}})
               .build();
  EXPECT_EQ(get(features_of(s, "pre"), Feature::kReleaseStatus), 0);
  EXPECT_EQ(get(features_of(s, "post"), Feature::kReleaseStatus), 1);
  EXPECT_EQ(get(features_of(s, "rc"), Feature::kReleaseStatus), 0);
}

TEST(DeriveFeatures, CountsFlagsAndDates) {
  auto b = SnapshotBuilder()
               .package("lib", {{"1.0.0", Date{2018, 3, 1}}, {"1.1.0", Date{2019, 12, 2}}})
               .package("a")
               .package("c")
               .package("leaf")
               .edge("a", "lib", "^1.0.0")
               .edge("c", "lib", "^1.0.0")
               .edge("lib", "leaf", "^1.0.0")
               .edge("a", "c", "^1.0.0");
  PackageRecord& lib = b.at("lib");
  lib.has_description = true;
  lib.keywords = {"x"};
  lib.license_text = " MIT ";
  lib.sourcerank = 9;
  lib.dependent_repositories = 4;
  lib.repo = RepoMetadata{30, 512, 2, true, false};
  b.at("a").license_text = "Apache-2.0";
  b.at("c").license_text = "mit";
  const auto v = features_of(b.build(), "lib");
  EXPECT_EQ(get(v, Feature::kDependencyCount), 1);
  EXPECT_EQ(get(v, Feature::kTransitiveDependencyCount), 1);
  EXPECT_EQ(get(v, Feature::kDependentCount), 2);
  EXPECT_EQ(get(v, Feature::kAgeMonths), 22);
  EXPECT_EQ(get(v, Feature::kDaysSinceLastRelease), 41);
  EXPECT_EQ(get(v, Feature::kHasDescription), 1);
  EXPECT_EQ(get(v, Feature::kHasKeywords), 1);
  EXPECT_EQ(get(v, Feature::kHasHomepage), 0);
  // Sorted normalized licenses: apache-2.0 -> 1, mit -> 2.
  EXPECT_EQ(get(v, Feature::kLicenseCode), 2);
  EXPECT_EQ(get(v, Feature::kSourcerank), 9);
  EXPECT_EQ(get(v, Feature::kDependentRepositories), 4);
  EXPECT_EQ(get(v, Feature::kRepositorySizeKb), 512);
  EXPECT_EQ(get(v, Feature::kRepositoryOpenIssues), 2);
  EXPECT_EQ(get(v, Feature::kRepositoryStars), 30);
  EXPECT_EQ(get(v, Feature::kHasRepoLicense), 1);
  EXPECT_EQ(get(v, Feature::kHasRepoReadme), 0);
  EXPECT_EQ(get(v, Feature::kDomain), 1);
}

TEST(DeriveFeatures, VersionFrequencyTimesAgeIsVersionCount) {
  Rng rng(8);
  SnapshotBuilder b;
  std::vector<std::string> names;
  for (int i = 0; i < 200; ++i) {
    const int releases = 1 + static_cast<int>(uniform_index(rng, 40));
    const int year = 2010 + static_cast<int>(uniform_index(rng, 10));
    const int month = 1 + static_cast<int>(uniform_index(rng, 12));
    names.push_back("p" + std::to_string(i));
    b.package(names.back(), monthly_releases(releases, Date{year, month, 5}));
  }
  const EcosystemSnapshot s = b.build();
  const DepGraph g = build_graph(s);
  for (const auto& row : derive_features(s, g, DomainModel{}, kSnapshot, names, 3)) {
    const double age = get(row.values, Feature::kAgeMonths);
    const double count = static_cast<double>(s.package(row.package).versions.size());
    if (age > 0) {
      EXPECT_NEAR(get(row.values, Feature::kVersionFrequency) * age, count, 1e-9 * count);
    }
    for (double x : row.values) EXPECT_TRUE(std::isfinite(x));
  }
}

TEST(DeriveFeatures, ThreadCountAndNameOrderDoNotMatter) {
  SnapshotBuilder b;
  std::vector<std::string> names;
  for (int i = 0; i < 50; ++i) {
    names.push_back("p" + std::to_string(i));
    b.package(names.back(), monthly_releases(1 + i % 7, Date{2015, 1 + i % 12, 1}));
  }
  for (int i = 1; i < 50; ++i) b.edge("p" + std::to_string(i), "p" + std::to_string(i / 2), "^1.0.0");
  const EcosystemSnapshot s = b.build();
  const DepGraph g = build_graph(s);
  const auto one = derive_features(s, g, DomainModel{}, kSnapshot, names, 1);
  std::reverse(names.begin(), names.end());
  const auto many = derive_features(s, g, DomainModel{}, kSnapshot, names, 6);
  ASSERT_EQ(one.size(), many.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].package, many[i].package);
    EXPECT_EQ(one[i].values, many[i].values);
  }
}

TEST(FeatureSchema, FixedColumnOrder) {
  const auto& names = feature_names();
  EXPECT_EQ(names.size(), 19u);
  EXPECT_EQ(names.front(), "dependency_count");
  EXPECT_EQ(names[10], "release_status");
  EXPECT_EQ(names.back(), "domain");
  EXPECT_EQ(feature_index("age_months"), 4u);
  EXPECT_FALSE(feature_index("watchers"));
  EXPECT_TRUE(is_categorical_feature("has_homepage"));
  EXPECT_TRUE(is_categorical_feature("domain"));
  EXPECT_FALSE(is_categorical_feature("dependent_count"));
}

TEST(FeaturesCsv, RoundTripAndHeaderCheck) {
  FeatureTable t;
  FeatureRow a{"alpha", {}};
  a.values.fill(3);
  a.values[static_cast<std::size_t>(Feature::kVersionFrequency)] = 0.1 + 0.2;
  FeatureRow b{"beta", {}};
  t.rows = {a, b};
  t.labels = {static_cast<int>(Label::kRestrictive), -1};
  std::stringstream io;
  write_features_csv(io, t);
  const FeatureTable back = read_features_csv(io);
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(back.rows[0].values, a.values);
  EXPECT_EQ(back.labels, t.labels);
  EXPECT_EQ(back.find("beta"), 1u);
  EXPECT_FALSE(back.find("gamma"));

  std::stringstream bad("package,dependency_count,label\nx,1,balanced\n");
  try {
    read_features_csv(bad);
    FAIL() << "expected SchemaMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaMismatch);
  }
}

TEST(CorrelationAudit, DuplicatedColumnIsFlagged) {
  Rng rng(1);
  Matrix m;
  for (int i = 0; i < 100; ++i) {
    const double x = uniform01(rng);
    m.append_row({x, x, uniform01(rng)});
  }
  const auto rep = correlation_audit(m, {"stars", "forks", "noise"}, {"forks"});
  ASSERT_EQ(rep.pairs.size(), 3u);
  ASSERT_TRUE(rep.pairs[0].r.has_value());
  EXPECT_NEAR(*rep.pairs[0].r, 1.0, 1e-12);
  EXPECT_TRUE(rep.pairs[0].flagged);
  EXPECT_EQ(rep.pairs[0].keep, "forks");
  EXPECT_EQ(rep.pairs[0].drop, "stars");
  EXPECT_FALSE(rep.pairs[1].flagged);
}

TEST(CorrelationAudit, IndependentColumnsAreUncorrelated) {
  Rng rng(20240);
  Matrix m;
  for (int i = 0; i < 10000; ++i) m.append_row({uniform01(rng), uniform01(rng), uniform01(rng)});
  const auto rep = correlation_audit(m, {"a", "b", "c"});
  for (const auto& p : rep.pairs) {
    ASSERT_TRUE(p.r.has_value());
    EXPECT_LT(std::fabs(*p.r), 0.05) << p.a << "/" << p.b;
    EXPECT_FALSE(p.flagged);
  }
}

TEST(CorrelationAudit, ConstantColumnReportedAndNotFlagged) {
  Matrix m;
  for (int i = 0; i < 10; ++i) m.append_row({static_cast<double>(i), 5.0});
  const Matrix before = m;
  const auto rep = correlation_audit(m, {"x", "flat"});
  EXPECT_EQ(rep.constant_columns, std::vector<std::string>{"flat"});
  ASSERT_EQ(rep.pairs.size(), 1u);
  EXPECT_FALSE(rep.pairs[0].r.has_value());
  EXPECT_FALSE(rep.pairs[0].flagged);
  EXPECT_TRUE(rep.to_json()["pairs"][0]["r"].is_null());
  EXPECT_EQ(m, before);
}

TEST(CorrelationAudit, NegativeCorrelationFlagged) {
  Matrix m;
  for (int i = 0; i < 20; ++i) m.append_row({static_cast<double>(i), -2.0 * i + 1});
  const auto rep = correlation_audit(m, {"x", "y"});
  EXPECT_NEAR(*rep.pairs[0].r, -1.0, 1e-12);
  EXPECT_TRUE(rep.pairs[0].flagged);
  EXPECT_EQ(rep.pairs[0].keep, "x");
}

}  // namespace
}  // namespace depstrat
