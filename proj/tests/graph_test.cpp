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


#include "depstrat/graph.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "depstrat/rng.hpp"
#include "fixture.hpp"
#include "oracles/reachability.hpp"

namespace depstrat {
namespace {

using Edges = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

std::vector<std::string> numbered(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s = std::to_string(i);
    names.push_back("n" + std::string(4 - s.size(), '0') + s);
  }
  return names;
}

Edges random_edges(Rng& rng, std::size_t n, std::size_t m, bool acyclic) {
  Edges edges;
  for (std::size_t k = 0; k < m; ++k) {
    auto a = static_cast<std::uint32_t>(uniform_index(rng, n));
    auto b = static_cast<std::uint32_t>(uniform_index(rng, n));
    if (acyclic && a > b) std::swap(a, b);
    edges.emplace_back(a, b);
  }
  return edges;
}

void expect_matches_oracle(const DepGraph& g, const Edges& edges) {
  const auto expected = oracle::closure_counts(g.size(), edges);
  const auto fast = all_transitive_counts(g, 3);
  for (std::uint32_t v = 0; v < g.size(); ++v) {
    const auto bfs = transitive_counts(g, g.name(v));
    ASSERT_EQ(bfs.ancestors, expected[v].ancestors) << g.name(v);
    ASSERT_EQ(bfs.descendants, expected[v].descendants) << g.name(v);
    ASSERT_EQ(fast[v], bfs) << g.name(v);
  }
}

TEST(DepGraph, Chain) {
  const DepGraph g(numbered(4), {{0, 1}, {1, 2}, {2, 3}});
  EXPECT_EQ(transitive_counts(g, "n0000"), (TransitiveCounts{0, 3}));
  EXPECT_EQ(transitive_counts(g, "n0003"), (TransitiveCounts{3, 0}));
  EXPECT_EQ(transitive_counts(g, "n0001"), (TransitiveCounts{1, 2}));
}

TEST(DepGraph, CompleteGraphCountsEachOtherOnce) {
  Edges edges;
  for (std::uint32_t a = 0; a < 5; ++a) {
    for (std::uint32_t b = 0; b < 5; ++b) edges.emplace_back(a, b);
  }
  const DepGraph g(numbered(5), edges);
  EXPECT_EQ(g.edge_count(), 20u);
  for (const auto& name : g.names()) EXPECT_EQ(transitive_counts(g, name), (TransitiveCounts{4, 4}));
}

TEST(DepGraph, TwoCycle) {
  const DepGraph g(numbered(3), {{0, 1}, {1, 0}, {2, 0}});
  EXPECT_EQ(transitive_counts(g, "n0000"), (TransitiveCounts{2, 1}));
  EXPECT_EQ(transitive_counts(g, "n0001"), (TransitiveCounts{2, 1}));
  EXPECT_EQ(transitive_counts(g, "n0002"), (TransitiveCounts{0, 2}));
}

TEST(DepGraph, DuplicatesAndSelfLoopsDropped) {
  const DepGraph g(numbered(2), {{0, 1}, {0, 1}, {1, 1}});
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(dependent_count(g, "n0001"), 1);
  EXPECT_EQ(dependency_count(g, "n0001"), 0);
}

TEST(DepGraph, UnknownPackage) {
  const DepGraph g(numbered(2), {});
  try {
    transitive_counts(g, "missing");
    FAIL() << "expected UnknownPackage";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownPackage);
  }
  EXPECT_THROW(dependent_count(g, "missing"), Error);
}

// A package.json with three runtime dependencies and two dev dependencies.
TEST(BuildGraph, ManifestWithThreeRuntimeDependencies) {
  const EcosystemSnapshot s = testing::SnapshotBuilder()
                                  .package("my-app")
                                  .package("express")
                                  .package("lodash")
                                  .package("react")
                                  .package("jest")
                                  .package("eslint")
                                  .edge("my-app", "express", "^4.17.1")
                                  .edge("my-app", "lodash", "~4.17.15")
                                  .edge("my-app", "react", "16.12.0")
                                  .edge("my-app", "jest", "^24.9.0", DependencyKind::kDevelopment)
                                  .edge("my-app", "eslint", "^6.8.0", DependencyKind::kDevelopment)
                                  .build();
  const DepGraph g = build_graph(s);
  EXPECT_EQ(dependency_count(g, "my-app"), 3);
  EXPECT_EQ(dependent_count(g, "lodash"), 1);
  EXPECT_EQ(dependent_count(g, "jest"), 0);
}

TEST(BuildGraph, OnlyLatestVersionEdgesCount) {
  const EcosystemSnapshot s = testing::SnapshotBuilder()
                                  .package("app", {{"1.0.0", Date{2015, 1, 1}}, {"2.0.0", Date{2016, 1, 1}}})
                                  .package("old")
                                  .package("new")
                                  .edge_at("app", "1.0.0", "old", "^1.0.0")
                                  .edge_at("app", "2.0.0", "new", "^1.0.0")
                                  .build();
  const DepGraph g = build_graph(s);
  EXPECT_EQ(dependent_count(g, "old"), 0);
  EXPECT_EQ(dependent_count(g, "new"), 1);
}

TEST(TransitiveCounts, RandomDagsMatchClosureOracle) {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 199);
    const Edges edges = random_edges(rng, n, uniform_index(rng, 3 * n), true);
    expect_matches_oracle(DepGraph(numbered(n), edges), edges);
  }
}

TEST(TransitiveCounts, RandomCyclicDigraphsMatchClosureOracle) {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 199);
    Edges edges = random_edges(rng, n, uniform_index(rng, 2 * n), false);
    std::erase_if(edges, [](const auto& e) { return e.first == e.second; });
    expect_matches_oracle(DepGraph(numbered(n), edges), edges);
  }
}

TEST(DepGraph, ReverseIsTransposeAndDegreeSumsAgree) {
  Rng rng(5);
  const std::size_t n = 50;
  const Edges edges = random_edges(rng, n, 300, false);
  const DepGraph g(numbered(n), edges);

  // Brute-force transpose count from the raw edge list.
  std::set<std::pair<std::uint32_t, std::uint32_t>> distinct;
  for (const auto& e : edges) {
    if (e.first != e.second) distinct.insert(e);
  }
  std::vector<std::int64_t> in_degree(n, 0);
  for (const auto& [a, b] : distinct) ++in_degree[b];

  std::size_t forward_sum = 0, reverse_sum = 0;
  for (std::uint32_t v = 0; v < n; ++v) {
    EXPECT_EQ(dependent_count(g, g.name(v)), in_degree[v]);
    forward_sum += g.forward(v).size();
    reverse_sum += g.reverse(v).size();
    for (auto w : g.forward(v)) {
      const auto& back = g.reverse(w);
      EXPECT_TRUE(std::binary_search(back.begin(), back.end(), v));
    }
  }
  EXPECT_EQ(forward_sum, distinct.size());
  EXPECT_EQ(reverse_sum, distinct.size());
}

TEST(GraphMetrics, ThreadCountDoesNotChangeResults) {
  Rng rng(11);
  const std::size_t n = 150;
  const DepGraph g(numbered(n), random_edges(rng, n, 400, false));
  const auto one = graph_metrics(g, 1);
  const auto many = graph_metrics(g, 8);
  ASSERT_EQ(one.size(), many.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].transitive_dependents, many[i].transitive_dependents);
    EXPECT_EQ(one[i].transitive_dependencies, many[i].transitive_dependencies);
  }
}

}  // namespace
}  // namespace depstrat
