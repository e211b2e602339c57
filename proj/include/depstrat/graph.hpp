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
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "depstrat/ecosystem.hpp"
#include "depstrat/error.hpp"
#include "depstrat/parallel.hpp"

namespace depstrat {

// Package-level runtime dependency graph over latest versions. Node ids
// follow the lexicographic order of package names; adjacency lists are
// sorted and free of duplicates. Cycles are allowed.
class DepGraph {
 public:
  DepGraph() = default;

  // `edges` are (dependent, target) index pairs; duplicates and self loops
  // are dropped.
  DepGraph(std::vector<std::string> names, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges)
      : names_(std::move(names)), forward_(names_.size()), reverse_(names_.size()) {
    for (std::uint32_t i = 0; i < names_.size(); ++i) index_.emplace(names_[i], i);
    for (const auto& [from, to] : edges) {
      if (from == to) continue;
      forward_[from].push_back(to);
      reverse_[to].push_back(from);
    }
    for (auto* lists : {&forward_, &reverse_}) {
      for (auto& adj : *lists) {
        std::sort(adj.begin(), adj.end());
        adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
      }
    }
    for (const auto& adj : forward_) edge_count_ += adj.size();
  }

  std::size_t size() const { return names_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const std::string& name(std::uint32_t i) const { return names_[i]; }
  const std::vector<std::string>& names() const { return names_; }

  std::optional<std::uint32_t> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::uint32_t require(std::string_view name) const {
    auto i = find(name);
    if (!i) throw Error(ErrorCode::kUnknownPackage, "package '" + std::string(name) + "' not in graph");
    return *i;
  }

  const std::vector<std::uint32_t>& forward(std::uint32_t i) const { return forward_[i]; }
  const std::vector<std::uint32_t>& reverse(std::uint32_t i) const { return reverse_[i]; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::vector<std::uint32_t>> forward_;
  std::vector<std::vector<std::uint32_t>> reverse_;
  std::size_t edge_count_ = 0;
};

// One node per package, one edge per (dependent, target) runtime pair of the
// latest-version edges.
inline DepGraph build_graph(const EcosystemSnapshot& s) {
  std::vector<std::string> names;
  names.reserve(s.packages.size());
  for (const auto& [name, p] : s.packages) names.push_back(name);
  std::unordered_map<std::string, std::uint32_t> index;
  for (std::uint32_t i = 0; i < names.size(); ++i) index.emplace(names[i], i);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  edges.reserve(s.latest_edges.size());
  for (const auto& e : s.latest_edges) {
    if (e.kind != DependencyKind::kRuntime) continue;
    auto from = index.find(e.dependent);
    auto to = index.find(e.target);
    if (from == index.end() || to == index.end()) continue;
    edges.emplace_back(from->second, to->second);
  }
  return DepGraph(std::move(names), edges);
}

// Direct dependents among latest versions.
inline std::int64_t dependent_count(const DepGraph& g, std::string_view package) {
  return static_cast<std::int64_t>(g.reverse(g.require(package)).size());
}

inline std::int64_t dependency_count(const DepGraph& g, std::string_view package) {
  return static_cast<std::int64_t>(g.forward(g.require(package)).size());
}

struct TransitiveCounts {
  std::int64_t ancestors = 0;    // packages that reach p
  std::int64_t descendants = 0;  // packages p reaches

  friend bool operator==(const TransitiveCounts&, const TransitiveCounts&) = default;
};

// Reachable-set sizes by plain breadth-first search, p itself excluded.
inline TransitiveCounts transitive_counts(const DepGraph& g, std::string_view package) {
  const std::uint32_t start = g.require(package);
  auto reach = [&](bool forward) {
    std::vector<char> seen(g.size(), 0);
    std::vector<std::uint32_t> queue{start};
    seen[start] = 1;
    std::int64_t count = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const auto& adj = forward ? g.forward(queue[head]) : g.reverse(queue[head]);
      for (auto next : adj) {
        if (!seen[next]) {
          seen[next] = 1;
          ++count;
          queue.push_back(next);
        }
      }
    }
    return count;
  };
  return TransitiveCounts{reach(false), reach(true)};
}

namespace detail {

// Iterative Tarjan; returns the component id of every node.
inline std::vector<std::uint32_t> strongly_connected_components(const DepGraph& g, std::uint32_t& n_components) {
  const std::uint32_t n = static_cast<std::uint32_t>(g.size());
  constexpr std::uint32_t kUnvisited = UINT32_MAX;
  std::vector<std::uint32_t> index(n, kUnvisited), low(n, 0), component(n, kUnvisited);
  std::vector<char> on_stack(n, 0);
  std::vector<std::uint32_t> stack;
  std::vector<std::pair<std::uint32_t, std::size_t>> call;  // (node, next child position)
  std::uint32_t counter = 0;
  n_components = 0;
  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, pos] = call.back();
      const auto& adj = g.forward(v);
      if (pos < adj.size()) {
        const std::uint32_t w = adj[pos++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::uint32_t done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] == index[done]) {
        std::uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          component[w] = n_components;
        } while (w != done);
        ++n_components;
      }
    }
  }
  return component;
}

}  // namespace detail

// Transitive counts for every node. Nodes of one strongly connected
// component share a reachable set, so one search per component over the
// condensation suffices; results equal transitive_counts() node by node.
inline std::vector<TransitiveCounts> all_transitive_counts(const DepGraph& g, std::size_t threads = 1) {
  std::uint32_t n_comp = 0;
  const auto comp = detail::strongly_connected_components(g, n_comp);
  std::vector<std::int64_t> comp_size(n_comp, 0);
  for (auto c : comp) ++comp_size[c];
  std::vector<std::vector<std::uint32_t>> down(n_comp), up(n_comp);
  for (std::uint32_t v = 0; v < g.size(); ++v) {
    for (auto w : g.forward(v)) {
      if (comp[v] != comp[w]) {
        down[comp[v]].push_back(comp[w]);
        up[comp[w]].push_back(comp[v]);
      }
    }
  }
  for (auto* lists : {&down, &up}) {
    for (auto& adj : *lists) {
      std::sort(adj.begin(), adj.end());
      adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }
  }

  std::vector<TransitiveCounts> per_comp(n_comp);
  parallel_blocks(n_comp, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> stamp(n_comp, UINT32_MAX);
    std::vector<std::uint32_t> queue;
    auto reach = [&](std::uint32_t c, const std::vector<std::vector<std::uint32_t>>& adj, std::uint32_t mark) {
      queue.assign(1, c);
      stamp[c] = mark;
      std::int64_t total = comp_size[c] - 1;
      for (std::size_t head = 0; head < queue.size(); ++head) {
        for (auto next : adj[queue[head]]) {
          if (stamp[next] != mark) {
            stamp[next] = mark;
            total += comp_size[next];
            queue.push_back(next);
          }
        }
      }
      return total;
    };
    for (std::size_t c = begin; c < end; ++c) {
      const auto cc = static_cast<std::uint32_t>(c);
      per_comp[c].descendants = reach(cc, down, 2 * cc);
      per_comp[c].ancestors = reach(cc, up, 2 * cc + 1);
    }
  });

  std::vector<TransitiveCounts> out(g.size());
  for (std::uint32_t v = 0; v < g.size(); ++v) out[v] = per_comp[comp[v]];
  return out;
}

struct GraphMetrics {
  std::string package;
  std::int64_t dependent_count = 0;
  std::int64_t transitive_dependents = 0;
  std::int64_t dependency_count = 0;
  std::int64_t transitive_dependencies = 0;
};

inline std::vector<GraphMetrics> graph_metrics(const DepGraph& g, std::size_t threads = 1) {
  const auto transitive = all_transitive_counts(g, threads);
  std::vector<GraphMetrics> out(g.size());
  for (std::uint32_t v = 0; v < g.size(); ++v) {
    out[v] = GraphMetrics{g.name(v), static_cast<std::int64_t>(g.reverse(v).size()), transitive[v].ancestors,
                          static_cast<std::int64_t>(g.forward(v).size()), transitive[v].descendants};
  }
  return out;
}

}  // namespace depstrat
