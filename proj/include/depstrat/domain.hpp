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
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "depstrat/ecosystem.hpp"
#include "depstrat/rng.hpp"

namespace depstrat {

struct DomainOptions {
  std::size_t clusters = 10;
  std::int64_t min_ngram_count = 10;
  std::size_t top_ngrams = 2000;
  std::size_t vocabulary_size = 15;
  int max_iterations = 300;
  double tolerance = 1e-4;
};

struct ScoredNgram {
  std::vector<std::string> words;
  std::int64_t count = 0;
  double pmi = 0.0;
};

// Keyword domain model: collocation groups, a small vocabulary of group
// representatives and k-means centroids over term-frequency vectors.
struct DomainModel {
  std::vector<ScoredNgram> ngrams;                        // kept collocations, best first
  std::map<std::string, std::string> representative;      // grouped keyword -> representative
  std::vector<std::string> vocabulary;
  std::vector<std::vector<double>> centroids;
  std::uint64_t seed = 0;
  int iterations = 0;
  bool degenerate = false;  // too few keywords; everything maps to cluster 1

  const std::string& map_keyword(const std::string& kw) const {
    auto it = representative.find(kw);
    return it == representative.end() ? kw : it->second;
  }

  std::vector<double> term_frequencies(const std::vector<std::string>& keywords) const {
    std::vector<double> tf(vocabulary.size(), 0.0);
    for (const auto& kw : keywords) {
      const auto& rep = map_keyword(kw);
      for (std::size_t i = 0; i < vocabulary.size(); ++i) {
        if (vocabulary[i] == rep) tf[i] += 1.0;
      }
    }
    return tf;
  }

  // Cluster id in 1..k.
  int assign(const std::vector<std::string>& keywords) const {
    if (degenerate || centroids.empty()) return 1;
    return nearest(term_frequencies(keywords)) + 1;
  }

  int nearest(const std::vector<double>& x) const {
    int best = 0;
    double best_d = INFINITY;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      double d = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) d += (x[i] - centroids[c][i]) * (x[i] - centroids[c][i]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    return best;
  }

  Json to_json() const {
    Json j;
    j["seed"] = seed;
    j["degenerate"] = degenerate;
    j["iterations"] = iterations;
    j["vocabulary"] = vocabulary;
    j["centroids"] = centroids;
    Json groups = Json::object();
    for (const auto& [kw, rep] : representative) groups[kw] = rep;
    j["representative"] = groups;
    Json ng = Json::array();
    for (const auto& n : ngrams) ng.push_back(Json{{"words", n.words}, {"count", n.count}, {"pmi", n.pmi}});
    j["ngrams"] = ng;
    return j;
  }
};

using KeywordCorpus = std::vector<std::pair<std::string, std::vector<std::string>>>;

// Bigram and trigram collocations of adjacent keywords within each package's
// list, scored by base-2 pointwise mutual information over occurrence
// probabilities.
inline std::vector<ScoredNgram> score_ngrams(const KeywordCorpus& corpus, const DomainOptions& opt) {
  std::unordered_map<std::string, std::int64_t> unigram;
  std::map<std::vector<std::string>, std::int64_t> grams[2];
  std::int64_t totals[3] = {0, 0, 0};
  for (const auto& [name, kws] : corpus) {
    for (const auto& w : kws) ++unigram[w];
    totals[0] += static_cast<std::int64_t>(kws.size());
    for (std::size_t n = 2; n <= 3; ++n) {
      for (std::size_t i = 0; i + n <= kws.size(); ++i) {
        ++grams[n - 2][std::vector<std::string>(kws.begin() + i, kws.begin() + i + n)];
        ++totals[n - 1];
      }
    }
  }
  std::vector<ScoredNgram> out;
  for (std::size_t n = 0; n < 2; ++n) {
    for (const auto& [words, count] : grams[n]) {
      if (count < opt.min_ngram_count) continue;
      double log_p = std::log2(static_cast<double>(count) / static_cast<double>(totals[n + 1]));
      for (const auto& w : words) {
        log_p -= std::log2(static_cast<double>(unigram.at(w)) / static_cast<double>(totals[0]));
      }
      out.push_back(ScoredNgram{words, count, log_p});
    }
  }
  std::sort(out.begin(), out.end(), [](const ScoredNgram& a, const ScoredNgram& b) {
    if (a.pmi != b.pmi) return a.pmi > b.pmi;
    return a.words < b.words;
  });
  if (out.size() > opt.top_ngrams) out.resize(opt.top_ngrams);
  return out;
}

namespace detail {

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

}  // namespace detail

// Lloyd's k-means with farthest-point seeding. The first centre is a point
// drawn from `rng`; each further centre is the point farthest from those
// chosen so far (lowest index on ties). Empty clusters keep their centre.
inline std::vector<std::vector<double>> kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                                               Rng& rng, int max_iterations, double tolerance,
                                               int* iterations_out = nullptr) {
  std::vector<std::vector<double>> centroids;
  if (points.empty() || k == 0) return centroids;
  const std::size_t dim = points[0].size();
  centroids.push_back(points[uniform_index(rng, points.size())]);
  std::vector<double> nearest_d(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) nearest_d[i] = detail::squared_distance(points[i], centroids[0]);
  while (centroids.size() < k) {
    std::size_t pick = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (nearest_d[i] > nearest_d[pick]) pick = i;
    }
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < points.size(); ++i) {
      nearest_d[i] = std::min(nearest_d[i], detail::squared_distance(points[i], centroids.back()));
    }
  }

  int iter = 0;
  std::vector<std::size_t> assignment(points.size(), 0);
  while (iter < max_iterations) {
    ++iter;
    for (std::size_t i = 0; i < points.size(); ++i) {
      std::size_t best = 0;
      double best_d = detail::squared_distance(points[i], centroids[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = detail::squared_distance(points[i], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assignment[i] = best;
    }
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      ++sizes[assignment[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[assignment[i]][d] += points[i][d];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) continue;
      for (auto& v : sums[c]) v /= static_cast<double>(sizes[c]);
      shift = std::max(shift, std::sqrt(detail::squared_distance(sums[c], centroids[c])));
      centroids[c] = std::move(sums[c]);
    }
    if (shift <= tolerance) break;
  }
  if (iterations_out) *iterations_out = iter;
  return centroids;
}

inline DomainModel fit_domain_model(KeywordCorpus corpus, std::uint64_t seed, const DomainOptions& opt = {}) {
  std::sort(corpus.begin(), corpus.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  DomainModel m;
  m.seed = seed;

  std::map<std::string, std::int64_t> unigram;
  for (const auto& [name, kws] : corpus) {
    for (const auto& w : kws) ++unigram[w];
  }
  if (unigram.size() < 10) {
    m.degenerate = true;
    return m;
  }

  m.ngrams = score_ngrams(corpus, opt);

  // Union-find over keywords sharing a kept n-gram.
  std::map<std::string, std::string> parent;
  std::function<std::string(const std::string&)> find = [&](const std::string& x) -> std::string {
    auto it = parent.find(x);
    if (it == parent.end() || it->second == x) return x;
    std::string root = find(it->second);
    parent[x] = root;
    return root;
  };
  for (const auto& ng : m.ngrams) {
    for (const auto& w : ng.words) parent.emplace(w, w);
    for (std::size_t i = 1; i < ng.words.size(); ++i) {
      const auto a = find(ng.words[0]);
      const auto b = find(ng.words[i]);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::map<std::string, std::vector<std::string>> groups;
  for (const auto& [w, p] : parent) groups[find(w)].push_back(w);
  for (const auto& [root, members] : groups) {
    // Members are in lexicographic order, so the first maximum wins ties.
    const std::string* best = &members.front();
    for (const auto& w : members) {
      if (unigram[w] > unigram[*best]) best = &w;
    }
    for (const auto& w : members) m.representative[w] = *best;
  }

  std::map<std::string, std::int64_t> doc_freq;
  for (const auto& [name, kws] : corpus) {
    std::vector<std::string> mapped;
    for (const auto& w : kws) mapped.push_back(m.map_keyword(w));
    std::sort(mapped.begin(), mapped.end());
    mapped.erase(std::unique(mapped.begin(), mapped.end()), mapped.end());
    for (const auto& w : mapped) ++doc_freq[w];
  }
  std::vector<std::pair<std::string, std::int64_t>> ranked(doc_freq.begin(), doc_freq.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  for (std::size_t i = 0; i < ranked.size() && i < opt.vocabulary_size; ++i) m.vocabulary.push_back(ranked[i].first);

  std::vector<std::vector<double>> points;
  points.reserve(corpus.size());
  for (const auto& [name, kws] : corpus) points.push_back(m.term_frequencies(kws));
  Rng rng(derive_seed(seed, "domain-kmeans"));
  m.centroids = kmeans(points, opt.clusters, rng, opt.max_iterations, opt.tolerance, &m.iterations);
  return m;
}

// Corpus of the given packages (all packages when `names` is empty).
inline KeywordCorpus keyword_corpus(const EcosystemSnapshot& s, const std::vector<std::string>& names = {}) {
  KeywordCorpus corpus;
  if (names.empty()) {
    for (const auto& [name, p] : s.packages) corpus.emplace_back(name, p.keywords);
  } else {
    for (const auto& name : names) corpus.emplace_back(name, s.package(name).keywords);
  }
  return corpus;
}

}  // namespace depstrat
