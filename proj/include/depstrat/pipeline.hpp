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

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "depstrat/domain.hpp"
#include "depstrat/ecosystem.hpp"
#include "depstrat/error.hpp"
#include "depstrat/evolution.hpp"
#include "depstrat/features.hpp"
#include "depstrat/forest.hpp"
#include "depstrat/graph.hpp"
#include "depstrat/ingest.hpp"
#include "depstrat/interpret.hpp"
#include "depstrat/labeler.hpp"
#include "depstrat/metrics.hpp"
#include "depstrat/parallel.hpp"
#include "depstrat/rng.hpp"

namespace depstrat {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct RunConfig {
  // Inputs and outputs; not part of the configuration hash.
  std::string projects_csv;
  std::string versions_csv;
  std::string dependencies_csv;
  std::string denylist;
  std::string out_dir = "depstrat-out";
  std::size_t threads = 0;

  Date snapshot_date{2020, 1, 12};
  double threshold = 0.5;
  std::uint64_t seed = 42;
  ForestParams forest;
  bool stratify = true;
  bool tune = false;
  bool pre_filter_graph = false;
  std::int64_t min_dependents = 2;
  int importance_repeats = 10;
  int pdp_grid = 20;
  std::size_t pdp_top = 3;
  std::vector<std::string> pdp_features;  // overrides the top-importance choice
  std::vector<std::string> correlation_keep = {
      "dependent_count", "dependency_count", "age_months", "repository_stars", "repository_open_issues"};

  // Everything that influences artifact bodies.
  Json hashed_json() const {
    Json j;
    j["snapshot_date"] = to_string(snapshot_date);
    j["threshold"] = threshold;
    j["seed"] = seed;
    j["n_trees"] = forest.n_trees;
    j["min_samples_split"] = forest.min_samples_split;
    j["features_per_split"] = forest.features_per_split;
    j["stratify"] = stratify;
    j["tune"] = tune;
    j["pre_filter_graph"] = pre_filter_graph;
    j["min_dependents"] = min_dependents;
    j["importance_repeats"] = importance_repeats;
    j["pdp_grid"] = pdp_grid;
    j["pdp_top"] = pdp_top;
    j["pdp_features"] = pdp_features;
    j["correlation_keep"] = correlation_keep;
    return j;
  }

  std::string hash() const {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(hashed_json().dump())));
    return buf;
  }

  std::uint64_t stage_seed(std::string_view stage) const { return derive_seed(seed, stage); }
};

// Provenance block embedded in every artifact. Paths and thread counts are
// left out so reruns elsewhere produce identical bytes.
inline Json provenance(const Json& config, std::string_view command) {
  Json j;
  j["tool"] = "depstrat";
  j["version"] = kToolVersion;
  j["command"] = command;
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
  j["config_hash"] = buf;
  if (config.contains("seed")) j["seed"] = config["seed"];
  j["config"] = config;
  return j;
}

inline void write_csv_provenance(std::ostream& out, const Json& prov) {
  out << "# depstrat " << prov.dump() << "\n";
}

// Writes `content` to a sibling temporary file and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + tmp);
    f << content;
    f.flush();
    if (!f) throw Error(ErrorCode::kIo, "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename " + tmp + ": " + ec.message());
}

inline void write_json_artifact(const std::filesystem::path& path, Json body, const Json& prov) {
  Json j;
  j["provenance"] = prov;
  for (auto& [k, v] : body.items()) j[k] = std::move(v);
  write_atomic(path, j.dump(2) + "\n");
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kMissingFile, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline Json read_json_file(const std::string& path) {
  try {
    Json j = Json::parse(read_file(path));
    return j;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, path + ": " + e.what());
  }
}

// Error annotated with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), cause.detail()), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  } catch (const std::filesystem::filesystem_error& e) {
    throw StageError(stage, Error(ErrorCode::kIo, e.what()));
  } catch (const Json::exception& e) {
    throw StageError(stage, Error(ErrorCode::kMalformedInput, e.what()));
  } catch (const std::exception& e) {
    throw StageError(stage, Error(ErrorCode::kInternal, e.what()));
  }
}

// ---------------------------------------------------------------------------
// Stage bodies shared by the individual subcommands and `pipeline`.

struct IngestResult {
  EcosystemSnapshot filtered;    // filtered and imputed
  EcosystemSnapshot unfiltered;  // loaded, before filters
  Json report;
};

inline IngestResult ingest_stage(const RunConfig& cfg) {
  IngestReport rep;
  IngestResult out;
  out.unfiltered = load_librariesio(cfg.projects_csv, cfg.versions_csv, cfg.dependencies_csv, cfg.snapshot_date, &rep);
  FilterOptions fo;
  fo.min_dependents = cfg.min_dependents;
  if (!cfg.denylist.empty()) fo.spam_stems = load_denylist(cfg.denylist);
  ImputationReport imp;
  out.filtered = impute_missing(apply_filters(out.unfiltered, fo, &rep), &imp);
  out.report = rep.to_json();
  out.report["imputation"] = imp.to_json();
  return out;
}

inline Json ecosystem_summary(const EcosystemSnapshot& s) {
  std::int64_t labeled = 0;
  for (const auto& [n, p] : s.packages) labeled += p.labeled ? 1 : 0;
  return Json{{"packages", s.packages.size()},
              {"edges", s.edges.size()},
              {"latest_edges", s.latest_edges.size()},
              {"labeled_population", labeled}};
}

inline std::string graph_metrics_csv(const DepGraph& g, std::size_t threads, const Json& prov) {
  std::ostringstream out;
  write_csv_provenance(out, prov);
  write_csv_row(out, {"package", "dependent_count", "transitive_dependents", "dependency_count",
                      "transitive_dependencies"});
  for (const auto& m : graph_metrics(g, threads)) {
    write_csv_row(out, {m.package, std::to_string(m.dependent_count), std::to_string(m.transitive_dependents),
                        std::to_string(m.dependency_count), std::to_string(m.transitive_dependencies)});
  }
  return out.str();
}

inline std::string labels_csv(const std::map<std::string, PackageLabel>& labels, const Json& prov) {
  std::ostringstream out;
  write_csv_provenance(out, prov);
  write_labels_csv(out, labels);
  return out.str();
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows, const Json& prov) {
  std::ostringstream out;
  write_csv_provenance(out, prov);
  std::vector<std::string> header{"threshold", "labeled"};
  for (Label l : kLabelOrder) header.emplace_back(to_string(l));
  write_csv_row(out, header);
  for (const auto& r : rows) {
    std::vector<std::string> fields{format_double(r.threshold), std::to_string(r.labeled)};
    for (Label l : kLabelOrder) fields.push_back(format_double(r.share(l)));
    write_csv_row(out, fields);
  }
  return out.str();
}

inline Json label_audit(const std::map<std::string, StrategyDistribution>& dists) {
  std::int64_t total = 0, excluded = 0, mixed = 0, dropped = 0;
  for (const auto& [n, d] : dists) {
    total += d.total;
    excluded += d.excluded;
    mixed += d.mixed;
    dropped += d.total < 2 ? 1 : 0;
  }
  return Json{{"classified_edges", total},
              {"excluded_edges", excluded},
              {"mixed_pre_post_1_0_0_edges", mixed},
              {"dropped_insufficient_dependents", dropped}};
}

struct FeatureStageResult {
  FeatureTable table;
  DomainModel domain;
  CorrelationReport correlations;
};

// Features for every package that received a label. The graph comes from
// `graph_source` (the filtered snapshot unless pre-filter counts are asked
// for).
inline FeatureStageResult features_stage(const EcosystemSnapshot& s, const EcosystemSnapshot& graph_source,
                                         const std::map<std::string, Label>& labels, const RunConfig& cfg) {
  std::vector<std::string> names;
  for (const auto& [n, l] : labels) {
    if (s.packages.count(n)) names.push_back(n);
  }
  FeatureStageResult out;
  out.domain = fit_domain_model(keyword_corpus(s, names), cfg.stage_seed("domain"));
  const DepGraph g = build_graph(graph_source);
  // Packages removed by the filters have no node in the filtered graph;
  // pre-filter graphs may lack nothing we need.
  out.table.rows = derive_features(s, g, out.domain, cfg.snapshot_date, names, resolve_threads(cfg.threads));
  for (const auto& r : out.table.rows) out.table.labels.push_back(static_cast<int>(labels.at(r.package)));
  Matrix m = out.table.dataset().x;
  out.correlations = correlation_audit(
      m, std::vector<std::string>(feature_names().begin(), feature_names().end()), cfg.correlation_keep);
  return out;
}

inline std::string features_csv(const FeatureTable& t, const Json& prov) {
  std::ostringstream out;
  write_csv_provenance(out, prov);
  write_features_csv(out, t);
  return out.str();
}

inline FeatureTable read_features_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kMissingFile, "cannot open " + path);
  return read_features_csv(f);
}

inline Dataset labeled_dataset(const FeatureTable& t) {
  Dataset d = t.dataset();
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.y[i] >= 0) keep.push_back(i);
  }
  return keep.size() == d.size() ? d : d.subset(keep);
}

struct TrainResult {
  ForestModel model;
  DatasetSplit split;
  std::optional<CvResult> cv;
};

inline TrainResult train_stage(const Dataset& data, const RunConfig& cfg) {
  TrainResult out;
  out.split = split_dataset(data.y, cfg.stage_seed("split"), cfg.stratify);
  const Dataset train = data.subset(out.split.train_indices);
  ForestParams params = cfg.forest;
  const std::size_t threads = resolve_threads(cfg.threads);
  if (cfg.tune) {
    out.cv = tune_cv(train, default_grid(), cfg.stage_seed("tune"), 10, threads);
    params = out.cv->best;
  }
  out.model = train_forest(train, params, cfg.stage_seed("forest"), threads);
  Json holdout = Json::array();
  for (auto i : out.split.test_indices) holdout.push_back(data.row_ids[i]);
  out.model.metadata["split"] = Json{{"stratified", cfg.stratify},
                                     {"train_rows", out.split.train_indices.size()},
                                     {"test_rows", out.split.test_indices.size()}};
  out.model.metadata["holdout"] = holdout;
  if (out.cv) {
    Json grid = Json::array();
    for (const auto& [p, auc] : out.cv->mean_auc) {
      grid.push_back(Json{{"n_trees", p.n_trees}, {"min_samples_split", p.min_samples_split}, {"mean_macro_auc", auc}});
    }
    out.model.metadata["cv"] = grid;
  }
  return out;
}

// Rows of `data` named in the model's holdout list, or every row when the
// model carries none.
inline Dataset holdout_rows(const ForestModel& m, const Dataset& data) {
  if (!m.metadata.contains("holdout")) return data;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < data.size(); ++i) index.emplace(data.row_ids[i], i);
  std::vector<std::size_t> rows;
  for (const auto& name : m.metadata["holdout"]) {
    auto it = index.find(name.get<std::string>());
    if (it == index.end()) {
      throw Error(ErrorCode::kUnknownPackage, "holdout package '" + name.get<std::string>() + "' not in features");
    }
    rows.push_back(it->second);
  }
  return data.subset(rows);
}

inline std::vector<int> train_labels_of(const ForestModel& m, const Dataset& data) {
  std::map<std::string, bool> held;
  if (m.metadata.contains("holdout")) {
    for (const auto& name : m.metadata["holdout"]) held[name.get<std::string>()] = true;
  }
  std::vector<int> y;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!held.count(data.row_ids[i])) y.push_back(data.y[i]);
  }
  return y;
}

inline Json evaluate_stage(const ForestModel& m, const Dataset& test, const std::vector<int>& train_labels,
                           const RunConfig& cfg) {
  const std::size_t threads = resolve_threads(cfg.threads);
  Json j;
  j["test_rows"] = test.size();
  j["model"] = evaluate(m.predict(test.x, threads), test.y).to_json();
  j["baseline_stratified"] =
      evaluate(baseline_stratified(train_labels, test.size(), cfg.stage_seed("baseline")), test.y).to_json();
  j["baseline_balanced"] = evaluate(baseline_balanced(test.size()), test.y).to_json();
  return j;
}

struct ExplainResult {
  std::optional<ImportanceReport> importance;
  std::vector<PDPGrid> pdps;
};

inline ExplainResult explain_stage(const ForestModel& m, const Dataset& test, const RunConfig& cfg, bool importance,
                                   bool pdp) {
  const std::size_t threads = resolve_threads(cfg.threads);
  ExplainResult out;
  if (importance) {
    out.importance = permutation_importance(m, test, cfg.stage_seed("importance"), cfg.importance_repeats, threads);
  }
  if (pdp) {
    std::vector<std::size_t> features;
    if (!cfg.pdp_features.empty()) {
      for (const auto& name : cfg.pdp_features) {
        auto it = std::find(m.feature_names.begin(), m.feature_names.end(), name);
        if (it == m.feature_names.end()) throw Error(ErrorCode::kInvalidArgument, "unknown feature '" + name + "'");
        features.push_back(static_cast<std::size_t>(it - m.feature_names.begin()));
      }
    } else if (out.importance) {
      const auto rank = out.importance->ranking();
      for (std::size_t i = 0; i < rank.size() && i < cfg.pdp_top; ++i) features.push_back(rank[i]);
    } else {
      for (const char* name : {"release_status", "dependent_count", "age_months"}) {
        auto it = std::find(m.feature_names.begin(), m.feature_names.end(), name);
        if (it != m.feature_names.end()) features.push_back(static_cast<std::size_t>(it - m.feature_names.begin()));
      }
    }
    PdpOptions opt;
    opt.grid_points = cfg.pdp_grid;
    opt.seed = cfg.stage_seed("pdp");
    for (auto f : features) {
      out.pdps.push_back(partial_dependence(m, test.x, f, is_categorical_feature(m.feature_names[f]), opt, threads));
    }
  }
  return out;
}

inline std::string importance_csv(const ImportanceReport& r, const Json& prov) {
  std::ostringstream out;
  write_csv_provenance(out, prov);
  std::vector<std::string> header{"feature", "rank", "mean", "q1", "median", "q3", "min", "max"};
  for (int i = 0; i < r.repetitions; ++i) header.push_back("rep_" + std::to_string(i + 1));
  write_csv_row(out, header);
  const auto rank = r.ranking();
  std::vector<std::size_t> position(rank.size());
  for (std::size_t i = 0; i < rank.size(); ++i) position[rank[i]] = i + 1;
  for (std::size_t f = 0; f < r.features.size(); ++f) {
    const auto& fi = r.features[f];
    std::vector<std::string> row{fi.feature,         std::to_string(position[f]), format_double(fi.mean),
                                 format_double(fi.q1), format_double(fi.median),   format_double(fi.q3),
                                 format_double(fi.min), format_double(fi.max)};
    for (double d : fi.drops) row.push_back(format_double(d));
    write_csv_row(out, row);
  }
  return out.str();
}

inline std::string pdp_csv(const PDPGrid& g, Label label, const Json& prov) {
  std::ostringstream out;
  Json p = prov;
  std::string deciles;
  for (double d : g.deciles) deciles += (deciles.empty() ? "" : " ") + format_double(d);
  p["deciles"] = g.deciles;
  write_csv_provenance(out, p);
  write_csv_row(out, {"grid_value", "mean_probability"});
  for (std::size_t i = 0; i < g.grid.size(); ++i) {
    write_csv_row(out, {format_double(g.grid[i]),
                        format_double(g.mean_probability[i][static_cast<std::size_t>(label)])});
  }
  return out.str();
}

inline void write_explain_outputs(const std::filesystem::path& dir, const ExplainResult& r,
                                  const std::vector<Label>& classes, const Json& prov) {
  if (r.importance) write_atomic(dir / "importance.csv", importance_csv(*r.importance, prov));
  for (const auto& g : r.pdps) {
    for (Label l : classes) {
      write_atomic(dir / ("pdp_" + std::string(to_string(l)) + "_" + g.feature + ".csv"), pdp_csv(g, l, prov));
    }
  }
}

// ---------------------------------------------------------------------------
// End-to-end run: ingest, graph, label, features, train, evaluate, explain.
// Every artifact lands in cfg.out_dir.
inline void run_pipeline(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  const Json config = cfg.hashed_json();
  const std::size_t threads = resolve_threads(cfg.threads);
  auto prov = [&](std::string_view stage) { return provenance(config, stage); };

  IngestResult ingested = run_stage("ingest", [&] {
    auto r = ingest_stage(cfg);
    std::ostringstream eco;
    write_ndjson(eco, r.filtered, prov("ingest"));
    write_atomic(dir / "eco.ndjson", eco.str());
    Json body;
    body["report"] = r.report;
    body["summary"] = ecosystem_summary(r.filtered);
    write_json_artifact(dir / "ingest-report.json", body, prov("ingest"));
    return r;
  });
  const EcosystemSnapshot& eco = ingested.filtered;

  run_stage("graph", [&] {
    const DepGraph g = build_graph(cfg.pre_filter_graph ? ingested.unfiltered : eco);
    write_atomic(dir / "graph-metrics.csv", graph_metrics_csv(g, threads, prov("graph")));
  });

  const auto labels = run_stage("label", [&] {
    const auto dists = all_distributions(eco, threads);
    auto l = label_distributions(dists, cfg.threshold);
    write_atomic(dir / "labels.csv", labels_csv(l, prov("label")));
    write_atomic(dir / "label-sweep.csv", sweep_csv(threshold_sweep(dists, default_sweep_thresholds()), prov("label")));
    write_json_artifact(dir / "label-audit.json", label_audit(dists), prov("label"));
    return l;
  });

  const auto features = run_stage("features", [&] {
    std::map<std::string, Label> plain;
    for (const auto& [n, pl] : labels) plain.emplace(n, pl.label.value);
    auto r = features_stage(eco, cfg.pre_filter_graph ? ingested.unfiltered : eco, plain, cfg);
    write_atomic(dir / "features.csv", features_csv(r.table, prov("features")));
    write_json_artifact(dir / "domain-model.json", r.domain.to_json(), prov("features"));
    write_json_artifact(dir / "correlations.json", r.correlations.to_json(), prov("features"));
    return r;
  });
  const Dataset data = labeled_dataset(features.table);

  const auto trained = run_stage("train", [&] {
    auto r = train_stage(data, cfg);
    Json model = forest_to_json(r.model);
    write_json_artifact(dir / "model.json", model, prov("train"));
    return r;
  });
  const Dataset test = data.subset(trained.split.test_indices);

  run_stage("evaluate", [&] {
    std::vector<int> train_y;
    for (auto i : trained.split.train_indices) train_y.push_back(data.y[i]);
    write_json_artifact(dir / "report.json", evaluate_stage(trained.model, test, train_y, cfg), prov("evaluate"));
  });

  run_stage("explain", [&] {
    const auto r = explain_stage(trained.model, test, cfg, true, true);
    write_explain_outputs(dir / "explain", r, std::vector<Label>(kLabelOrder.begin(), kLabelOrder.end()),
                          prov("explain"));
  });
}

}  // namespace depstrat
