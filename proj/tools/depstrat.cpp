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

// depstrat command-line interface.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "depstrat/evolution.hpp"
#include "depstrat/pipeline.hpp"
#include "depstrat/semver.hpp"
#include "depstrat/synthetic.hpp"

namespace fs = std::filesystem;
using namespace depstrat;

namespace {

enum ExitCode { kOk = 0, kInternalFailure = 1, kBadInput = 2 };

struct Options {
  std::size_t threads = 0;

  // ingest / pipeline
  std::string projects, versions, dependencies, snapshot, denylist;
  std::string in, out, out_dir, report;
  bool no_filter = false;
  std::int64_t min_dependents = 2;

  // label
  double threshold = 0.5;
  std::string sweep, audit, labels;

  // features
  bool audit_correlations = false;
  std::string domain_out;

  // train
  std::uint64_t seed = 42;
  int trees = 500;
  int min_split = 8;
  int features_per_split = 0;
  bool tune = false;
  bool no_stratify = false;
  bool pre_filter_graph = false;

  // evaluate / explain / recommend
  std::string model, features;
  bool all_rows = false;
  bool importance = false;
  bool pdp = false;
  std::string classes = "all";
  std::vector<std::string> pdp_features;
  int grid = 20;
  int repeats = 10;
  std::size_t top = 3;
  std::string package, inline_features;

  // evolve
  std::string from, to, shifts_out;
  bool detect = false;
  int persistence = 3;

  // classify
  std::string range;

  // sample
  std::size_t per_class = 40;
  std::int64_t sample_min = 100;
  std::int64_t sample_max = 1000;

  // synth
  std::size_t targets = 2000;
  std::size_t consumers = 1500;
  double noise = 0.10;
};

Json config_of(std::initializer_list<std::pair<const char*, Json>> fields) {
  Json j;
  for (const auto& [k, v] : fields) j[k] = v;
  return j;
}

std::vector<Label> parse_classes(const std::string& text) {
  if (text == "all") return std::vector<Label>(kLabelOrder.begin(), kLabelOrder.end());
  std::vector<Label> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto l = parse_label(item);
    if (!l) throw Error(ErrorCode::kInvalidArgument, "unknown class '" + item + "'");
    out.push_back(*l);
  }
  return out;
}

fs::path sibling(const std::string& path, const std::string& name) {
  const fs::path p(path);
  return p.has_parent_path() ? p.parent_path() / name : fs::path(name);
}

Date snapshot_or(const std::string& text, const Date& fallback) {
  return text.empty() ? fallback : parse_date(text);
}

RunConfig pipeline_config(const Options& o) {
  RunConfig c;
  c.projects_csv = o.projects;
  c.versions_csv = o.versions;
  c.dependencies_csv = o.dependencies;
  c.denylist = o.denylist;
  c.out_dir = o.out_dir;
  c.threads = o.threads;
  c.snapshot_date = parse_date(o.snapshot);
  c.threshold = o.threshold;
  c.seed = o.seed;
  c.forest = ForestParams{o.trees, o.min_split, o.features_per_split};
  c.stratify = !o.no_stratify;
  c.tune = o.tune;
  c.pre_filter_graph = o.pre_filter_graph;
  c.min_dependents = o.min_dependents;
  c.importance_repeats = o.repeats;
  c.pdp_grid = o.grid;
  c.pdp_top = o.top;
  c.pdp_features = o.pdp_features;
  check_threshold(c.threshold);
  return c;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_atomic(out, text);
  }
}

void cmd_ingest(const Options& o) {
  RunConfig c;
  c.projects_csv = o.projects;
  c.versions_csv = o.versions;
  c.dependencies_csv = o.dependencies;
  c.denylist = o.denylist;
  c.snapshot_date = parse_date(o.snapshot);
  c.min_dependents = o.min_dependents;
  const Json prov = provenance(config_of({{"snapshot_date", to_string(c.snapshot_date)},
                                             {"min_dependents", c.min_dependents},
                                             {"filtered", !o.no_filter}}),
                               "ingest");
  Json body;
  EcosystemSnapshot eco;
  if (o.no_filter) {
    IngestReport rep;
    eco = load_librariesio(c.projects_csv, c.versions_csv, c.dependencies_csv, c.snapshot_date, &rep);
    body["report"] = rep.to_json();
  } else {
    auto r = ingest_stage(c);
    eco = std::move(r.filtered);
    body["report"] = r.report;
  }
  body["summary"] = ecosystem_summary(eco);
  std::ostringstream ss;
  write_ndjson(ss, eco, prov);
  write_atomic(o.out, ss.str());
  write_json_artifact(o.report.empty() ? sibling(o.out, "ingest-report.json") : fs::path(o.report), body, prov);
}

void cmd_graph(const Options& o) {
  const auto eco = read_ndjson_file(o.in);
  const DepGraph g = build_graph(eco);
  if (!o.package.empty()) {
    const auto t = transitive_counts(g, o.package);
    Json j{{"package", o.package},
           {"dependent_count", dependent_count(g, o.package)},
           {"transitive_dependents", t.ancestors},
           {"dependency_count", dependency_count(g, o.package)},
           {"transitive_dependencies", t.descendants}};
    if (o.out.empty()) {
      std::cout << j.dump(2) << "\n";
      return;
    }
  }
  const Json prov = provenance(config_of({{"snapshot_date", to_string(eco.snapshot_date)}}), "graph");
  emit(o.out, graph_metrics_csv(g, resolve_threads(o.threads), prov));
}

void cmd_label(const Options& o) {
  check_threshold(o.threshold);
  const auto eco = read_ndjson_file(o.in);
  const Json prov = provenance(
      config_of({{"snapshot_date", to_string(eco.snapshot_date)}, {"threshold", o.threshold}}), "label");
  const auto dists = all_distributions(eco, resolve_threads(o.threads));
  emit(o.out, labels_csv(label_distributions(dists, o.threshold), prov));
  if (!o.sweep.empty()) write_atomic(o.sweep, sweep_csv(threshold_sweep(dists, default_sweep_thresholds()), prov));
  if (!o.audit.empty()) write_json_artifact(o.audit, label_audit(dists), prov);
}

void cmd_features(const Options& o) {
  const auto eco = read_ndjson_file(o.in);
  std::ifstream lf(o.labels, std::ios::binary);
  if (!lf) throw Error(ErrorCode::kMissingFile, "cannot open " + o.labels);
  std::map<std::string, Label> labels;
  for (const auto& [name, row] : read_labels_csv(lf)) labels.emplace(name, row.label);
  RunConfig c;
  c.seed = o.seed;
  c.threads = o.threads;
  c.snapshot_date = snapshot_or(o.snapshot, eco.snapshot_date);
  for (const auto& [name, l] : labels) {
    if (!eco.packages.count(name)) throw Error(ErrorCode::kUnknownPackage, "labeled package '" + name + "' not in snapshot");
  }
  auto r = features_stage(eco, eco, labels, c);
  const Json prov =
      provenance(config_of({{"snapshot_date", to_string(c.snapshot_date)}, {"seed", c.seed}}), "features");
  emit(o.out, features_csv(r.table, prov));
  if (o.audit_correlations) write_json_artifact(sibling(o.out, "correlations.json"), r.correlations.to_json(), prov);
  if (!o.domain_out.empty()) write_json_artifact(o.domain_out, r.domain.to_json(), prov);
}

void cmd_train(const Options& o) {
  const Dataset data = labeled_dataset(read_features_file(o.features));
  RunConfig c;
  c.seed = o.seed;
  c.threads = o.threads;
  c.forest = ForestParams{o.trees, o.min_split, o.features_per_split};
  c.stratify = !o.no_stratify;
  c.tune = o.tune;
  const auto r = train_stage(data, c);
  const Json prov = provenance(config_of({{"seed", c.seed},
                                             {"n_trees", c.forest.n_trees},
                                             {"min_samples_split", c.forest.min_samples_split},
                                             {"features_per_split", c.forest.features_per_split},
                                             {"stratify", c.stratify},
                                             {"tune", c.tune}}),
                               "train");
  write_json_artifact(o.out, forest_to_json(r.model), prov);
}

ForestModel load_model(const std::string& path) { return forest_from_json(read_json_file(path)); }

void cmd_evaluate(const Options& o) {
  const ForestModel m = load_model(o.model);
  const Dataset data = labeled_dataset(read_features_file(o.features));
  const Dataset test = o.all_rows ? data : holdout_rows(m, data);
  RunConfig c;
  c.seed = o.seed;
  c.threads = o.threads;
  auto train_y = train_labels_of(m, data);
  if (train_y.empty()) train_y = data.y;
  const Json prov = provenance(config_of({{"seed", c.seed}, {"all_rows", o.all_rows}}), "evaluate");
  const Json body = evaluate_stage(m, test, train_y, c);
  if (o.out.empty()) {
    std::cout << body.dump(2) << "\n";
  } else {
    write_json_artifact(o.out, body, prov);
  }
}

void cmd_explain(const Options& o) {
  if (!o.importance && !o.pdp) throw Error(ErrorCode::kInvalidArgument, "choose --importance and/or --pdp");
  const ForestModel m = load_model(o.model);
  const Dataset data = labeled_dataset(read_features_file(o.features));
  const Dataset test = o.all_rows ? data : holdout_rows(m, data);
  RunConfig c;
  c.seed = o.seed;
  c.threads = o.threads;
  c.importance_repeats = o.repeats;
  c.pdp_grid = o.grid;
  c.pdp_top = o.top;
  c.pdp_features = o.pdp_features;
  const auto classes = parse_classes(o.classes);
  const auto r = explain_stage(m, test, c, o.importance, o.pdp);
  const Json prov = provenance(config_of({{"seed", c.seed},
                                             {"repeats", c.importance_repeats},
                                             {"grid", c.pdp_grid},
                                             {"top", c.pdp_top},
                                             {"pdp_features", c.pdp_features},
                                             {"all_rows", o.all_rows}}),
                               "explain");
  write_explain_outputs(o.out, r, classes, prov);
}

void cmd_evolve(const Options& o) {
  const auto eco = read_ndjson_file(o.in);
  const auto series = evolution_series(eco, o.package, parse_year_month(o.from), parse_year_month(o.to));
  const Json prov = provenance(
      config_of({{"package", o.package}, {"from", o.from}, {"to", o.to}, {"persistence", o.persistence}}),
      "evolve");
  std::ostringstream ss;
  write_csv_provenance(ss, prov);
  write_evolution_csv(ss, series);
  emit(o.out, ss.str());
  if (o.detect) {
    const auto events = detect_shifts(series, o.persistence);
    const fs::path path = !o.shifts_out.empty() ? fs::path(o.shifts_out)
                                                : (o.out.empty() || o.out == "-" ? fs::path("shifts.json")
                                                                                 : sibling(o.out, "shifts.json"));
    write_json_artifact(path, shifts_to_json(series, events, o.persistence), prov);
  }
}

void cmd_recommend(const Options& o) {
  const ForestModel m = load_model(o.model);
  std::vector<double> x;
  std::string name = o.package;
  if (!o.inline_features.empty()) {
    Json j;
    try {
      j = Json::parse(o.inline_features);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kMalformedInput, std::string("inline features: ") + e.what());
    }
    if (j.is_array()) {
      if (j.size() != m.feature_names.size()) {
        throw Error(ErrorCode::kSchemaMismatch, "inline features need " + std::to_string(m.feature_names.size()) +
                                                    " values, got " + std::to_string(j.size()));
      }
      for (const auto& v : j) {
        if (!v.is_number()) throw Error(ErrorCode::kSchemaMismatch, "inline feature values must be numbers");
        x.push_back(v.get<double>());
      }
    } else if (j.is_object()) {
      if (j.size() != m.feature_names.size()) throw Error(ErrorCode::kSchemaMismatch, "inline features: wrong arity");
      for (const auto& f : m.feature_names) {
        if (!j.contains(f) || !j[f].is_number()) {
          throw Error(ErrorCode::kSchemaMismatch, "inline features: missing numeric '" + f + "'");
        }
        x.push_back(j[f].get<double>());
      }
    } else {
      throw Error(ErrorCode::kSchemaMismatch, "inline features must be a JSON array or object");
    }
    if (name.empty()) name = "<inline>";
  } else {
    if (o.features.empty() || o.package.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "give --features with --package, or --inline");
    }
    const FeatureTable t = read_features_file(o.features);
    const auto row = t.find(o.package);
    if (!row) throw Error(ErrorCode::kUnknownPackage, "package '" + o.package + "' not in " + o.features);
    x.assign(t.rows[*row].values.begin(), t.rows[*row].values.end());
  }
  const Prediction p = m.predict(x);
  Json j;
  j["package"] = name;
  j["predicted"] = to_string(static_cast<Label>(p.predicted));
  Json probs = Json::object();
  for (Label l : kLabelOrder) probs[std::string(to_string(l))] = p.probabilities[static_cast<std::size_t>(l)];
  j["probabilities"] = probs;
  Json context = Json::object();
  for (const char* f : {"release_status", "dependent_count", "age_months"}) {
    auto it = std::find(m.feature_names.begin(), m.feature_names.end(), f);
    if (it != m.feature_names.end()) context[f] = x[static_cast<std::size_t>(it - m.feature_names.begin())];
  }
  j["context"] = context;
  emit(o.out, j.dump(2) + "\n");
}

void cmd_classify(const Options& o) {
  const auto set = semver::parse_range(o.range);
  const auto profile = semver::admission_profile(set);
  Json j;
  j["range"] = o.range;
  j["normalized"] = semver::render(set);
  Json intervals = Json::array();
  for (const auto& iv : set.intervals()) {
    intervals.push_back(Json{{"lower", semver::to_string(iv.lower)},
                             {"lower_inclusive", iv.lower_inclusive},
                             {"upper", iv.upper ? Json(semver::to_string(*iv.upper)) : Json(nullptr)},
                             {"upper_inclusive", iv.upper_inclusive}});
  }
  j["intervals"] = intervals;
  Json pre = Json::array();
  for (const auto& iv : set.prerelease_intervals()) {
    pre.push_back(Json{{"lower", semver::to_string(iv.lower)},
                       {"lower_inclusive", iv.lower_inclusive},
                       {"upper", iv.upper ? Json(semver::to_string(*iv.upper)) : Json(nullptr)},
                       {"upper_inclusive", iv.upper_inclusive}});
  }
  j["prerelease_intervals"] = pre;
  j["min_version"] = semver::to_string(set.min_version());
  j["profile"] = Json{{"pinned", profile.pinned},
                      {"admits_patch", profile.admits_patch},
                      {"admits_minor", profile.admits_minor},
                      {"admits_major", profile.admits_major}};
  j["strategy"] = semver::to_string(semver::classify(set));
  j["mixed_pre_post_1_0_0"] = semver::spans_first_stable(set);
  std::cout << j.dump(2) << "\n";
}

void cmd_pipeline(const Options& o) { run_pipeline(pipeline_config(o)); }

void cmd_sample(const Options& o) {
  check_threshold(o.threshold);
  const auto eco = read_ndjson_file(o.in);
  const auto labels = label_all(eco, o.threshold, resolve_threads(o.threads));
  SampleOptions so;
  so.per_class = o.per_class;
  so.min_dependents = o.sample_min;
  so.max_dependents = o.sample_max > 0 ? std::optional<std::int64_t>(o.sample_max) : std::nullopt;
  so.seed = derive_seed(o.seed, "sample");
  const auto picked = convenience_sample(labels, so);
  const Json prov = provenance(config_of({{"threshold", o.threshold},
                                             {"seed", o.seed},
                                             {"per_class", o.per_class},
                                             {"min_dependents", o.sample_min},
                                             {"max_dependents", o.sample_max}}),
                               "sample");
  std::ostringstream ss;
  write_csv_provenance(ss, prov);
  write_csv_row(ss, {"package", "label", "dependents"});
  for (const auto& p : picked) write_csv_row(ss, {p.package, std::string(to_string(p.label)), std::to_string(p.dependents)});
  emit(o.out, ss.str());
}

void cmd_synth(const Options& o) {
  SynthOptions so;
  so.seed = o.seed;
  so.targets = o.targets;
  so.consumers = o.consumers;
  so.label_noise = o.noise;
  if (!o.snapshot.empty()) so.snapshot_date = parse_date(o.snapshot);
  const auto se = generate_synthetic(so);
  write_librariesio(se.snapshot, o.out_dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"depstrat: dependency update strategy analysis for npm-style ecosystems"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--threads", o.threads, "Worker threads (default: DEPSTRAT_THREADS, then all cores)");

  auto* ingest = app.add_subcommand("ingest", "Load libraries.io CSV exports into a normalized snapshot");
  ingest->add_option("--projects", o.projects, "projects CSV")->required();
  ingest->add_option("--versions", o.versions, "versions CSV")->required();
  ingest->add_option("--dependencies", o.dependencies, "dependencies CSV")->required();
  ingest->add_option("--snapshot", o.snapshot, "Snapshot date (YYYY-MM-DD)")->required();
  ingest->add_option("--out", o.out, "Output NDJSON snapshot")->required();
  ingest->add_option("--report", o.report, "Ingest report path (default: ingest-report.json beside --out)");
  ingest->add_option("--denylist", o.denylist, "File of spam name stems, one per line");
  ingest->add_option("--min-dependents", o.min_dependents, "Runtime dependents needed for the labeled population");
  ingest->add_flag("--no-filter", o.no_filter, "Write the loaded snapshot without filters or imputation");

  auto* graph = app.add_subcommand("graph", "Dependent and transitive counts per package");
  graph->add_option("--in", o.in, "Snapshot NDJSON")->required();
  graph->add_option("--out", o.out, "graph-metrics CSV (default: stdout)");
  graph->add_option("--package", o.package, "Print counts for one package as JSON");

  auto* label = app.add_subcommand("label", "Label packages by their dependents' majority strategy");
  label->add_option("--in", o.in, "Snapshot NDJSON")->required();
  label->add_option("--threshold", o.threshold, "Agreement a label must exceed, in [0.5, 1)");
  label->add_option("--out", o.out, "labels CSV (default: stdout)");
  label->add_option("--sweep", o.sweep, "Also write the threshold sweep table here");
  label->add_option("--audit", o.audit, "Also write excluded/mixed constraint totals here");

  auto* features = app.add_subcommand("features", "Derive the per-package feature table");
  features->add_option("--in", o.in, "Snapshot NDJSON")->required();
  features->add_option("--labels", o.labels, "labels CSV")->required();
  features->add_option("--seed", o.seed, "Seed");
  features->add_option("--snapshot", o.snapshot, "Reference date for ages (default: the snapshot's date)");
  features->add_option("--out", o.out, "features CSV (default: stdout)");
  features->add_flag("--audit-correlations", o.audit_correlations, "Write correlations.json beside --out");
  features->add_option("--domain-model", o.domain_out, "Write the fitted keyword domain model here");

  auto* train = app.add_subcommand("train", "Train the random forest on an 80/20 split");
  train->add_option("--features", o.features, "features CSV")->required();
  train->add_option("--seed", o.seed, "Seed");
  train->add_option("--trees", o.trees, "Number of trees");
  train->add_option("--min-split", o.min_split, "Minimum samples to split a node");
  train->add_option("--features-per-split", o.features_per_split, "Candidate features per node (0: floor(sqrt(d)))");
  train->add_flag("--tune", o.tune, "Pick trees/min-split by 10-fold cross-validation");
  train->add_flag("--no-stratify", o.no_stratify, "Split without stratifying by label");
  train->add_option("--out", o.out, "model JSON")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Metrics for the model and both baselines");
  evaluate->add_option("--model", o.model, "model JSON")->required();
  evaluate->add_option("--features", o.features, "features CSV")->required();
  evaluate->add_option("--seed", o.seed, "Seed for the stratified baseline");
  evaluate->add_flag("--all-rows", o.all_rows, "Evaluate every labeled row instead of the model's holdout");
  evaluate->add_option("--out", o.out, "report JSON (default: stdout)");

  auto* explain = app.add_subcommand("explain", "Permutation importance and partial dependence");
  explain->add_option("--model", o.model, "model JSON")->required();
  explain->add_option("--features", o.features, "features CSV")->required();
  explain->add_flag("--importance", o.importance, "Write importance.csv");
  explain->add_flag("--pdp", o.pdp, "Write pdp_<class>_<feature>.csv");
  explain->add_option("--classes", o.classes, "Comma-separated classes or 'all'");
  explain->add_option("--pdp-features", o.pdp_features, "Features to plot (default: top by importance)")->delimiter(',');
  explain->add_option("--top", o.top, "Number of top-importance features to plot");
  explain->add_option("--grid", o.grid, "Quantile grid points for continuous features");
  explain->add_option("--repeats", o.repeats, "Permutation repetitions");
  explain->add_option("--seed", o.seed, "Seed");
  explain->add_flag("--all-rows", o.all_rows, "Use every labeled row instead of the model's holdout");
  explain->add_option("--out", o.out, "Output directory")->required();

  auto* evolve = app.add_subcommand("evolve", "Monthly dependent strategy counts for one package");
  evolve->add_option("--in", o.in, "Snapshot NDJSON")->required();
  evolve->add_option("--package", o.package, "Target package")->required();
  evolve->add_option("--from", o.from, "First month (YYYY-MM)")->required();
  evolve->add_option("--to", o.to, "Last month (YYYY-MM)")->required();
  evolve->add_option("--out", o.out, "Series CSV (default: stdout)");
  evolve->add_flag("--detect-shifts", o.detect, "Write shifts.json beside --out");
  evolve->add_option("--shifts", o.shifts_out, "Explicit path for shifts.json");
  evolve->add_option("--persistence", o.persistence, "Months a new dominant strategy must hold");

  auto* recommend = app.add_subcommand("recommend", "Predict the common update strategy for a package");
  recommend->add_option("--model", o.model, "model JSON")->required();
  recommend->add_option("--features", o.features, "features CSV");
  recommend->add_option("--package", o.package, "Package to look up in --features");
  recommend->add_option("--inline", o.inline_features, "Feature values as a JSON array or object");
  recommend->add_option("--out", o.out, "Output JSON (default: stdout)");

  auto* classify = app.add_subcommand("classify", "Show the interval set and strategy of one range");
  classify->add_option("range", o.range, "Range expression, e.g. \"^1.2.3\"")->required();

  auto* pipeline = app.add_subcommand("pipeline", "Run ingest through explain end to end");
  pipeline->add_option("--projects", o.projects, "projects CSV")->required();
  pipeline->add_option("--versions", o.versions, "versions CSV")->required();
  pipeline->add_option("--dependencies", o.dependencies, "dependencies CSV")->required();
  pipeline->add_option("--snapshot", o.snapshot, "Snapshot date (YYYY-MM-DD)")->required();
  pipeline->add_option("--out-dir", o.out_dir, "Artifact directory")->required();
  pipeline->add_option("--seed", o.seed, "Seed");
  pipeline->add_option("--threshold", o.threshold, "Label agreement threshold");
  pipeline->add_option("--trees", o.trees, "Number of trees");
  pipeline->add_option("--min-split", o.min_split, "Minimum samples to split a node");
  pipeline->add_option("--features-per-split", o.features_per_split, "Candidate features per node");
  pipeline->add_flag("--tune", o.tune, "Cross-validated grid search before training");
  pipeline->add_flag("--no-stratify", o.no_stratify, "Split without stratifying by label");
  pipeline->add_flag("--pre-filter-graph", o.pre_filter_graph, "Count dependents before spam and kind filters");
  pipeline->add_option("--denylist", o.denylist, "File of spam name stems");
  pipeline->add_option("--min-dependents", o.min_dependents, "Runtime dependents needed for labeling");
  pipeline->add_option("--repeats", o.repeats, "Permutation repetitions");
  pipeline->add_option("--grid", o.grid, "PDP grid points");
  pipeline->add_option("--pdp-top", o.top, "Top-importance features to plot");
  pipeline->add_option("--pdp-features", o.pdp_features, "Features to plot")->delimiter(',');

  auto* sample = app.add_subcommand("sample", "Seeded per-class sample of packages in a dependent-count band");
  sample->add_option("--in", o.in, "Snapshot NDJSON")->required();
  sample->add_option("--threshold", o.threshold, "Label agreement threshold");
  sample->add_option("--per-class", o.per_class, "Packages per class");
  sample->add_option("--min-dependents", o.sample_min, "Lowest dependent count");
  sample->add_option("--max-dependents", o.sample_max, "Highest dependent count (0: unbounded)");
  sample->add_option("--seed", o.seed, "Seed");
  sample->add_option("--out", o.out, "Sample CSV (default: stdout)");

  auto* synth = app.add_subcommand("synth", "Write a synthetic libraries.io-style export with a known labeling rule");
  synth->add_option("--out-dir", o.out_dir, "Directory for projects/versions/dependencies CSVs")->required();
  synth->add_option("--seed", o.seed, "Seed");
  synth->add_option("--targets", o.targets, "Packages that receive labels");
  synth->add_option("--consumers", o.consumers, "Packages that only depend on others");
  synth->add_option("--noise", o.noise, "Share of targets given a different label");
  synth->add_option("--snapshot", o.snapshot, "Snapshot date (YYYY-MM-DD)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  const std::vector<std::pair<CLI::App*, void (*)(const Options&)>> commands = {
      {ingest, cmd_ingest},     {graph, cmd_graph},         {label, cmd_label},   {features, cmd_features},
      {train, cmd_train},       {evaluate, cmd_evaluate},   {explain, cmd_explain}, {evolve, cmd_evolve},
      {recommend, cmd_recommend}, {classify, cmd_classify}, {pipeline, cmd_pipeline}, {sample, cmd_sample},
      {synth, cmd_synth}};
  for (const auto& [sub, fn] : commands) {
    if (!sub->parsed()) continue;
    const std::string stage = sub->get_name();
    try {
      run_stage(stage, [&] { fn(o); });
      return kOk;
    } catch (const StageError& e) {
      std::cerr << "depstrat: error [stage=" << e.stage() << "] " << e.what()
                << "\n";
      return is_input_error(e.code()) ? kBadInput : kInternalFailure;
    }
  }
  return kBadInput;
}
