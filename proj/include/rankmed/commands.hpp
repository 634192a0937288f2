#pragma once

// Command implementations behind the `rankmed` executable. Each command
// takes fully resolved options and returns its report, so the same code
// path is exercised by the CLI and by the tests.

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <iterator>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rankmed/compensation.hpp"
#include "rankmed/dataset.hpp"
#include "rankmed/evaluate.hpp"
#include "rankmed/pipeline.hpp"
#include "rankmed/rank.hpp"
#include "rankmed/redundancy.hpp"
#include "rankmed/relevance.hpp"
#include "rankmed/tsv.hpp"
#include "rankmed/version.hpp"

namespace rankmed::cli {

using json = nlohmann::json;

struct Options {
  std::string input;
  std::string label_column = "label";
  double variance_floor = 0.0;
  std::vector<std::string> ignore_columns;

  std::optional<double> tol;  // relative; unset selects the per-test defaults
  std::string tol_source = "default";

  double gamma = 1.0;
  int max_iters = 200;
  double rel_tol = 1e-7;
  bool no_compensation = false;
  bool medoids_only = false;
  std::string per_class_tsv;
  std::string total_tsv;

  std::size_t drop_bottom = 0;

  std::vector<std::string> features;
  std::optional<std::size_t> auto_drop;
  int folds = 10;
  int max_depth = 12;
  std::size_t min_leaf = 2;
};

inline Dataset load(const Options& o) {
  return load_csv(o.input, LoadOptions{o.label_column, o.variance_floor, o.ignore_columns});
}

inline double cluster_tolerance(const Options& o, const FeatureMatrix& f) {
  return o.tol ? *o.tol : default_residual_tolerance(f.features(), f.instances());
}

inline SolverConfig solver_config(const Options& o) {
  SolverConfig c;
  c.gamma = o.gamma;
  c.max_iters = o.max_iters;
  c.rel_tol = o.rel_tol;
  return c;
}

inline json feature_ref(const FeatureMatrix& f, std::size_t j) {
  return json{{"index", j + 1}, {"name", f.name(j)}};
}

inline json feature_refs(const FeatureMatrix& f, const std::vector<std::size_t>& js) {
  json out = json::array();
  for (auto j : js) out.push_back(feature_ref(f, j));
  return out;
}

/// Resolves feature references given as names or 1-based indices. A token
/// that matches a feature name is a name even if it looks like a number.
inline std::vector<std::size_t> resolve_features(const FeatureMatrix& f, const std::vector<std::string>& refs) {
  std::vector<std::size_t> out;
  for (const auto& raw : refs) {
    const std::string ref(csv::trim(raw));
    const auto& names = f.names();
    const auto it = std::find(names.begin(), names.end(), ref);
    if (it != names.end()) {
      out.push_back(static_cast<std::size_t>(it - names.begin()));
      continue;
    }
    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(ref.data(), ref.data() + ref.size(), index);
    if (ec != std::errc() || ptr != ref.data() + ref.size() || index < 1 || index > f.features())
      throw DomainError("unknown feature '" + ref + "'");
    out.push_back(index - 1);
  }
  if (out.empty()) throw DomainError("feature list is empty");
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) throw DomainError("feature list repeats a feature");
  return out;
}

inline json report_header(const std::string& command, const Dataset& data, const Options& o) {
  json classes = json::array();
  for (std::size_t l = 0; l < data.labels.classes(); ++l)
    classes.push_back({{"code", l + 1}, {"name", data.labels.class_names()[l]}, {"count", data.labels.class_counts()[l]}});
  std::vector<std::size_t> all(data.features.features());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return json{
      {"tool", kToolName},
      {"version", kVersion},
      {"command", command},
      {"source", {{"path", data.source.path}, {"sha256", data.source.sha256}}},
      {"label_column", data.label_column},
      {"instances", data.features.instances()},
      {"classes", classes},
      {"features", feature_refs(data.features, all)},
      {"dropped_features", data.dropped_features},
      {"variance_floor", o.variance_floor},
      {"ignored_columns", o.ignore_columns},
  };
}

inline json tolerance_json(const Options& o, double effective) {
  return json{{"value", effective}, {"source", o.tol ? o.tol_source : std::string("default")}};
}

inline json partition_json(const FeatureMatrix& f, const ClusterPartition& p) {
  json clusters = json::array();
  json indices = json::array();
  for (const auto& members : p.clusters) {
    json names = json::array();
    json idx = json::array();
    for (auto j : members) {
      names.push_back(f.name(j));
      idx.push_back(j + 1);
    }
    clusters.push_back(names);
    indices.push_back(idx);
  }
  json medoids = json::array();
  json medoid_indices = json::array();
  for (auto j : p.medoids) {
    medoids.push_back(f.name(j));
    medoid_indices.push_back(j + 1);
  }
  json seeds = json::array();
  for (auto j : p.seeds) seeds.push_back(j + 1);
  return json{{"k", p.k()},
              {"clusters", clusters},
              {"cluster_indices", indices},
              {"seed_indices", seeds},
              {"medoids", medoids},
              {"medoid_indices", medoid_indices},
              {"rank_checks", p.rank_checks},
              {"rank_check_bound", rank_check_bound(f.features())},
              {"distance", "euclidean between z-scored feature rows"}};
}

/// Eigen spectrum of the raw feature matrix as TSV. --tol is a relative
/// singular-value tolerance, so eigenvalues are cut at tol^2 * lambda_max.
inline void spectrum(const Options& o, std::ostream& out) {
  const auto data = load(o);
  const double threshold = o.tol ? (*o.tol) * (*o.tol) : 0.0;
  const auto s = eigen_spectrum(data.features, threshold);
  tsv::Meta meta{{"tool", std::string(kToolName) + " " + kVersion},
                 {"command", "spectrum"},
                 {"source", data.source.path},
                 {"sha256", data.source.sha256},
                 {"features", std::to_string(data.features.features())},
                 {"instances", std::to_string(data.features.instances())},
                 {"eigenvalue_threshold", tsv::format_g(s.threshold, 17)}};
  tsv::write_spectrum(out, s, meta);
}

inline json cluster(const Options& o) {
  const auto data = load(o);
  const auto& f = data.features;
  const double tol = cluster_tolerance(o, f);
  const auto partition = find_medoids(f, tol);
  const auto spectrum = eigen_spectrum(f, tol * tol);
  const auto medoid_rank = rankmed::medoid_rank(partition, f);

  json warnings = json::array();
  if (spectrum.effective_rank != partition.k())
    warnings.push_back("k = " + std::to_string(partition.k()) + " differs from the effective rank " +
                       std::to_string(spectrum.effective_rank) + " at the matching threshold");
  if (medoid_rank < partition.k())
    warnings.push_back("the medoid set has rank " + std::to_string(medoid_rank) + " < k = " +
                       std::to_string(partition.k()));

  json r = report_header("cluster", data, o);
  r["tolerance"] = tolerance_json(o, tol);
  r.update(partition_json(f, partition));
  r["effective_rank"] = spectrum.effective_rank;
  r["medoid_rank"] = medoid_rank;
  r["warnings"] = warnings;
  return r;
}

inline json relevance_json(const FeatureMatrix& f, const RelevanceRun& run, const LabelVector& labels) {
  json scores = json::array();
  for (std::size_t r = 0; r < run.features.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    json pc = json::array();
    for (Eigen::Index l = 0; l < run.scores.per_class.cols(); ++l) pc.push_back(run.scores.per_class(row, l));
    scores.push_back({{"index", run.features[r] + 1},
                      {"name", f.name(run.features[r])},
                      {"total", run.scores.total(row)},
                      {"per_class", pc}});
  }
  json ranking = json::array();
  for (const auto& rf : rank_features(run.scores.total)) ranking.push_back(run.features[rf.index] + 1);
  return json{{"compensated", run.compensated},
              {"normalization", run.compensated ? "class-balanced z-score" : "z-score"},
              {"class_names", labels.class_names()},
              {"scores", scores},
              {"ranking", ranking},
              {"solver",
               {{"iterations", run.report.iterations},
                {"converged", run.report.converged},
                {"final_objective", run.report.objective_trace.back()},
                {"initial_objective", run.report.objective_trace.front()}}}};
}

inline tsv::ScoreTable total_table(const FeatureMatrix& f, const RelevanceRun& run) {
  tsv::ScoreTable t;
  t.columns = {"total"};
  for (std::size_t r = 0; r < run.features.size(); ++r) {
    t.index.push_back(run.features[r] + 1);
    t.name.push_back(f.name(run.features[r]));
    t.values.push_back({run.scores.total(static_cast<Eigen::Index>(r))});
  }
  return t;
}

inline tsv::ScoreTable per_class_table(const FeatureMatrix& f, const RelevanceRun& run, const LabelVector& labels) {
  tsv::ScoreTable t;
  t.columns = labels.class_names();
  for (std::size_t r = 0; r < run.features.size(); ++r) {
    t.index.push_back(run.features[r] + 1);
    t.name.push_back(f.name(run.features[r]));
    std::vector<double> row;
    for (Eigen::Index l = 0; l < run.scores.per_class.cols(); ++l)
      row.push_back(run.scores.per_class(static_cast<Eigen::Index>(r), l));
    t.values.push_back(std::move(row));
  }
  return t;
}

inline void write_table_file(const std::string& path, const tsv::ScoreTable& t) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  tsv::write_scores(out, t);
}

inline json relevance(const Options& o) {
  const auto data = load(o);
  const auto& f = data.features;
  if (data.labels.classes() < 2)
    throw DomainError("relevance needs at least two classes; '" + data.label_column + "' has one");

  json r = report_header("relevance", data, o);
  std::vector<std::size_t> subset(f.features());
  std::iota(subset.begin(), subset.end(), std::size_t{0});
  if (o.medoids_only) {
    const double tol = cluster_tolerance(o, f);
    const auto partition = find_medoids(f, tol);
    subset = select_features(partition);
    r["tolerance"] = tolerance_json(o, tol);
    r["partition"] = partition_json(f, partition);
  }
  const auto run = run_relevance(f, data.labels, subset, !o.no_compensation, solver_config(o));
  r["gamma"] = o.gamma;
  r["max_iters"] = o.max_iters;
  r["rel_tol"] = o.rel_tol;
  r["medoids_only"] = o.medoids_only;
  r.update(relevance_json(f, run, data.labels));

  if (!o.total_tsv.empty()) write_table_file(o.total_tsv, total_table(f, run));
  if (!o.per_class_tsv.empty()) write_table_file(o.per_class_tsv, per_class_table(f, run, data.labels));
  return r;
}

struct Selection {
  ClusterPartition partition;
  RelevanceRun relevance;
  std::vector<std::size_t> selected;
  std::vector<std::size_t> dropped;
};

/// Medoids minus the `drop` lowest-relevance medoids; relevance is computed
/// with compensation over the medoid subset only.
inline Selection select_subset(const Dataset& data, const Options& o, std::size_t drop) {
  const auto& f = data.features;
  auto partition = find_medoids(f, cluster_tolerance(o, f));
  const auto medoids = select_features(partition);
  if (drop >= medoids.size())
    throw DomainError("--drop-bottom " + std::to_string(drop) + " must be smaller than k = " +
                      std::to_string(medoids.size()));
  auto run = run_relevance(f, data.labels, medoids, true, solver_config(o));
  auto selected = drop_lowest(medoids, run.scores.total, drop);
  std::vector<std::size_t> dropped;
  std::set_difference(medoids.begin(), medoids.end(), selected.begin(), selected.end(), std::back_inserter(dropped));
  return Selection{std::move(partition), std::move(run), std::move(selected), std::move(dropped)};
}

inline json select(const Options& o) {
  const auto data = load(o);
  const auto& f = data.features;
  const auto sel = select_subset(data, o, o.drop_bottom);
  json r = report_header("select", data, o);
  r["tolerance"] = tolerance_json(o, sel.partition.tolerance);
  r["gamma"] = o.gamma;
  r["drop_bottom"] = o.drop_bottom;
  r["partition"] = partition_json(f, sel.partition);
  r["relevance"] = relevance_json(f, sel.relevance, data.labels);
  r["dropped"] = feature_refs(f, sel.dropped);
  r["selected"] = feature_refs(f, sel.selected);
  return r;
}

/// One "index<TAB>name" line per selected feature.
inline std::string select_text(const json& report) {
  std::ostringstream out;
  for (const auto& s : report.at("selected"))
    out << s.at("index").get<std::size_t>() << '\t' << s.at("name").get<std::string>() << '\n';
  return out.str();
}

inline json eval_json(const FeatureMatrix& f, const LabelVector& labels, const EvalResult& e) {
  json per_class = json::array();
  for (std::size_t l = 0; l < labels.classes(); ++l)
    per_class.push_back({{"class", labels.class_names()[l]}, {"tp", e.tp_rate[l]}, {"fp", e.fp_rate[l]}});
  return json{{"subset", feature_refs(f, e.feature_subset)},
              {"folds", e.folds},
              {"per_class", per_class},
              {"weighted_tp", e.weighted_tp},
              {"weighted_fp", e.weighted_fp},
              {"confusion", e.confusion}};
}

inline json evaluate(const Options& o) {
  const auto data = load(o);
  const auto& f = data.features;
  if (!o.features.empty() && o.auto_drop)
    throw DomainError("--features and --auto are mutually exclusive");

  json r = report_header("evaluate", data, o);
  std::vector<std::size_t> subset;
  if (o.auto_drop) {
    const auto sel = select_subset(data, o, *o.auto_drop);
    subset = sel.selected;
    r["tolerance"] = tolerance_json(o, sel.partition.tolerance);
    r["gamma"] = o.gamma;
    r["selection"] = {{"drop_bottom", *o.auto_drop},
                      {"medoids", feature_refs(f, select_features(sel.partition))},
                      {"dropped", feature_refs(f, sel.dropped)}};
  } else if (!o.features.empty()) {
    subset = resolve_features(f, o.features);
  } else {
    subset.resize(f.features());
    std::iota(subset.begin(), subset.end(), std::size_t{0});
  }
  const auto e = evaluate_subset(f, data.labels, subset, o.folds, TreeConfig{o.max_depth, o.min_leaf});
  r["classifier"] = {{"kind", "cart-gini"}, {"max_depth", o.max_depth}, {"min_leaf", o.min_leaf}};
  r.update(eval_json(f, data.labels, e));
  return r;
}

}  // namespace rankmed::cli
