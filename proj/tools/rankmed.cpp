// rankmed: feature redundancy and relevance analysis over labeled CSV files.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "rankmed/commands.hpp"

namespace {

using rankmed::cli::Options;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInvalid = 2;

struct Invocation {
  Options opts;
  std::string output;
  std::string config;
  std::string format = "json";
};

void add_common(CLI::App* cmd, Invocation& inv) {
  cmd->add_option("input", inv.opts.input, "CSV file, header row required")->required();
  cmd->add_option("--label-column", inv.opts.label_column, "Name of the class label column")
      ->capture_default_str();
  cmd->add_option("--variance-floor", inv.opts.variance_floor,
                  "Drop features whose sample variance is at most this value")
      ->capture_default_str();
  cmd->add_option("--ignore", inv.opts.ignore_columns, "Columns to leave out (comma separated)")->delimiter(',');
  cmd->add_option("--tol", inv.opts.tol,
                    "Relative rank tolerance (env RANKMED_TOL); unset selects the built-in defaults");
  cmd->add_option("-o,--output", inv.output, "Write the report here instead of stdout");
  cmd->add_option("--config", inv.config, "Flat key=value file; keys are long flag names, flags win");
}

void add_solver(CLI::App* cmd, Invocation& inv) {
  cmd->add_option("--gamma", inv.opts.gamma, "Row-sparsity regularization weight")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iters", inv.opts.max_iters, "Solver iteration budget")->capture_default_str();
  cmd->add_option("--rel-tol", inv.opts.rel_tol, "Solver stop on relative objective change")->capture_default_str();
}

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rankmed::Error("cannot open config file " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto body = rankmed::csv::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw rankmed::Error(path + ":" + std::to_string(number) + ": expected key=value");
    out[std::string(rankmed::csv::trim(body.substr(0, eq)))] = std::string(rankmed::csv::trim(body.substr(eq + 1)));
  }
  return out;
}

/// Fills options the command line left unset. Keys that only apply to other
/// subcommands are ignored; unknown keys are an error.
void apply_config(CLI::App& app, CLI::App* cmd, const std::string& path) {
  for (const auto& [key, value] : read_config(path)) {
    if (key == "config" || key == "output") continue;
    CLI::Option* opt = key == "input" ? cmd->get_option_no_throw("input") : cmd->get_option_no_throw("--" + key);
    if (opt == nullptr) {
      bool known = false;
      for (const auto* other : app.get_subcommands({}))
        known = known || other->get_option_no_throw("--" + key) != nullptr;
      if (!known) throw rankmed::Error("unknown config key '" + key + "'");
      continue;
    }
    if (opt->count() > 0) continue;
    if (opt->get_expected_min() == 0) {
      // Flags: accept true/false spellings.
      if (value == "true" || value == "1" || value == "yes") opt->add_result("true");
      else if (value == "false" || value == "0" || value == "no") continue;
      else throw rankmed::Error("config key '" + key + "' expects true or false");
    } else {
      opt->add_result(value);
    }
    opt->run_callback();
  }
}

void resolve_tolerance(Options& opts, bool given_as_flag) {
  if (opts.tol) {
    opts.tol_source = given_as_flag ? "flag" : "config";
    return;
  }
  if (const char* env = std::getenv("RANKMED_TOL"); env != nullptr && *env != '\0') {
    const auto v = rankmed::csv::parse_number(env);
    if (!v) throw rankmed::Error(std::string("RANKMED_TOL='") + env + "' is not a number");
    opts.tol = *v;
    opts.tol_source = "env";
  }
}

void emit(const Invocation& inv, const std::string& text) {
  if (inv.output.empty() || inv.output == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(inv.output);
  if (!out) throw rankmed::Error("cannot write " + inv.output);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature redundancy (rank-preserving k-medoids) and relevance (compensated l2,1 regression) analysis"};
  app.set_version_flag("--version", std::string(rankmed::kToolName) + " " + rankmed::kVersion);
  app.require_subcommand(1);

  Invocation inv;

  auto* spectrum = app.add_subcommand("spectrum", "Eigen spectrum of F F^T / n as TSV");
  add_common(spectrum, inv);

  auto* cluster = app.add_subcommand("cluster", "Rank-preserving clusters and medoids (JSON)");
  add_common(cluster, inv);

  auto* relevance = app.add_subcommand("relevance", "Per-class and total feature relevance (JSON + TSV)");
  add_common(relevance, inv);
  add_solver(relevance, inv);
  relevance->add_flag("--no-compensation", inv.opts.no_compensation,
                      "Skip class-occurrence compensation (plain z-score, unscaled design)");
  relevance->add_flag("--medoids-only", inv.opts.medoids_only, "Score only the cluster medoids");
  relevance->add_option("--per-class-tsv", inv.opts.per_class_tsv, "Write the per-class score table here");
  relevance->add_option("--total-tsv", inv.opts.total_tsv, "Write the total score table here");

  auto* select = app.add_subcommand("select", "Medoids minus the N least relevant (JSON or text)");
  add_common(select, inv);
  add_solver(select, inv);
  select->add_option("--drop-bottom", inv.opts.drop_bottom, "Number of lowest-relevance medoids to drop")
      ->capture_default_str();
  select->add_option("--format", inv.format, "json or text")->check(CLI::IsMember({"json", "text"}))->capture_default_str();

  auto* evaluate = app.add_subcommand("evaluate", "Cross-validated decision-tree TP/FP rates (JSON)");
  add_common(evaluate, inv);
  add_solver(evaluate, inv);
  evaluate->add_option("--features", inv.opts.features, "Feature names or 1-based indices (comma separated)")
      ->delimiter(',');
  evaluate->add_option("--auto", inv.opts.auto_drop, "Evaluate the `select --drop-bottom N` subset");
  evaluate->add_option("--folds", inv.opts.folds, "Cross-validation folds")->capture_default_str();
  evaluate->add_option("--max-depth", inv.opts.max_depth, "Tree depth limit")->capture_default_str();
  evaluate->add_option("--min-leaf", inv.opts.min_leaf, "Minimum instances per leaf")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  CLI::App* cmd = app.get_subcommands().front();
  try {
    const bool had_tol_flag = inv.opts.tol.has_value();
    if (!inv.config.empty()) apply_config(app, cmd, inv.config);
    resolve_tolerance(inv.opts, had_tol_flag);
    if (inv.opts.tol && !(*inv.opts.tol > 0.0)) throw rankmed::DomainError("--tol must be > 0");

    if (cmd == spectrum) {
      std::ostringstream out;
      rankmed::cli::spectrum(inv.opts, out);
      emit(inv, out.str());
    } else if (cmd == cluster) {
      emit(inv, rankmed::cli::cluster(inv.opts).dump(2) + "\n");
    } else if (cmd == relevance) {
      emit(inv, rankmed::cli::relevance(inv.opts).dump(2) + "\n");
    } else if (cmd == select) {
      const auto report = rankmed::cli::select(inv.opts);
      emit(inv, inv.format == "text" ? rankmed::cli::select_text(report) : report.dump(2) + "\n");
    } else if (cmd == evaluate) {
      emit(inv, rankmed::cli::evaluate(inv.opts).dump(2) + "\n");
    }
  } catch (const rankmed::Error& e) {
    std::cerr << "rankmed: error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "rankmed: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}
