#pragma once

// Cross-validated experiment recipes and result tables.

#include "qlap/digraph.hpp"
#include "qlap/laplacian.hpp"
#include "qlap/qgcn.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qlap {

struct ExperimentSpec {
  Task task = Task::NC;
  DsbmConfig generator = DsbmConfig::di150(0.2);
  std::string edge_path;   // when set, the graph is loaded instead of generated
  std::string label_path;  // NC only
  LaplacianKind laplacian = LaplacianKind::Quaternionic;
  ModelConfig model;
  SplitFractions fractions;
  int folds = 10;
  std::uint64_t seed_base = 0;

  void validate() const;
  /// NC: 10 folds of 60/20/20. 3CEP: 10 folds of 80/5/15 (train/val/test).
  /// 4/5CEP: 5 folds of 80/0/20, signed generator, 300 epochs.
  static ExperimentSpec defaults_for(Task task);
  /// Everything except the Laplacian, for comparing specs.
  std::string data_key() const;
};

/// `key = value` lines with [experiment], [data], [model] and [split]
/// sections; `#` starts a comment. Unknown keys are errors.
ExperimentSpec parse_experiment_config(std::istream& is);

Digraph experiment_graph(const ExperimentSpec& spec);

struct ResultTable {
  std::string label;
  std::vector<double> accuracy;  // per completed fold
  std::vector<double> seconds;   // wall clock per fold
  double mean = 0.0;
  double stddev = 0.0;  // sample std, n - 1 denominator

  int folds() const { return static_cast<int>(accuracy.size()); }
  void finalize();
};

/// One Monte Carlo fold per seed base + k: fresh split, fresh init, train,
/// test accuracy. The graph itself is fixed across folds.
ResultTable run_experiment(const ExperimentSpec& spec);

struct Comparison {
  Task task = Task::NC;
  std::vector<ResultTable> tables;
  std::vector<double> deltas;  // mean minus the first table's mean

  /// Aligned text, with wall-clock runtimes.
  std::string to_text() const;
  /// Deterministic CSV (no runtimes).
  std::string to_csv() const;
};

/// Runs every spec; they must agree on everything but the Laplacian.
Comparison compare_laplacians(const std::vector<ExperimentSpec>& specs);

}  // namespace qlap
