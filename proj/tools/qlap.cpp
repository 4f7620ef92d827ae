// qlap: command-line front end for the quaternionic Laplacian library.

#include "qlap/digraph.hpp"
#include "qlap/experiment.hpp"
#include "qlap/laplacian.hpp"
#include "qlap/matrix_io.hpp"
#include "qlap/qgcn.hpp"
#include "qlap/verify.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace qlap;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;
constexpr int kData = 3;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct GeneratorFlags {
  Index nodes = 150;
  Index clusters = 5;
  double alpha_in = 0.1;
  double alpha_out = 0.6;
  double beta = 0.2;
  double delta = 0.2;
  std::int64_t wmin = 2;
  std::int64_t wmax = 4;
  bool signed_weights = false;

  void add(CLI::App* app) {
    app->add_option("--nodes", nodes, "Total node count (a multiple of --clusters)");
    app->add_option("--clusters", clusters, "Number of clusters");
    app->add_option("--alpha-in", alpha_in, "Edge probability inside a cluster");
    app->add_option("--alpha-out", alpha_out, "Edge probability across clusters");
    app->add_option("--beta", beta, "Probability a cross-cluster edge points from the lower cluster");
    app->add_option("--delta", delta, "Fraction of connected pairs that become digons");
    app->add_option("--wmin", wmin, "Smallest edge weight");
    app->add_option("--wmax", wmax, "Largest edge weight");
    app->add_flag("--signed", signed_weights, "Flip each edge sign with probability 1/2");
  }

  DsbmConfig config(std::uint64_t seed) const {
    if (clusters < 1 || nodes % clusters != 0)
      throw std::invalid_argument("--nodes must be a positive multiple of --clusters");
    DsbmConfig c;
    c.nodes_per_cluster = nodes / clusters;
    c.clusters = clusters;
    c.intra_prob = alpha_in;
    c.inter_prob = alpha_out;
    c.direction_prob = beta;
    c.digon_fraction = delta;
    c.weight_low = wmin;
    c.weight_high = wmax;
    c.signed_weights = signed_weights;
    c.seed = seed;
    c.validate();
    return c;
  }
};

struct ModelFlags {
  ModelConfig model;
  std::string head = "linear";
  double train = -1, val = -1, test = -1;

  void add(CLI::App* app) {
    app->add_option("--f1", model.f1, "Filters in the first quaternion layer");
    app->add_option("--f2", model.f2, "Filters in the second quaternion layer");
    app->add_option("--head", head, "Edge head: linear or conv1d-pair");
    app->add_option("--dropout", model.dropout, "Dropout before the head");
    app->add_option("--lr", model.learning_rate, "Adam learning rate (default 1e-2 for 4CEP/5CEP)");
    app->add_option("--weight-decay", model.weight_decay, "L2 weight decay");
    app->add_option("--max-epochs", model.max_epochs, "Epoch budget");
    app->add_option("--patience", model.patience, "Epochs without a better validation accuracy");
    app->add_option("--train", train, "Train fraction (negative: task default)");
    app->add_option("--val", val, "Validation fraction (negative: task default)");
    app->add_option("--test", test, "Test fraction (negative: task default)");
  }

  SplitFractions fractions(Task task) const {
    SplitFractions f = ExperimentSpec::defaults_for(task).fractions;
    if (train >= 0) f.train = train;
    if (val >= 0) f.val = val;
    if (test >= 0) f.test = test;
    f.validate();
    return f;
  }
};

Problem build_problem(const Digraph& g, Task task, LaplacianKind kind, const SplitFractions& f,
                      std::uint64_t seed) {
  if (task == Task::NC) return make_node_problem(g, split_nodes(g, f, seed), kind);
  return make_edge_problem(split_edges(g, edge_task(task), f, seed), task, kind);
}

// --- generate ---------------------------------------------------------------

struct GenerateCmd {
  GeneratorFlags gen;
  std::string edges, labels;
  std::uint64_t seed = 0;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("generate", "Sample a DSBM digraph with digons");
    gen.add(app);
    app->add_option("--edges", edges, "Edge list output path")->required();
    app->add_option("--labels", labels, "Label output path")->required();
    app->add_option("--seed", seed, "Random seed");
    app->callback([this] { run(); });
  }

  void run() {
    const Digraph g = generate_dsbm(gen.config(seed));
    write_file_atomic(edges, format_edge_list(g));
    write_file_atomic(labels, format_labels(g.labels()));
    const GraphStats s = graph_stats(g);
    std::cout << "nodes=" << s.nodes << "\nclasses=" << g.num_classes() << "\nedges=" << s.edges
              << "\ndigons=" << s.digons << "\ndigon_fraction=" << format_double(s.digon_fraction()) << '\n';
  }
};

// --- laplacian --------------------------------------------------------------

struct LaplacianCmd {
  std::string input, output, kind = "quaternionic";
  std::uint64_t seed = 0;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("laplacian", "Build a Laplacian or propagation matrix");
    app->add_option("--input", input, "Edge list")->required();
    app->add_option("--kind", kind, "quaternionic, quaternionic-norm, propagation, classical or sign-magnetic")
        ->check(CLI::IsMember({"quaternionic", "quaternionic-norm", "propagation", "classical", "sign-magnetic"}));
    app->add_option("--output", output, "Matrix output path")->required();
    app->add_option("--seed", seed, "Unused; accepted for uniformity");
    app->callback([this] { run(); });
  }

  void run() {
    const Digraph g = load_graph(input);
    std::ostringstream os;
    if (kind == "quaternionic") {
      write_qmatrix(os, build_quaternionic(g).Lq);
    } else if (kind == "quaternionic-norm") {
      write_qmatrix(os, normalize(build_quaternionic(g)));
    } else if (kind == "propagation") {
      write_qmatrix(os, propagation_matrix(g));
    } else if (kind == "classical") {
      write_qmatrix(os, QMatrix::from_real(classical_laplacian(g, false)), 1);
    } else {
      write_qmatrix(os, from_complex(sign_magnetic_laplacian(g).Lsigma), 2);
    }
    write_file_atomic(output, os.str());
  }
};

// --- verify -----------------------------------------------------------------

struct VerifyCmd {
  std::string input, matrix, properties = "all";
  std::size_t count = 100;
  std::uint64_t seed = 0;
  bool table = false;
  int status = kOk;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("verify", "Check the Laplacian's properties on seeded corpora or a file");
    app->add_option("--properties", properties, "Comma-separated properties, or all");
    app->add_option("--count", count, "Graphs per default corpus");
    app->add_option("--seed", seed, "Offset added to every corpus's first seed");
    auto* in = app->add_option("--input", input, "Verify one edge-list graph instead of the corpora")->default_str("none");
    app->add_option("--matrix", matrix, "Check a stored matrix (hermitian, psd) instead")->default_str("none")->excludes(in);
    app->add_flag("--table", table, "Append an aligned summary table");
    app->callback([this] { run(); });
  }

  std::vector<Property> selected() const {
    if (properties == "all") return all_properties();
    std::vector<Property> out;
    for (const auto& name : split_list(properties)) out.push_back(parse_property(name));
    if (out.empty()) throw std::invalid_argument("--properties is empty");
    return out;
  }

  void run() {
    const std::vector<Property> props = selected();
    if (!matrix.empty()) return run_matrix(props);
    VerificationReport report;
    if (!input.empty()) {
      report = verify_graph(load_graph(input), input, props);
    } else {
      std::vector<CorpusSpec> corpora = default_corpora(count);
      for (auto& c : corpora) c.first_seed += seed;
      report = verify_corpus(corpora, props);
    }
    std::cout << report.to_text(table);
    status = report.ok() ? kOk : kFailure;
  }

  void run_matrix(const std::vector<Property>& props) {
    std::istringstream is(read_file(matrix));
    const QMatrix q = read_qmatrix(is);
    std::cout << "matrix=" << matrix << '\n';
    bool ok = true;
    for (Property p : props) {
      const std::string key = "property." + to_string(p);
      if (p != Property::Hermitian && p != Property::Psd) {
        std::cout << key << ".status=skipped\n" << key << ".reason=needs a graph\n";
        continue;
      }
      const CheckResult r = p == Property::Hermitian ? check_hermitian_matrix(q, Tolerances{}.exact)
                                                     : check_psd_matrix(q, Tolerances{}.spectral);
      if (r.outcome == Outcome::Skip) {
        std::cout << key << ".status=skipped\n" << key << ".reason=" << r.detail << '\n';
        continue;
      }
      const bool pass = r.outcome == Outcome::Pass;
      ok = ok && pass;
      std::cout << key << ".status=" << (pass ? "pass" : "fail") << '\n'
                << key << ".violation=" << format_double(r.violation) << '\n';
      if (!r.detail.empty()) std::cout << key << ".detail=" << r.detail << '\n';
    }
    std::cout << "status=" << (ok ? "pass" : "fail") << '\n';
    status = ok ? kOk : kFailure;
  }
};

// --- train / eval -----------------------------------------------------------

struct TrainCmd {
  std::string task = "NC", laplacian = "quaternionic", edges, labels, checkpoint, history;
  ModelFlags flags;
  bool lr_set = false;
  std::uint64_t seed = 0;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("train", "Train a QuaterGCN on an edge-list graph");
    app->add_option("--task", task, "NC, 3CEP, 4CEP or 5CEP");
    app->add_option("--laplacian", laplacian, "quaternionic, classical or sign-magnetic");
    app->add_option("--edges", edges, "Edge list")->required();
    app->add_option("--labels", labels, "Node labels (NC)")->default_str("none");
    flags.add(app);
    app->add_option("--checkpoint", checkpoint, "Checkpoint output path")->required();
    app->add_option("--history", history, "Training history CSV output path")->default_str("none");
    app->add_option("--seed", seed, "Seed for the split and the initialization");
    app->callback([this, app] {
      lr_set = app->count("--lr") > 0;
      run();
    });
  }

  void run() {
    const Task t = parse_task(task);
    const LaplacianKind kind = parse_laplacian_kind(laplacian);
    ModelConfig m = flags.model;
    if (!lr_set) m.learning_rate = ModelConfig::defaults_for(t).learning_rate;
    m.head = parse_head(flags.head);
    m.seed = seed;
    const Digraph g = load_graph(edges, t == Task::NC ? labels : std::string());
    const Problem problem = build_problem(g, t, kind, flags.fractions(t), seed);
    const TrainResult r = train(m, problem);
    Checkpoint c{m, t, kind, problem.features.cols(), problem.num_classes, r.params};
    write_file_atomic(checkpoint, format_checkpoint(c));
    if (!history.empty()) write_file_atomic(history, history_csv(r.history));
    std::cout << "epochs=" << r.history.size() << "\nbest_epoch=" << r.best_epoch << '\n';
    if (problem.test.size() > 0) std::cout << "test_accuracy=" << format_double(evaluate(r.params, problem, problem.test)) << '\n';
  }
};

struct EvalCmd {
  std::string checkpoint, edges, labels, set = "test";
  double train = -1, val = -1, test = -1;
  std::uint64_t seed = 0;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("eval", "Score a checkpoint on a split of a graph");
    app->add_option("--checkpoint", checkpoint, "Checkpoint from train")->required();
    app->add_option("--edges", edges, "Edge list")->required();
    app->add_option("--labels", labels, "Node labels (NC)")->default_str("none");
    app->add_option("--set", set, "Which split to score")->check(CLI::IsMember({"train", "val", "test"}));
    app->add_option("--train", train, "Train fraction (negative: task default)");
    app->add_option("--val", val, "Validation fraction (negative: task default)");
    app->add_option("--test", test, "Test fraction (negative: task default)");
    app->add_option("--seed", seed, "Split seed (match the train run)");
    app->callback([this] { run(); });
  }

  void run() {
    std::istringstream is(read_file(checkpoint));
    const Checkpoint c = parse_checkpoint(is);
    ModelFlags f;
    f.train = train;
    f.val = val;
    f.test = test;
    const Digraph g = load_graph(edges, c.task == Task::NC ? labels : std::string());
    const Problem problem = build_problem(g, c.task, c.laplacian, f.fractions(c.task), seed);
    check_param_shapes(c.params, c.config, problem.features.cols(), problem.num_classes, c.task);
    const Samples& s = set == "train" ? problem.train : set == "val" ? problem.val : problem.test;
    std::cout << set << "_accuracy=" << format_double(evaluate(c.params, problem, s)) << '\n';
  }
};

// --- experiment -------------------------------------------------------------

struct ExperimentCmd {
  std::string config, task = "NC", laplacians = "quaternionic,classical", csv;
  int folds = 0, max_epochs = -1;
  std::uint64_t seed = 0;

  void add(CLI::App& root) {
    CLI::App* app = root.add_subcommand("experiment", "Cross-validated comparison of Laplacians");
    app->add_option("--config", config, "Experiment config file (overrides --task)")->default_str("none");
    app->add_option("--task", task, "NC, 3CEP, 4CEP or 5CEP");
    app->add_option("--laplacians", laplacians, "Comma-separated Laplacian kinds to compare");
    app->add_option("--folds", folds, "Fold count (0: config or task default)");
    app->add_option("--max-epochs", max_epochs, "Epoch budget (negative: config or task default)");
    app->add_option("--csv", csv, "Result CSV output path")->default_str("none");
    app->add_option("--seed", seed, "Seed base for folds");
    app->callback([this, app] {
      seed_set = app->count("--seed") > 0;
      run();
    });
  }
  bool seed_set = false;

  void run() {
    ExperimentSpec base;
    if (!config.empty()) {
      std::istringstream is(read_file(config));
      base = parse_experiment_config(is);
    } else {
      base = ExperimentSpec::defaults_for(parse_task(task));
    }
    if (folds > 0) base.folds = folds;
    if (max_epochs >= 0) base.model.max_epochs = max_epochs;
    if (seed_set) base.seed_base = seed;
    std::vector<ExperimentSpec> specs;
    for (const auto& name : split_list(laplacians)) {
      ExperimentSpec s = base;
      s.laplacian = parse_laplacian_kind(name);
      specs.push_back(s);
    }
    const Comparison cmp = compare_laplacians(specs);
    std::cout << cmp.to_text();
    if (!csv.empty()) write_file_atomic(csv, cmp.to_csv());
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quaternionic Laplacians for digraphs and QuaterGCN training"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  GenerateCmd gen;
  LaplacianCmd lap;
  VerifyCmd ver;
  TrainCmd tr;
  EvalCmd ev;
  ExperimentCmd ex;
  gen.add(app);
  lap.add(app);
  ver.add(app);
  tr.add(app);
  ev.add(app);
  ex.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return ver.status;
}
