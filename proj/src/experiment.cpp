#include "qlap/experiment.hpp"

#include "qlap/matrix_io.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace qlap {

void ExperimentSpec::validate() const {
  if (folds < 1) throw std::invalid_argument("experiment: folds must be >= 1");
  fractions.validate();
  model.validate();
  if (edge_path.empty()) generator.validate();
  if ((task == Task::FourClass || task == Task::FiveClass) && edge_path.empty() && !generator.signed_weights)
    throw std::invalid_argument("experiment: " + to_string(task) + " needs a signed generator or signed input");
  if (task == Task::NC && !edge_path.empty() && label_path.empty())
    throw std::invalid_argument("experiment: NC on a file graph needs a label file");
}

ExperimentSpec ExperimentSpec::defaults_for(Task task) {
  ExperimentSpec s;
  s.task = task;
  s.model = ModelConfig::defaults_for(task);
  switch (task) {
    case Task::NC: s.fractions = {0.6, 0.2, 0.2}; break;
    case Task::ThreeClass: s.fractions = {0.8, 0.05, 0.15}; break;
    case Task::FourClass:
    case Task::FiveClass:
      s.folds = 5;
      s.fractions = {0.8, 0.0, 0.2};
      s.model.max_epochs = 300;
      s.generator.signed_weights = true;
      break;
  }
  return s;
}

std::string ExperimentSpec::data_key() const {
  std::ostringstream os;
  const DsbmConfig& g = generator;
  const ModelConfig& m = model;
  os << to_string(task) << '|' << edge_path << '|' << label_path << '|' << g.nodes_per_cluster << ',' << g.clusters
     << ',' << format_double(g.intra_prob) << ',' << format_double(g.inter_prob) << ','
     << format_double(g.direction_prob) << ',' << format_double(g.digon_fraction) << ',' << g.weight_low << ','
     << g.weight_high << ',' << g.signed_weights << ',' << static_cast<int>(g.sign_mode) << ','
     << static_cast<int>(g.digon_weights) << ',' << g.undirected << ',' << g.seed << '|' << m.f1 << ',' << m.f2 << ','
     << to_string(m.head) << ',' << format_double(m.dropout) << ',' << format_double(m.learning_rate) << ','
     << format_double(m.weight_decay) << ',' << m.max_epochs << ',' << m.patience << '|'
     << format_double(fractions.train) << ',' << format_double(fractions.val) << ',' << format_double(fractions.test)
     << '|' << folds << ',' << seed_base;
  return os.str();
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw DataError(where + ": expected a boolean, got '" + v + "'");
}

long long parse_int(const std::string& v, const std::string& where) {
  const double d = parse_double(v, where);
  if (d != std::floor(d)) throw DataError(where + ": expected an integer, got '" + v + "'");
  return static_cast<long long>(d);
}

std::uint64_t parse_u64(const std::string& v, const std::string& where) {
  try {
    std::size_t used = 0;
    const auto x = std::stoull(v, &used);
    if (used == v.size() && v.find('-') == std::string::npos) return x;
  } catch (const std::exception&) {
  }
  throw DataError(where + ": expected a nonnegative integer, got '" + v + "'");
}

}  // namespace

ExperimentSpec parse_experiment_config(std::istream& is) {
  // First pass: collect, so the task can pick the defaults.
  std::vector<std::tuple<std::string, std::string, std::string, int>> entries;
  std::string line, section;
  std::string task_name = "NC";
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw DataError("config line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (section == "experiment" && key == "task") task_name = value;
    entries.emplace_back(section, key, value, lineno);
  }

  ExperimentSpec spec;
  try {
    spec = ExperimentSpec::defaults_for(parse_task(task_name));
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("config: ") + e.what());
  }

  using Setter = std::function<void(const std::string&, const std::string&)>;
  DsbmConfig& g = spec.generator;
  ModelConfig& m = spec.model;
  const std::map<std::string, Setter> setters = {
      {"experiment.task", [](const std::string&, const std::string&) {}},
      {"experiment.laplacian",
       [&](const std::string& v, const std::string& w) {
         try {
           spec.laplacian = parse_laplacian_kind(v);
         } catch (const std::invalid_argument& e) {
           throw DataError(w + ": " + e.what());
         }
       }},
      {"experiment.folds", [&](const std::string& v, const std::string& w) { spec.folds = static_cast<int>(parse_int(v, w)); }},
      {"experiment.seed", [&](const std::string& v, const std::string& w) { spec.seed_base = parse_u64(v, w); }},
      {"data.edges", [&](const std::string& v, const std::string&) { spec.edge_path = v; }},
      {"data.labels", [&](const std::string& v, const std::string&) { spec.label_path = v; }},
      {"data.nodes_per_cluster", [&](const std::string& v, const std::string& w) { g.nodes_per_cluster = parse_int(v, w); }},
      {"data.clusters", [&](const std::string& v, const std::string& w) { g.clusters = parse_int(v, w); }},
      {"data.alpha_in", [&](const std::string& v, const std::string& w) { g.intra_prob = parse_double(v, w); }},
      {"data.alpha_out", [&](const std::string& v, const std::string& w) { g.inter_prob = parse_double(v, w); }},
      {"data.beta", [&](const std::string& v, const std::string& w) { g.direction_prob = parse_double(v, w); }},
      {"data.delta", [&](const std::string& v, const std::string& w) { g.digon_fraction = parse_double(v, w); }},
      {"data.wmin", [&](const std::string& v, const std::string& w) { g.weight_low = parse_int(v, w); }},
      {"data.wmax", [&](const std::string& v, const std::string& w) { g.weight_high = parse_int(v, w); }},
      {"data.signed", [&](const std::string& v, const std::string& w) { g.signed_weights = parse_bool(v, w); }},
      {"data.seed", [&](const std::string& v, const std::string& w) { g.seed = parse_u64(v, w); }},
      {"model.f1", [&](const std::string& v, const std::string& w) { m.f1 = parse_int(v, w); }},
      {"model.f2", [&](const std::string& v, const std::string& w) { m.f2 = parse_int(v, w); }},
      {"model.head",
       [&](const std::string& v, const std::string& w) {
         try {
           m.head = parse_head(v);
         } catch (const std::invalid_argument& e) {
           throw DataError(w + ": " + e.what());
         }
       }},
      {"model.dropout", [&](const std::string& v, const std::string& w) { m.dropout = parse_double(v, w); }},
      {"model.lr", [&](const std::string& v, const std::string& w) { m.learning_rate = parse_double(v, w); }},
      {"model.weight_decay", [&](const std::string& v, const std::string& w) { m.weight_decay = parse_double(v, w); }},
      {"model.max_epochs", [&](const std::string& v, const std::string& w) { m.max_epochs = static_cast<int>(parse_int(v, w)); }},
      {"model.patience", [&](const std::string& v, const std::string& w) { m.patience = static_cast<int>(parse_int(v, w)); }},
      {"split.train", [&](const std::string& v, const std::string& w) { spec.fractions.train = parse_double(v, w); }},
      {"split.val", [&](const std::string& v, const std::string& w) { spec.fractions.val = parse_double(v, w); }},
      {"split.test", [&](const std::string& v, const std::string& w) { spec.fractions.test = parse_double(v, w); }},
  };
  for (const auto& [sec, key, value, ln] : entries) {
    const auto it = setters.find(sec + "." + key);
    const std::string where = "config line " + std::to_string(ln);
    if (it == setters.end()) throw DataError(where + ": unknown key '" + key + "' in section [" + sec + "]");
    it->second(value, where);
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  return spec;
}

Digraph experiment_graph(const ExperimentSpec& spec) {
  if (spec.edge_path.empty()) return generate_dsbm(spec.generator);
  return load_graph(spec.edge_path, spec.task == Task::NC ? spec.label_path : std::string());
}

void ResultTable::finalize() {
  const double n = static_cast<double>(accuracy.size());
  mean = n > 0 ? std::accumulate(accuracy.begin(), accuracy.end(), 0.0) / n : 0.0;
  double ss = 0.0;
  for (double a : accuracy) ss += (a - mean) * (a - mean);
  stddev = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
}

ResultTable run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const Digraph g = experiment_graph(spec);
  ResultTable table;
  table.label = to_string(spec.laplacian);
  for (int fold = 0; fold < spec.folds; ++fold) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t seed = spec.seed_base + static_cast<std::uint64_t>(fold);
    Problem problem = spec.task == Task::NC
                          ? make_node_problem(g, split_nodes(g, spec.fractions, seed), spec.laplacian)
                          : make_edge_problem(split_edges(g, edge_task(spec.task), spec.fractions, seed), spec.task,
                                              spec.laplacian);
    ModelConfig model = spec.model;
    model.seed = seed;
    const TrainResult trained = train(model, problem);
    table.accuracy.push_back(evaluate(trained.params, problem, problem.test));
    table.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  table.finalize();
  return table;
}

Comparison compare_laplacians(const std::vector<ExperimentSpec>& specs) {
  if (specs.empty()) throw std::invalid_argument("compare: no specs");
  for (const auto& s : specs)
    if (s.data_key() != specs.front().data_key())
      throw std::invalid_argument("compare: specs differ in more than the Laplacian");
  Comparison c;
  c.task = specs.front().task;
  for (const auto& s : specs) c.tables.push_back(run_experiment(s));
  for (const auto& t : c.tables) c.deltas.push_back(t.mean - c.tables.front().mean);
  return c;
}

std::string Comparison::to_text() const {
  std::ostringstream os;
  os << "task " << to_string(task) << ", " << (tables.empty() ? 0 : tables.front().folds())
     << " folds, std uses the n-1 denominator, delta vs " << (tables.empty() ? "-" : tables.front().label) << '\n';
  os << std::left << std::setw(16) << "laplacian" << std::right << std::setw(10) << "mean" << std::setw(10) << "std"
     << std::setw(10) << "delta" << std::setw(12) << "runtime_s" << '\n';
  os << std::fixed;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const auto& t = tables[i];
    const double secs = std::accumulate(t.seconds.begin(), t.seconds.end(), 0.0);
    os << std::left << std::setw(16) << t.label << std::right << std::setprecision(4) << std::setw(10) << t.mean
       << std::setw(10) << t.stddev << std::showpos << std::setw(10) << deltas[i] << std::noshowpos
       << std::setprecision(1) << std::setw(12) << secs << '\n';
  }
  return os.str();
}

std::string Comparison::to_csv() const {
  std::ostringstream os;
  os << "task,laplacian,folds,mean,std,delta,fold_accuracies\n";
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const auto& t = tables[i];
    os << to_string(task) << ',' << t.label << ',' << t.folds() << ',' << format_double(t.mean) << ','
       << format_double(t.stddev) << ',' << format_double(deltas[i]) << ',';
    for (std::size_t k = 0; k < t.accuracy.size(); ++k) os << (k ? ";" : "") << format_double(t.accuracy[k]);
    os << '\n';
  }
  return os.str();
}

}  // namespace qlap
