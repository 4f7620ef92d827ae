#include "qlap/qgcn.hpp"

#include "qlap/matrix_io.hpp"
#include "qlap/random.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <sstream>

namespace qlap {

using Eigen::MatrixXd;

std::string to_string(Task task) {
  switch (task) {
    case Task::NC: return "NC";
    case Task::ThreeClass: return "3CEP";
    case Task::FourClass: return "4CEP";
    case Task::FiveClass: return "5CEP";
  }
  return "?";
}

Task parse_task(const std::string& name) {
  if (name == "NC" || name == "nc") return Task::NC;
  if (name == "3CEP" || name == "3cep") return Task::ThreeClass;
  if (name == "4CEP" || name == "4cep") return Task::FourClass;
  if (name == "5CEP" || name == "5cep") return Task::FiveClass;
  throw std::invalid_argument("unknown task '" + name + "' (expected NC, 3CEP, 4CEP or 5CEP)");
}

bool is_edge_task(Task task) { return task != Task::NC; }

EdgeTask edge_task(Task task) {
  switch (task) {
    case Task::ThreeClass: return EdgeTask::ThreeClass;
    case Task::FourClass: return EdgeTask::FourClass;
    case Task::FiveClass: return EdgeTask::FiveClass;
    case Task::NC: break;
  }
  throw std::invalid_argument("NC is not an edge task");
}

std::string to_string(HeadType head) { return head == HeadType::Linear ? "linear" : "conv1d-pair"; }

HeadType parse_head(const std::string& name) {
  if (name == "linear") return HeadType::Linear;
  if (name == "conv1d-pair") return HeadType::Conv1dPair;
  throw std::invalid_argument("unknown head '" + name + "' (expected linear or conv1d-pair)");
}

void ModelConfig::validate() const {
  if (f1 < 1 || f2 < 1) throw std::invalid_argument("model: widths must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("model: dropout must lie in [0, 1)");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("model: learning rate must be positive");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("model: weight decay must be nonnegative");
  if (max_epochs < 0) throw std::invalid_argument("model: max epochs must be >= 0");
  if (patience < 1) throw std::invalid_argument("model: patience must be >= 1");
}

ModelConfig ModelConfig::defaults_for(Task task) {
  ModelConfig c;
  if (task == Task::FourClass || task == Task::FiveClass) c.learning_rate = 1e-2;
  return c;
}

namespace {

MatrixXd uniform_matrix(Rng rng, Index rows, Index cols, double bound) {
  MatrixXd m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(-bound, bound);
  return m;
}

Index head_rows(Index f2, Task task) { return (is_edge_task(task) ? 8 : 4) * f2; }

void expect_shape(const char* layer, Index rows, Index cols, Index want_rows, Index want_cols) {
  if (rows != want_rows || cols != want_cols)
    throw DataError(std::string("shape mismatch in layer ") + layer + ": expected " + std::to_string(want_rows) +
                    "x" + std::to_string(want_cols) + ", got " + std::to_string(rows) + "x" + std::to_string(cols));
}

}  // namespace

ModelParams init_params(const ModelConfig& cfg, Index in_features, int classes, Task task) {
  cfg.validate();
  if (in_features < 1 || classes < 1) throw std::invalid_argument("init_params: empty input or output");
  const Rng root(cfg.seed);
  auto qinit = [&](const char* name, Index rows, Index cols) {
    Rng rng = root.substream(name);
    const double bound = 1.0 / std::sqrt(4.0 * static_cast<double>(rows));
    MatrixXd blocks = uniform_matrix(rng, rows, 4 * cols, bound);
    return ad::from_blocks(blocks);
  };
  ModelParams p;
  p.theta1 = qinit("init.theta1", in_features, cfg.f1);
  p.theta2 = qinit("init.theta2", cfg.f1, cfg.f2);
  const Index fan_in = head_rows(cfg.f2, task);
  p.W = uniform_matrix(root.substream("init.w"), fan_in, classes, 1.0 / std::sqrt(static_cast<double>(fan_in)));
  return p;
}

void check_param_shapes(const ModelParams& p, const ModelConfig& cfg, Index in_features, int classes, Task task) {
  expect_shape("theta1", p.theta1.rows(), p.theta1.cols(), in_features, cfg.f1);
  expect_shape("theta2", p.theta2.rows(), p.theta2.cols(), cfg.f1, cfg.f2);
  expect_shape("W", p.W.rows(), p.W.cols(), head_rows(cfg.f2, task), classes);
}

// ---------------------------------------------------------------------------

namespace {

MatrixXd input_blocks(const MatrixXd& features) {
  MatrixXd x0 = MatrixXd::Zero(features.rows(), 4 * features.cols());
  x0.leftCols(features.cols()) = features;
  return x0;
}

void finish_problem(Problem& p, QMatrix propagation, MatrixXd features) {
  p.propagation = ad::QOperator(std::move(propagation));
  p.features = std::move(features);
  p.px0 = ad::apply(p.propagation.matrix(), input_blocks(p.features));
}

Samples pairs_to_samples(const LabeledPairs& lp) {
  Samples s;
  s.pairs = lp.pairs;
  s.labels = lp.labels;
  return s;
}

}  // namespace

Problem make_node_problem(const Digraph& g, const NodeSplit& split, LaplacianKind kind) {
  if (!g.has_labels()) throw std::invalid_argument("node classification needs labels");
  Problem p;
  p.task = Task::NC;
  p.num_classes = g.num_classes();
  p.laplacian = kind;
  auto fill = [&](const std::vector<Index>& idx) {
    Samples s;
    s.nodes = idx;
    for (Index u : idx) s.labels.push_back(g.labels()[u]);
    return s;
  };
  p.train = fill(split.train);
  p.val = fill(split.val);
  p.test = fill(split.test);
  finish_problem(p, propagation_matrix(g, kind), degree_features(g, false));
  return p;
}

Problem make_edge_problem(const EdgeSplit& split, Task task, LaplacianKind kind) {
  const EdgeTask et = edge_task(task);
  Problem p;
  p.task = task;
  p.num_classes = num_classes(et);
  p.laplacian = kind;
  p.train = pairs_to_samples(split.train);
  p.val = pairs_to_samples(split.val);
  p.test = pairs_to_samples(split.test);
  const bool use_abs = task != Task::ThreeClass;
  finish_problem(p, propagation_matrix(split.training_graph, kind), degree_features(split.training_graph, use_abs));
  return p;
}

// ---------------------------------------------------------------------------

QMatrix split_activation(const QMatrix& z) {
  return {z.component(0).cwiseMax(0.0), z.component(1).cwiseMax(0.0), z.component(2).cwiseMax(0.0),
          z.component(3).cwiseMax(0.0)};
}

QMatrix qconv_forward(const QMatrix& p, const QMatrix& x, const QMatrix& theta) {
  return split_activation(matmul(matmul(p, x), theta));
}

MatrixXd node_head(const MatrixXd& u, const MatrixXd& w) {
  if (u.cols() != w.rows())
    throw std::invalid_argument("node head: shape mismatch " + std::to_string(u.cols()) + " vs " +
                                std::to_string(w.rows()));
  return u * w;
}

MatrixXd edge_head(const MatrixXd& u, const std::vector<NodePair>& pairs, const MatrixXd& w) {
  if (2 * u.cols() != w.rows())
    throw std::invalid_argument("edge head: W needs " + std::to_string(2 * u.cols()) + " rows, has " +
                                std::to_string(w.rows()));
  MatrixXd cat(static_cast<Index>(pairs.size()), 2 * u.cols());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [a, b] = pairs[k];
    if (a < 0 || b < 0 || a >= u.rows() || b >= u.rows())
      throw std::out_of_range("edge head: pair (" + std::to_string(a) + "," + std::to_string(b) + ") out of range");
    cat.row(static_cast<Index>(k)) << u.row(a), u.row(b);
  }
  return cat * w;
}

QMatrix chebyshev_filter_response(double theta0, const QMatrix& l_norm, const QMatrix& x) {
  if (l_norm.rows() != l_norm.cols() || l_norm.cols() != x.rows())
    throw std::invalid_argument("chebyshev filter: shape mismatch");
  const QMatrix y = 2.0 * QMatrix::identity(l_norm.rows()) - l_norm;
  return theta0 * matmul(y, x);
}

namespace {

struct Net {
  ad::Var theta1, theta2, w, u, logits;
};

// Builds the forward graph on `tape` up to the logits of `s`.
Net build(ad::Tape& tape, const Problem& problem, const MatrixXd& t1, const MatrixXd& t2, const MatrixXd& w,
          const Samples& s, const MatrixXd* dropout_mask) {
  Net net;
  net.theta1 = tape.variable(t1);
  net.theta2 = tape.variable(t2);
  net.w = tape.variable(w);
  const ad::Var x = tape.constant(problem.px0);
  const ad::Var z1 = ad::relu(tape, ad::qmatmul(tape, x, net.theta1));
  const ad::Var z2 = ad::relu(tape, ad::qapply(tape, problem.propagation, ad::qmatmul(tape, z1, net.theta2)));
  net.u = dropout_mask ? ad::mask(tape, z2, *dropout_mask) : z2;
  const ad::Var rows = is_edge_task(problem.task) ? ad::pair_concat(tape, net.u, s.pairs)
                                                  : ad::gather_rows(tape, net.u, s.nodes);
  net.logits = ad::matmul(tape, rows, net.w);
  return net;
}

MatrixXd forward_logits(const Problem& problem, const MatrixXd& t1, const MatrixXd& t2, const MatrixXd& w,
                        const Samples& s) {
  const MatrixXd z1 = ad::qproduct(problem.px0, t1).cwiseMax(0.0);
  const MatrixXd u = ad::apply(problem.propagation.matrix(), ad::qproduct(z1, t2)).cwiseMax(0.0);
  if (is_edge_task(problem.task)) return edge_head(u, s.pairs, w);
  MatrixXd rows(static_cast<Index>(s.nodes.size()), u.cols());
  for (std::size_t k = 0; k < s.nodes.size(); ++k) rows.row(static_cast<Index>(k)) = u.row(s.nodes[k]);
  return node_head(rows, w);
}

double mean_cross_entropy(const MatrixXd& z, const std::vector<int>& labels) {
  double loss = 0.0;
  for (Index r = 0; r < z.rows(); ++r) {
    const double top = z.row(r).maxCoeff();
    loss += top + std::log((z.row(r).array() - top).exp().sum()) - z(r, labels[r]);
  }
  return loss / static_cast<double>(z.rows());
}

struct Adam {
  MatrixXd m, v;
  explicit Adam(const MatrixXd& like)
      : m(MatrixXd::Zero(like.rows(), like.cols())), v(MatrixXd::Zero(like.rows(), like.cols())) {}

  void step(MatrixXd& param, MatrixXd grad, const ModelConfig& cfg, int t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    grad += cfg.weight_decay * param;
    m = b1 * m + (1 - b1) * grad;
    v = b2 * v + (1 - b2) * grad.cwiseProduct(grad);
    const double c1 = 1 - std::pow(b1, t), c2 = 1 - std::pow(b2, t);
    param.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
};

}  // namespace

MatrixXd embed(const ModelParams& p, const Problem& problem) {
  const MatrixXd z1 = ad::qproduct(problem.px0, ad::to_blocks(p.theta1)).cwiseMax(0.0);
  return ad::apply(problem.propagation.matrix(), ad::qproduct(z1, ad::to_blocks(p.theta2))).cwiseMax(0.0);
}

MatrixXd logits(const ModelParams& p, const Problem& problem, const Samples& s) {
  return forward_logits(problem, ad::to_blocks(p.theta1), ad::to_blocks(p.theta2), p.W, s);
}

std::vector<int> argmax_rows(const MatrixXd& scores) {
  std::vector<int> out(scores.rows());
  for (Index r = 0; r < scores.rows(); ++r) {
    Index best = 0;
    for (Index c = 1; c < scores.cols(); ++c)
      if (scores(r, c) > scores(r, best)) best = c;
    out[r] = static_cast<int>(best);
  }
  return out;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& labels) {
  if (labels.empty()) throw std::invalid_argument("accuracy: empty index set");
  if (predicted.size() != labels.size()) throw std::invalid_argument("accuracy: size mismatch");
  std::size_t hit = 0;
  for (std::size_t k = 0; k < labels.size(); ++k) hit += predicted[k] == labels[k];
  return static_cast<double>(hit) / static_cast<double>(labels.size());
}

double evaluate(const ModelParams& p, const Problem& problem, const Samples& s) {
  if (s.size() == 0) throw std::invalid_argument("evaluate: empty index set");
  return accuracy(argmax_rows(logits(p, problem, s)), s.labels);
}

LossAcc loss_and_accuracy(const ModelParams& p, const Problem& problem, const Samples& s) {
  if (s.size() == 0) throw std::invalid_argument("evaluate: empty index set");
  const MatrixXd z = logits(p, problem, s);
  return {mean_cross_entropy(z, s.labels), accuracy(argmax_rows(z), s.labels)};
}

LossGrad loss_and_gradient(const ModelParams& p, const Problem& problem, const Samples& s) {
  if (s.size() == 0) throw std::invalid_argument("loss_and_gradient: empty sample set");
  ad::Tape tape;
  const Net net = build(tape, problem, ad::to_blocks(p.theta1), ad::to_blocks(p.theta2), p.W, s, nullptr);
  const ad::Var loss = ad::softmax_cross_entropy(tape, net.logits, s.labels);
  tape.backward(loss);
  return {tape.value(loss)(0, 0),
          {ad::from_blocks(tape.grad(net.theta1)), ad::from_blocks(tape.grad(net.theta2)), tape.grad(net.w)}};
}

TrainingDiverged::TrainingDiverged(int epoch, double loss)
    : std::runtime_error("training diverged at epoch " + std::to_string(epoch) + " (loss " + std::to_string(loss) +
                         ")"),
      epoch_(epoch) {}

TrainResult train(const ModelConfig& cfg, const Problem& problem) {
  return train(cfg, problem, init_params(cfg, problem.features.cols(), problem.num_classes, problem.task));
}

TrainResult train(const ModelConfig& cfg, const Problem& problem, ModelParams init) {
  cfg.validate();
  check_param_shapes(init, cfg, problem.features.cols(), problem.num_classes, problem.task);
  if (problem.train.size() == 0) throw std::invalid_argument("train: empty training set");

  MatrixXd t1 = ad::to_blocks(init.theta1), t2 = ad::to_blocks(init.theta2), w = init.W;
  Adam a1(t1), a2(t2), aw(w);
  const Rng root(cfg.seed);
  const Index n = problem.px0.rows();
  const bool watch_val = problem.val.size() > 0;

  TrainResult result;
  result.params = std::move(init);
  double best_acc = -1.0, best_loss = std::numeric_limits<double>::infinity();
  int since_best = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    MatrixXd keep;
    if (cfg.dropout > 0.0) {
      Rng rng = root.substream("dropout", static_cast<std::uint64_t>(epoch));
      keep.resize(n, 4 * cfg.f2);
      const double s = 1.0 / (1.0 - cfg.dropout);
      for (Index c = 0; c < keep.cols(); ++c)
        for (Index r = 0; r < n; ++r) keep(r, c) = rng.uniform() < cfg.dropout ? 0.0 : s;
    }
    ad::Tape tape;
    const Net net = build(tape, problem, t1, t2, w, problem.train, cfg.dropout > 0.0 ? &keep : nullptr);
    const ad::Var loss = ad::softmax_cross_entropy(tape, net.logits, problem.train.labels);
    const double loss_value = tape.value(loss)(0, 0);
    if (!std::isfinite(loss_value)) throw TrainingDiverged(epoch, loss_value);
    const double train_acc = accuracy(argmax_rows(tape.value(net.logits)), problem.train.labels);
    tape.backward(loss);
    a1.step(t1, tape.grad(net.theta1), cfg, epoch);
    a2.step(t2, tape.grad(net.theta2), cfg, epoch);
    aw.step(w, tape.grad(net.w), cfg, epoch);

    ModelParams current{ad::from_blocks(t1), ad::from_blocks(t2), w};
    EpochRecord rec{epoch, loss_value, train_acc, std::numeric_limits<double>::quiet_NaN()};
    if (watch_val) {
      const LossAcc val = loss_and_accuracy(current, problem, problem.val);
      rec.val_acc = val.acc;
      // patience counts epochs without a strictly lower validation error;
      // equal accuracy at lower loss still replaces the kept parameters
      const bool better_acc = val.acc > best_acc;
      if (better_acc || (val.acc == best_acc && val.loss < best_loss)) {
        best_acc = val.acc;
        best_loss = val.loss;
        result.params = std::move(current);
        result.best_epoch = epoch;
      }
      if (better_acc) {
        since_best = 0;
      } else if (++since_best >= cfg.patience) {
        result.history.push_back(rec);
        result.stopped_early = true;
        break;
      }
    } else {
      result.params = std::move(current);
      result.best_epoch = epoch;
    }
    result.history.push_back(rec);
  }
  return result;
}

// ---------------------------------------------------------------------------

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream os;
  os << "epoch,train_loss,train_acc,val_acc\n";
  for (const auto& r : history) {
    os << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.train_acc) << ','
       << (std::isnan(r.val_acc) ? std::string() : format_double(r.val_acc)) << '\n';
  }
  return os.str();
}

namespace {
constexpr const char* kCheckpointMagic = "qlap-checkpoint";
constexpr int kCheckpointVersion = 1;
}  // namespace

std::string format_checkpoint(const Checkpoint& c) {
  std::ostringstream os;
  const ModelConfig& m = c.config;
  os << kCheckpointMagic << ' ' << kCheckpointVersion << '\n'
     << "task " << to_string(c.task) << '\n'
     << "laplacian " << to_string(c.laplacian) << '\n'
     << "in_features " << c.in_features << '\n'
     << "classes " << c.classes << '\n'
     << "f1 " << m.f1 << '\n'
     << "f2 " << m.f2 << '\n'
     << "head " << to_string(m.head) << '\n'
     << "dropout " << format_double(m.dropout) << '\n'
     << "learning_rate " << format_double(m.learning_rate) << '\n'
     << "weight_decay " << format_double(m.weight_decay) << '\n'
     << "max_epochs " << m.max_epochs << '\n'
     << "patience " << m.patience << '\n'
     << "seed " << m.seed << '\n';
  os << "[theta1]\n";
  write_qmatrix(os, c.params.theta1);
  os << "[theta2]\n";
  write_qmatrix(os, c.params.theta2);
  os << "[W]\n";
  write_matrix(os, c.params.W);
  return os.str();
}

Checkpoint parse_checkpoint(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("checkpoint: empty input");
  {
    std::istringstream hs(line);
    std::string magic;
    int version = 0;
    if (!(hs >> magic >> version) || magic != kCheckpointMagic)
      throw DataError("checkpoint: missing '" + std::string(kCheckpointMagic) + "' header");
    if (version != kCheckpointVersion)
      throw DataError("checkpoint: unsupported version " + std::to_string(version));
  }
  std::map<std::string, std::string> keys;
  std::map<std::string, std::string> sections;
  std::string current;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() > 2 && line.front() == '[' && line.back() == ']') {
      current = line.substr(1, line.size() - 2);
      sections[current];
      continue;
    }
    if (!current.empty()) {
      sections[current] += line + '\n';
      continue;
    }
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string k, v;
    ls >> k >> v;
    keys[k] = v;
  }
  auto need = [&](const std::string& k) -> const std::string& {
    auto it = keys.find(k);
    if (it == keys.end()) throw DataError("checkpoint: missing key '" + k + "'");
    return it->second;
  };
  auto num = [&](const std::string& k) { return parse_double(need(k), "checkpoint key " + k); };
  auto integer = [&](const std::string& k) {
    const double v = num(k);
    if (v != std::floor(v)) throw DataError("checkpoint: key '" + k + "' is not an integer");
    return static_cast<long long>(v);
  };
  auto section = [&](const std::string& name) {
    auto it = sections.find(name);
    if (it == sections.end()) throw DataError("checkpoint: missing section [" + name + "]");
    return std::istringstream(it->second);
  };

  Checkpoint c;
  try {
    c.task = parse_task(need("task"));
    c.laplacian = parse_laplacian_kind(need("laplacian"));
    c.config.head = parse_head(need("head"));
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  c.in_features = integer("in_features");
  c.classes = static_cast<int>(integer("classes"));
  c.config.f1 = integer("f1");
  c.config.f2 = integer("f2");
  c.config.dropout = num("dropout");
  c.config.learning_rate = num("learning_rate");
  c.config.weight_decay = num("weight_decay");
  c.config.max_epochs = static_cast<int>(integer("max_epochs"));
  c.config.patience = static_cast<int>(integer("patience"));
  {
    const std::string& s = need("seed");
    try {
      std::size_t used = 0;
      c.config.seed = std::stoull(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw DataError("checkpoint: bad seed '" + s + "'");
    }
  }
  auto s1 = section("theta1");
  c.params.theta1 = read_qmatrix(s1);
  auto s2 = section("theta2");
  c.params.theta2 = read_qmatrix(s2);
  auto sw = section("W");
  c.params.W = read_matrix(sw);
  check_param_shapes(c.params, c.config, c.in_features, c.classes, c.task);
  return c;
}

}  // namespace qlap
