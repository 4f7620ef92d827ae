#pragma once

// Two-layer quaternion spectral GCN with node and edge-pair heads.
//
//   Z1 = relu(P X0 Theta1)      P = D~^-1/2 H~ D~^-1/2, quaternion
//   Z2 = relu(P Z1 Theta2)
//   U  = unwind(Z2)             n x 4 f2, real
//   logits = U W                (node head)
//   logits = [U_u | U_v] W      (edge head)
//
// X0 carries the real degree features in its real channel; the i, j, k
// channels start at zero.

#include "qlap/autodiff.hpp"
#include "qlap/digraph.hpp"
#include "qlap/laplacian.hpp"
#include "qlap/quaternion.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlap {

enum class Task { NC, ThreeClass, FourClass, FiveClass };

std::string to_string(Task task);
Task parse_task(const std::string& name);
bool is_edge_task(Task task);
EdgeTask edge_task(Task task);

enum class HeadType { Linear, Conv1dPair };

std::string to_string(HeadType head);
HeadType parse_head(const std::string& name);

struct ModelConfig {
  Index f1 = 16;
  Index f2 = 16;
  HeadType head = HeadType::Linear;
  double dropout = 0.5;
  double learning_rate = 1e-3;
  double weight_decay = 5e-4;
  int max_epochs = 3000;
  int patience = 500;
  std::uint64_t seed = 0;

  void validate() const;
  /// Learning rate 1e-3 for NC/3CEP and 1e-2 for 4/5CEP.
  static ModelConfig defaults_for(Task task);
};

struct ModelParams {
  QMatrix theta1;  // c x f1
  QMatrix theta2;  // f1 x f2
  Eigen::MatrixXd W;  // 4 f2 x d (node head) or 8 f2 x d (edge head)
};

/// Uniform init: each channel of Theta in +-1/sqrt(4 fan_in), W in +-1/sqrt(fan_in).
ModelParams init_params(const ModelConfig& cfg, Index in_features, int classes, Task task);

/// Throws DataError naming the first layer whose shape disagrees.
void check_param_shapes(const ModelParams& p, const ModelConfig& cfg, Index in_features, int classes, Task task);

/// Labeled samples: node ids for NC, ordered pairs for edge tasks.
struct Samples {
  std::vector<Index> nodes;
  std::vector<NodePair> pairs;
  std::vector<int> labels;
  std::size_t size() const { return labels.size(); }
};

/// Everything one training run sees. The propagation matrix is built once.
struct Problem {
  Task task = Task::NC;
  int num_classes = 0;
  LaplacianKind laplacian = LaplacianKind::Quaternionic;
  ad::QOperator propagation;
  Eigen::MatrixXd features;  // n x c, real
  Eigen::MatrixXd px0;       // P X0 in channel-block layout, n x 4c
  Samples train, val, test;
};

Problem make_node_problem(const Digraph& g, const NodeSplit& split, LaplacianKind kind);
/// Propagation matrix and features come from split.training_graph only.
Problem make_edge_problem(const EdgeSplit& split, Task task, LaplacianKind kind);

// --- layer algebra (no tape) -----------------------------------------------

QMatrix split_activation(const QMatrix& z);
/// split_activation(P X Theta).
QMatrix qconv_forward(const QMatrix& p, const QMatrix& x, const QMatrix& theta);
Eigen::MatrixXd node_head(const Eigen::MatrixXd& u, const Eigen::MatrixXd& w);
Eigen::MatrixXd edge_head(const Eigen::MatrixXd& u, const std::vector<NodePair>& pairs, const Eigen::MatrixXd& w);
/// theta0 (2I - L_norm) x.
QMatrix chebyshev_filter_response(double theta0, const QMatrix& l_norm, const QMatrix& x);

/// Unwound embedding U of the trained network (no dropout).
Eigen::MatrixXd embed(const ModelParams& p, const Problem& problem);
/// Logits for a sample set, evaluation mode.
Eigen::MatrixXd logits(const ModelParams& p, const Problem& problem, const Samples& s);

/// Row argmax; ties go to the lowest class id.
std::vector<int> argmax_rows(const Eigen::MatrixXd& scores);
/// Fraction of matching entries. Throws on an empty set.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& labels);
double evaluate(const ModelParams& p, const Problem& problem, const Samples& s);

// --- training ---------------------------------------------------------------

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch, double loss);
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

struct EpochRecord {
  int epoch;
  double train_loss;
  double train_acc;
  double val_acc;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochRecord> history;
  int best_epoch = -1;  // -1 when no epoch ran
  bool stopped_early = false;
};

/// Full-batch Adam (beta1 0.9, beta2 0.999, eps 1e-8) with coupled L2 decay.
/// Dropout sits before the head at train time only. Early stopping watches
/// validation accuracy (ties broken by lower validation loss) and returns the
/// best parameters; with no validation samples every epoch runs and the last
/// parameters are returned.
TrainResult train(const ModelConfig& cfg, const Problem& problem);
TrainResult train(const ModelConfig& cfg, const Problem& problem, ModelParams init);

/// Cross-entropy and accuracy of a sample set without dropout.
struct LossAcc {
  double loss;
  double acc;
};
LossAcc loss_and_accuracy(const ModelParams& p, const Problem& problem, const Samples& s);

/// Training loss on a sample set (no dropout) and its gradient with respect
/// to every parameter, each Theta channel in its own component.
struct LossGrad {
  double loss;
  ModelParams grad;
};
LossGrad loss_and_gradient(const ModelParams& p, const Problem& problem, const Samples& s);

// --- files --------------------------------------------------------------------

std::string history_csv(const std::vector<EpochRecord>& history);

struct Checkpoint {
  ModelConfig config;
  Task task = Task::NC;
  LaplacianKind laplacian = LaplacianKind::Quaternionic;
  Index in_features = 0;
  int classes = 0;
  ModelParams params;
};

std::string format_checkpoint(const Checkpoint& c);
Checkpoint parse_checkpoint(std::istream& is);

}  // namespace qlap
