#pragma once

// Minimal reverse-mode differentiation over dense real matrices.
//
// A Tape records every operation as a node holding its value and a closure
// that pushes the node's gradient to its inputs. Quaternion tensors live in
// the channel-block layout [Q0 | Q1 | Q2 | Q3] (n x 4f), which is exactly the
// unwound form, so unwinding costs nothing.

#include "qlap/quaternion.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <utility>
#include <vector>

namespace qlap::ad {

using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

struct Var {
  int id = -1;
};

class Tape {
 public:
  /// Leaf without gradient.
  Var constant(Matrix value);
  /// Leaf whose gradient is accumulated by backward().
  Var variable(Matrix value);

  const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
  /// Zero matrix of the right shape when nothing reached the node.
  const Matrix& grad(Var v) const { return nodes_.at(v.id).grad; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

  /// Seeds d(out)/d(out) = 1 for a 1x1 output and sweeps the tape backwards.
  void backward(Var out);

  std::size_t size() const { return nodes_.size(); }

  // Used by the op implementations.
  using Backward = std::function<void(Tape&, const Matrix& grad)>;
  Var record(Matrix value, std::vector<Var> inputs, Backward backward);
  void accumulate(Var v, const Matrix& g);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

/// A fixed quaternion matrix applied from the left (propagation matrices).
/// Keeps its conjugate transpose for the backward pass.
class QOperator {
 public:
  QOperator() = default;
  explicit QOperator(QMatrix m) : m_(std::move(m)), m_star_(conjugate_transpose(m_)) {}
  const QMatrix& matrix() const { return m_; }
  const QMatrix& adjoint() const { return m_star_; }
  Index rows() const { return m_.rows(); }
  Index cols() const { return m_.cols(); }

 private:
  QMatrix m_, m_star_;
};

/// Channel-block helpers (no tape).
Matrix to_blocks(const QMatrix& q);
QMatrix from_blocks(const Matrix& m);
/// Quaternion product of two block matrices: (n x 4c) * (c x 4f) -> n x 4f.
Matrix qproduct(const Matrix& a, const Matrix& b);
/// Quaternion conjugate transpose of a block matrix: (r x 4c) -> (c x 4r).
Matrix qadjoint(const Matrix& a);
/// P * X for a quaternion operator and a block matrix.
Matrix apply(const QMatrix& p, const Matrix& x);

Var add(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double s);
Var sum(Tape& t, Var a);
Var matmul(Tape& t, Var a, Var b);
/// Quaternion product in block layout.
Var qmatmul(Tape& t, Var a, Var b);
/// P * X with P held by reference; P must outlive the tape.
Var qapply(Tape& t, const QOperator& p, Var x);
/// Componentwise ReLU; the subgradient at 0 is 0.
Var relu(Tape& t, Var a);
/// Multiplies by a fixed mask (dropout with the 1/(1-p) scale folded in).
Var mask(Tape& t, Var a, Matrix m);
Var gather_rows(Tape& t, Var a, std::vector<Index> rows);
/// Row k is [a(u_k) | a(v_k)].
Var pair_concat(Tape& t, Var a, std::vector<std::pair<Index, Index>> pairs);
/// Mean softmax cross-entropy of logits rows against class labels.
Var softmax_cross_entropy(Tape& t, Var logits, std::vector<int> labels);

}  // namespace qlap::ad
