#include "qlap/autodiff.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qlap::ad {

namespace {

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void require_shape(bool ok, const char* op, const Matrix& a, const Matrix& b) {
  if (!ok) throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
}

}  // namespace

Var Tape::constant(Matrix value) {
  Node n;
  n.grad = Matrix::Zero(value.rows(), value.cols());
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size()) - 1};
}

Var Tape::variable(Matrix value) {
  Var v = constant(std::move(value));
  nodes_[v.id].requires_grad = true;
  return v;
}

Var Tape::record(Matrix value, std::vector<Var> inputs, Backward backward) {
  Node n;
  n.grad = Matrix::Zero(value.rows(), value.cols());
  n.value = std::move(value);
  for (Var in : inputs) n.requires_grad = n.requires_grad || nodes_.at(in.id).requires_grad;
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size()) - 1};
}

void Tape::accumulate(Var v, const Matrix& g) {
  Node& n = nodes_.at(v.id);
  if (n.requires_grad) n.grad += g;
}

void Tape::backward(Var out) {
  Node& root = nodes_.at(out.id);
  if (root.value.size() != 1) throw std::invalid_argument("backward: output must be 1x1, got " + shape(root.value));
  for (auto& n : nodes_) n.grad.setZero();
  root.grad(0, 0) = 1.0;
  for (int id = out.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.backward) {
      const Matrix g = n.grad;  // callbacks may grow other nodes' grads only
      n.backward(*this, g);
    }
  }
}

// ---------------------------------------------------------------------------

Matrix to_blocks(const QMatrix& q) { return unwind(q); }

QMatrix from_blocks(const Matrix& m) { return fold(m); }

Matrix qproduct(const Matrix& a, const Matrix& b) {
  if (a.cols() % 4 || b.cols() % 4 || a.cols() / 4 != b.rows())
    throw std::invalid_argument("qmatmul: shape mismatch " + shape(a) + " * " + shape(b) +
                                " (expected n x 4c times c x 4f)");
  const Index c = b.rows(), f = b.cols() / 4;
  Matrix out(a.rows(), 4 * f);
  auto o0 = out.middleCols(0, f);
  auto o1 = out.middleCols(f, f);
  auto o2 = out.middleCols(2 * f, f);
  auto o3 = out.middleCols(3 * f, f);
  hamilton_product(a.middleCols(0, c), a.middleCols(c, c), a.middleCols(2 * c, c), a.middleCols(3 * c, c),
                   b.middleCols(0, f), b.middleCols(f, f), b.middleCols(2 * f, f), b.middleCols(3 * f, f),
                   o0, o1, o2, o3);
  return out;
}

Matrix qadjoint(const Matrix& a) {
  if (a.cols() % 4) throw std::invalid_argument("qadjoint: column count is not a multiple of 4");
  const Index c = a.cols() / 4, r = a.rows();
  Matrix out(c, 4 * r);
  out.middleCols(0, r) = a.middleCols(0, c).transpose();
  for (int k = 1; k < 4; ++k) out.middleCols(k * r, r) = -a.middleCols(k * c, c).transpose();
  return out;
}

Matrix apply(const QMatrix& p, const Matrix& x) {
  if (x.cols() % 4 || p.cols() != x.rows())
    throw std::invalid_argument("qapply: shape mismatch " + std::to_string(p.rows()) + "x" +
                                std::to_string(p.cols()) + " * " + shape(x));
  const Index f = x.cols() / 4;
  Matrix out(p.rows(), 4 * f);
  auto o0 = out.middleCols(0, f);
  auto o1 = out.middleCols(f, f);
  auto o2 = out.middleCols(2 * f, f);
  auto o3 = out.middleCols(3 * f, f);
  hamilton_product(p.component(0), p.component(1), p.component(2), p.component(3), x.middleCols(0, f),
                   x.middleCols(f, f), x.middleCols(2 * f, f), x.middleCols(3 * f, f), o0, o1, o2, o3);
  return out;
}

// ---------------------------------------------------------------------------

Var add(Tape& t, Var a, Var b) {
  const Matrix& va = t.value(a);
  const Matrix& vb = t.value(b);
  require_shape(va.rows() == vb.rows() && va.cols() == vb.cols(), "add", va, vb);
  return t.record(va + vb, {a, b}, [a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var scale(Tape& t, Var a, double s) {
  return t.record(s * t.value(a), {a}, [a, s](Tape& tp, const Matrix& g) { tp.accumulate(a, s * g); });
}

Var sum(Tape& t, Var a) {
  Matrix out(1, 1);
  out(0, 0) = t.value(a).sum();
  const Index r = t.value(a).rows(), c = t.value(a).cols();
  return t.record(std::move(out), {a},
                  [a, r, c](Tape& tp, const Matrix& g) { tp.accumulate(a, Matrix::Constant(r, c, g(0, 0))); });
}

Var matmul(Tape& t, Var a, Var b) {
  const Matrix& va = t.value(a);
  const Matrix& vb = t.value(b);
  require_shape(va.cols() == vb.rows(), "matmul", va, vb);
  return t.record(va * vb, {a, b}, [a, b](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, g * tp.value(b).transpose());
    if (tp.requires_grad(b)) tp.accumulate(b, tp.value(a).transpose() * g);
  });
}

Var qmatmul(Tape& t, Var a, Var b) {
  return t.record(qproduct(t.value(a), t.value(b)), {a, b}, [a, b](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, qproduct(g, qadjoint(tp.value(b))));
    if (tp.requires_grad(b)) tp.accumulate(b, qproduct(qadjoint(tp.value(a)), g));
  });
}

Var qapply(Tape& t, const QOperator& p, Var x) {
  const QOperator* op = &p;
  return t.record(apply(p.matrix(), t.value(x)), {x},
                  [op, x](Tape& tp, const Matrix& g) { tp.accumulate(x, apply(op->adjoint(), g)); });
}

Var relu(Tape& t, Var a) {
  return t.record(t.value(a).cwiseMax(0.0), {a}, [a](Tape& tp, const Matrix& g) {
    tp.accumulate(a, (tp.value(a).array() > 0.0).select(g, 0.0));
  });
}

Var mask(Tape& t, Var a, Matrix m) {
  const Matrix& va = t.value(a);
  require_shape(va.rows() == m.rows() && va.cols() == m.cols(), "mask", va, m);
  Matrix out = va.cwiseProduct(m);
  return t.record(std::move(out), {a},
                  [a, m = std::move(m)](Tape& tp, const Matrix& g) { tp.accumulate(a, g.cwiseProduct(m)); });
}

Var gather_rows(Tape& t, Var a, std::vector<Index> rows) {
  const Matrix& va = t.value(a);
  Matrix out(static_cast<Index>(rows.size()), va.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= va.rows())
      throw std::out_of_range("gather_rows: row " + std::to_string(rows[k]) + " out of range");
    out.row(static_cast<Index>(k)) = va.row(rows[k]);
  }
  const Index n = va.rows();
  return t.record(std::move(out), {a}, [a, n, rows = std::move(rows)](Tape& tp, const Matrix& g) {
    Matrix ga = Matrix::Zero(n, g.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) ga.row(rows[k]) += g.row(static_cast<Index>(k));
    tp.accumulate(a, ga);
  });
}

Var pair_concat(Tape& t, Var a, std::vector<std::pair<Index, Index>> pairs) {
  const Matrix& va = t.value(a);
  const Index w = va.cols(), n = va.rows();
  Matrix out(static_cast<Index>(pairs.size()), 2 * w);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [u, v] = pairs[k];
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw std::out_of_range("edge head: pair (" + std::to_string(u) + "," + std::to_string(v) +
                              ") out of range for " + std::to_string(n) + " nodes");
    out.row(static_cast<Index>(k)) << va.row(u), va.row(v);
  }
  return t.record(std::move(out), {a}, [a, n, w, pairs = std::move(pairs)](Tape& tp, const Matrix& g) {
    Matrix ga = Matrix::Zero(n, w);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      ga.row(pairs[k].first) += g.row(static_cast<Index>(k)).head(w);
      ga.row(pairs[k].second) += g.row(static_cast<Index>(k)).tail(w);
    }
    tp.accumulate(a, ga);
  });
}

Var softmax_cross_entropy(Tape& t, Var logits, std::vector<int> labels) {
  const Matrix& z = t.value(logits);
  const Index m = z.rows();
  if (m == 0) throw std::invalid_argument("cross entropy: empty batch");
  if (static_cast<Index>(labels.size()) != m) throw std::invalid_argument("cross entropy: label count mismatch");
  Matrix p(m, z.cols());
  double loss = 0.0;
  for (Index r = 0; r < m; ++r) {
    const int y = labels[r];
    if (y < 0 || y >= z.cols())
      throw std::out_of_range("cross entropy: label " + std::to_string(y) + " outside " + std::to_string(z.cols()) +
                              " classes");
    const double top = z.row(r).maxCoeff();
    p.row(r) = (z.row(r).array() - top).exp();
    const double norm = p.row(r).sum();
    p.row(r) /= norm;
    loss += std::log(norm) + top - z(r, y);
  }
  Matrix out(1, 1);
  out(0, 0) = loss / static_cast<double>(m);
  return t.record(std::move(out), {logits},
                  [logits, p = std::move(p), labels = std::move(labels)](Tape& tp, const Matrix& g) {
                    Matrix gz = p;
                    for (Index r = 0; r < gz.rows(); ++r) gz(r, labels[r]) -= 1.0;
                    tp.accumulate(logits, (g(0, 0) / static_cast<double>(gz.rows())) * gz);
                  });
}

}  // namespace qlap::ad
