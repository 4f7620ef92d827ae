#pragma once

// Independent oracles shared by the test files.

#include "qlap/digraph.hpp"
#include "qlap/quaternion.hpp"
#include "qlap/random.hpp"

#include <Eigen/Dense>

#include <string>

namespace qtest {

using qlap::QMatrix;
using qlap::Quatd;
using Eigen::Index;
using Eigen::MatrixXd;

// Left-multiplication matrix of q acting on (r, i, j, k) column vectors,
// written out from i^2 = j^2 = k^2 = ijk = -1 by hand.
inline Eigen::Matrix4d left_matrix(const Quatd& q) {
  Eigen::Matrix4d m;
  m << q.r, -q.i, -q.j, -q.k,
       q.i,  q.r, -q.k,  q.j,
       q.j,  q.k,  q.r, -q.i,
       q.k, -q.j,  q.i,  q.r;
  return m;
}

inline Quatd oracle_mul(const Quatd& a, const Quatd& b) {
  const Eigen::Vector4d v = left_matrix(a) * Eigen::Vector4d(b.r, b.i, b.j, b.k);
  return {v(0), v(1), v(2), v(3)};
}

// Entrywise schoolbook product through the 4x4 representation.
inline QMatrix oracle_matmul(const QMatrix& a, const QMatrix& b) {
  QMatrix c(a.rows(), b.cols());
  for (Index r = 0; r < a.rows(); ++r) {
    for (Index s = 0; s < b.cols(); ++s) {
      Quatd acc;
      for (Index t = 0; t < a.cols(); ++t) {
        const Quatd p = oracle_mul(a(r, t), b(t, s));
        acc = Quatd(acc.r + p.r, acc.i + p.i, acc.j + p.j, acc.k + p.k);
      }
      c.set(r, s, acc);
    }
  }
  return c;
}

// Small dyadic rationals, so products and sums stay exact.
inline QMatrix random_qmatrix(qlap::Rng& rng, Index rows, Index cols) {
  QMatrix q(rows, cols);
  for (int c = 0; c < 4; ++c)
    for (Index r = 0; r < rows; ++r)
      for (Index s = 0; s < cols; ++s) q.component(c)(r, s) = static_cast<double>(rng.integer(-8, 8)) / 4.0;
  return q;
}

inline QMatrix random_hermitian(qlap::Rng& rng, Index n) {
  const QMatrix a = random_qmatrix(rng, n, n);
  return a + qlap::conjugate_transpose(a);
}

inline MatrixXd example4_adjacency() {
  MatrixXd a(4, 4);
  a << 0, 1, 0, 0,
       1, 0, 0, 3,
       3, 0, 0, 1,
       0, 1, 5, 0;
  return a;
}

inline std::string data_path(const std::string& name) { return std::string(QLAP_TEST_DATA) + "/" + name; }

}  // namespace qtest
