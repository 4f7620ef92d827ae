#pragma once

// Quaternion scalars and dense quaternion matrices.
//
// A quaternion matrix Q = Q0 + i Q1 + j Q2 + k Q3 is stored as four real
// component matrices of identical shape (struct-of-arrays). All products go
// through the Hamilton basis table i^2 = j^2 = k^2 = ijk = -1.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace qlap {

template <typename Scalar>
struct Quaternion {
  Scalar r{0}, i{0}, j{0}, k{0};

  constexpr Quaternion() = default;
  constexpr Quaternion(Scalar r_, Scalar i_ = 0, Scalar j_ = 0, Scalar k_ = 0)
      : r(r_), i(i_), j(j_), k(k_) {}

  static constexpr Quaternion unit_i() { return {0, 1, 0, 0}; }
  static constexpr Quaternion unit_j() { return {0, 0, 1, 0}; }
  static constexpr Quaternion unit_k() { return {0, 0, 0, 1}; }

  constexpr Scalar operator[](int c) const {
    return c == 0 ? r : c == 1 ? i : c == 2 ? j : k;
  }

  friend constexpr bool operator==(const Quaternion&, const Quaternion&) = default;
};

using Quatd = Quaternion<double>;

template <typename S>
constexpr Quaternion<S> operator+(const Quaternion<S>& a, const Quaternion<S>& b) {
  return {a.r + b.r, a.i + b.i, a.j + b.j, a.k + b.k};
}

template <typename S>
constexpr Quaternion<S> operator-(const Quaternion<S>& a, const Quaternion<S>& b) {
  return {a.r - b.r, a.i - b.i, a.j - b.j, a.k - b.k};
}

template <typename S>
constexpr Quaternion<S> operator-(const Quaternion<S>& a) {
  return {-a.r, -a.i, -a.j, -a.k};
}

template <typename S>
constexpr Quaternion<S> operator*(S s, const Quaternion<S>& a) {
  return {s * a.r, s * a.i, s * a.j, s * a.k};
}

/// Hamilton product. Not commutative.
template <typename S>
constexpr Quaternion<S> operator*(const Quaternion<S>& a, const Quaternion<S>& b) {
  return {a.r * b.r - a.i * b.i - a.j * b.j - a.k * b.k,
          a.r * b.i + a.i * b.r + a.j * b.k - a.k * b.j,
          a.r * b.j - a.i * b.k + a.j * b.r + a.k * b.i,
          a.r * b.k + a.i * b.j - a.j * b.i + a.k * b.r};
}

template <typename S>
constexpr Quaternion<S> qmul(const Quaternion<S>& a, const Quaternion<S>& b) {
  return a * b;
}

template <typename S>
constexpr Quaternion<S> conjugate(const Quaternion<S>& q) {
  return {q.r, -q.i, -q.j, -q.k};
}

template <typename S>
constexpr S norm2(const Quaternion<S>& q) {
  return q.r * q.r + q.i * q.i + q.j * q.j + q.k * q.k;
}

template <typename S>
S abs(const Quaternion<S>& q) {
  return std::sqrt(norm2(q));
}

// ---------------------------------------------------------------------------
// Hamilton product on component blocks.
//
// Works on any Eigen expressions, so the same kernel serves QuaternionMatrix
// and the channel-block layout [Q0 | Q1 | Q2 | Q3] used by the GCN tape.
// Writes C = A * B; C must not alias A or B.

template <typename A0, typename A1, typename A2, typename A3,
          typename B0, typename B1, typename B2, typename B3,
          typename C0, typename C1, typename C2, typename C3>
void hamilton_product(const Eigen::MatrixBase<A0>& a0, const Eigen::MatrixBase<A1>& a1,
                      const Eigen::MatrixBase<A2>& a2, const Eigen::MatrixBase<A3>& a3,
                      const Eigen::MatrixBase<B0>& b0, const Eigen::MatrixBase<B1>& b1,
                      const Eigen::MatrixBase<B2>& b2, const Eigen::MatrixBase<B3>& b3,
                      Eigen::MatrixBase<C0>& c0, Eigen::MatrixBase<C1>& c1,
                      Eigen::MatrixBase<C2>& c2, Eigen::MatrixBase<C3>& c3) {
  c0.noalias() = a0 * b0;
  c0.noalias() -= a1 * b1;
  c0.noalias() -= a2 * b2;
  c0.noalias() -= a3 * b3;

  c1.noalias() = a0 * b1;
  c1.noalias() += a1 * b0;
  c1.noalias() += a2 * b3;
  c1.noalias() -= a3 * b2;

  c2.noalias() = a0 * b2;
  c2.noalias() -= a1 * b3;
  c2.noalias() += a2 * b0;
  c2.noalias() += a3 * b1;

  c3.noalias() = a0 * b3;
  c3.noalias() += a1 * b2;
  c3.noalias() -= a2 * b1;
  c3.noalias() += a3 * b0;
}

// ---------------------------------------------------------------------------

template <typename Scalar>
class QuaternionMatrix {
 public:
  using RealMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Index = Eigen::Index;

  QuaternionMatrix() = default;
  QuaternionMatrix(Index rows, Index cols) {
    for (auto& c : comp_) c = RealMatrix::Zero(rows, cols);
  }
  QuaternionMatrix(RealMatrix q0, RealMatrix q1, RealMatrix q2, RealMatrix q3)
      : comp_{std::move(q0), std::move(q1), std::move(q2), std::move(q3)} {
    for (int c = 1; c < 4; ++c) {
      if (comp_[c].rows() != comp_[0].rows() || comp_[c].cols() != comp_[0].cols())
        throw std::invalid_argument("QuaternionMatrix: component shapes differ");
    }
  }

  static QuaternionMatrix zero(Index rows, Index cols) { return QuaternionMatrix(rows, cols); }
  static QuaternionMatrix identity(Index n) {
    QuaternionMatrix q(n, n);
    q.comp_[0].setIdentity();
    return q;
  }
  static QuaternionMatrix from_real(const RealMatrix& m) {
    QuaternionMatrix q(m.rows(), m.cols());
    q.comp_[0] = m;
    return q;
  }

  Index rows() const { return comp_[0].rows(); }
  Index cols() const { return comp_[0].cols(); }

  const RealMatrix& component(int c) const { return comp_[c]; }
  RealMatrix& component(int c) { return comp_[c]; }
  const RealMatrix& real() const { return comp_[0]; }
  RealMatrix& real() { return comp_[0]; }

  Quaternion<Scalar> operator()(Index r, Index c) const {
    return {comp_[0](r, c), comp_[1](r, c), comp_[2](r, c), comp_[3](r, c)};
  }
  void set(Index r, Index c, const Quaternion<Scalar>& q) {
    comp_[0](r, c) = q.r;
    comp_[1](r, c) = q.i;
    comp_[2](r, c) = q.j;
    comp_[3](r, c) = q.k;
  }

  friend bool operator==(const QuaternionMatrix& a, const QuaternionMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (int c = 0; c < 4; ++c)
      if (a.comp_[c] != b.comp_[c]) return false;
    return true;
  }

 private:
  std::array<RealMatrix, 4> comp_;
};

using QMatrix = QuaternionMatrix<double>;

namespace detail {
inline void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}
}  // namespace detail

template <typename S>
QuaternionMatrix<S> operator+(const QuaternionMatrix<S>& a, const QuaternionMatrix<S>& b) {
  detail::require(a.rows() == b.rows() && a.cols() == b.cols(), "quaternion add: shape mismatch");
  return {a.component(0) + b.component(0), a.component(1) + b.component(1),
          a.component(2) + b.component(2), a.component(3) + b.component(3)};
}

template <typename S>
QuaternionMatrix<S> operator-(const QuaternionMatrix<S>& a, const QuaternionMatrix<S>& b) {
  detail::require(a.rows() == b.rows() && a.cols() == b.cols(), "quaternion sub: shape mismatch");
  return {a.component(0) - b.component(0), a.component(1) - b.component(1),
          a.component(2) - b.component(2), a.component(3) - b.component(3)};
}

template <typename S>
QuaternionMatrix<S> operator*(S s, const QuaternionMatrix<S>& a) {
  return {s * a.component(0), s * a.component(1), s * a.component(2), s * a.component(3)};
}

/// Quaternion matrix product, 16 real products combined per the basis table.
template <typename S>
QuaternionMatrix<S> matmul(const QuaternionMatrix<S>& a, const QuaternionMatrix<S>& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("quaternion matmul: shape mismatch (" + std::to_string(a.rows()) +
                                "x" + std::to_string(a.cols()) + ") * (" +
                                std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ")");
  QuaternionMatrix<S> c(a.rows(), b.cols());
  hamilton_product(a.component(0), a.component(1), a.component(2), a.component(3),
                   b.component(0), b.component(1), b.component(2), b.component(3),
                   c.component(0), c.component(1), c.component(2), c.component(3));
  return c;
}

template <typename S>
QuaternionMatrix<S> operator*(const QuaternionMatrix<S>& a, const QuaternionMatrix<S>& b) {
  return matmul(a, b);
}

template <typename S>
QuaternionMatrix<S> conjugate_transpose(const QuaternionMatrix<S>& q) {
  return {q.component(0).transpose(), -q.component(1).transpose(),
          -q.component(2).transpose(), -q.component(3).transpose()};
}

template <typename S>
QuaternionMatrix<S> transpose(const QuaternionMatrix<S>& q) {
  return {q.component(0).transpose(), q.component(1).transpose(),
          q.component(2).transpose(), q.component(3).transpose()};
}

/// Largest absolute entrywise difference over all four components.
template <typename S>
S max_abs_diff(const QuaternionMatrix<S>& a, const QuaternionMatrix<S>& b) {
  detail::require(a.rows() == b.rows() && a.cols() == b.cols(), "max_abs_diff: shape mismatch");
  S worst = 0;
  for (int c = 0; c < 4; ++c) {
    if (a.rows() * a.cols() == 0) break;
    worst = std::max(worst, (a.component(c) - b.component(c)).cwiseAbs().maxCoeff());
  }
  return worst;
}

template <typename S>
S frobenius_norm(const QuaternionMatrix<S>& q) {
  S s = 0;
  for (int c = 0; c < 4; ++c) s += q.component(c).squaredNorm();
  return std::sqrt(s);
}

template <typename S>
bool is_hermitian(const QuaternionMatrix<S>& q, S tol) {
  if (q.rows() != q.cols()) throw std::invalid_argument("is_hermitian: matrix is not square");
  return max_abs_diff(q, conjugate_transpose(q)) <= tol;
}

/// Complex adjoint of an n x n quaternion matrix.
///
/// Writing Q = Qa + Qb j with Qa = Q0 + i Q1 and Qb = Q2 + i Q3, returns the
/// 2n x 2n block matrix [[Qa, Qb], [-conj(Qb), conj(Qa)]]. The map is a ring
/// homomorphism and sends Hermitian matrices to Hermitian matrices.
template <typename S>
Eigen::Matrix<std::complex<S>, Eigen::Dynamic, Eigen::Dynamic> complex_adjoint(
    const QuaternionMatrix<S>& q) {
  if (q.rows() != q.cols()) throw std::invalid_argument("complex_adjoint: matrix is not square");
  using CMatrix = Eigen::Matrix<std::complex<S>, Eigen::Dynamic, Eigen::Dynamic>;
  const auto n = q.rows();
  CMatrix qa(n, n), qb(n, n);
  qa.real() = q.component(0);
  qa.imag() = q.component(1);
  qb.real() = q.component(2);
  qb.imag() = q.component(3);
  CMatrix out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = qa;
  out.topRightCorner(n, n) = qb;
  out.bottomLeftCorner(n, n) = -qb.conjugate();
  out.bottomRightCorner(n, n) = qa.conjugate();
  return out;
}

/// Horizontal concatenation (Re | Im1 | Im2 | Im3) of an n x f matrix.
template <typename S>
Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> unwind(const QuaternionMatrix<S>& q) {
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> out(q.rows(), 4 * q.cols());
  for (int c = 0; c < 4; ++c) out.middleCols(c * q.cols(), q.cols()) = q.component(c);
  return out;
}

/// Inverse of unwind: splits an n x 4f real matrix into four n x f channels.
template <typename Derived>
QuaternionMatrix<typename Derived::Scalar> fold(const Eigen::MatrixBase<Derived>& m) {
  if (m.cols() % 4 != 0) throw std::invalid_argument("fold: column count is not a multiple of 4");
  const auto f = m.cols() / 4;
  return {m.middleCols(0, f), m.middleCols(f, f), m.middleCols(2 * f, f), m.middleCols(3 * f, f)};
}

}  // namespace qlap
