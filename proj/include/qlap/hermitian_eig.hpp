#pragma once

// Right eigendecomposition of Hermitian quaternion matrices through the
// complex adjoint. Every eigenvalue of a Hermitian n x n quaternion matrix is
// real and appears twice in the spectrum of its 2n x 2n complex adjoint.

#include "qlap/quaternion.hpp"

#include <Eigen/Eigenvalues>

#include <limits>
#include <stdexcept>
#include <vector>

namespace qlap {

template <typename Scalar>
struct EigenResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eigenvalues;  // ascending
  QuaternionMatrix<Scalar> eigenvectors;                 // unit-norm columns
};

/// All 2n eigenvalues of the complex adjoint, ascending.
template <typename S>
Eigen::Matrix<S, Eigen::Dynamic, 1> adjoint_eigenvalues(const QuaternionMatrix<S>& q) {
  using CMatrix = Eigen::Matrix<std::complex<S>, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(complex_adjoint(q), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("adjoint_eigenvalues: solver failed");
  return solver.eigenvalues();
}

namespace detail {

template <typename S>
S pairing_tolerance(const QuaternionMatrix<S>& q) {
  return S(1e-8) * std::max(frobenius_norm(q), std::numeric_limits<S>::min());
}

template <typename S>
void check_hermitian_input(const QuaternionMatrix<S>& q, S tol, const char* who) {
  if (q.rows() != q.cols()) throw std::invalid_argument(std::string(who) + ": matrix is not square");
  if (!is_hermitian(q, tol))
    throw std::invalid_argument(std::string(who) + ": matrix is not Hermitian within tolerance");
}

template <typename S, typename Vec>
Eigen::Matrix<S, Eigen::Dynamic, 1> take_pairs(const Vec& sorted, S pair_tol) {
  const auto n = sorted.size() / 2;
  Eigen::Matrix<S, Eigen::Dynamic, 1> out(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    if (std::abs(sorted(2 * t + 1) - sorted(2 * t)) > pair_tol)
      throw std::runtime_error("hermitian_eig: adjoint eigenvalues do not pair up");
    out(t) = sorted(2 * t);
  }
  return out;
}

// Quaternion inner product x* y.
template <typename S>
Quaternion<S> inner(const std::vector<Quaternion<S>>& x, const std::vector<Quaternion<S>>& y) {
  Quaternion<S> acc;
  for (std::size_t u = 0; u < x.size(); ++u) acc = acc + conjugate(x[u]) * y[u];
  return acc;
}

}  // namespace detail

/// Right eigenvalues of a Hermitian quaternion matrix, ascending.
template <typename S>
Eigen::Matrix<S, Eigen::Dynamic, 1> hermitian_eigenvalues(const QuaternionMatrix<S>& q, S tol) {
  detail::check_hermitian_input(q, tol, "hermitian_eigenvalues");
  return detail::take_pairs<S>(adjoint_eigenvalues(q), detail::pairing_tolerance(q));
}

/// Full right eigendecomposition Q = U diag(lambda) U*.
///
/// A complex eigenvector [x1; x2] of the adjoint maps to the quaternion vector
/// x1 - conj(x2) j. Each eigenvalue cluster of the adjoint (size 2m) spans an
/// m-dimensional right quaternion subspace; pivoted Gram-Schmidt extracts an
/// orthonormal quaternion basis from it.
template <typename S>
EigenResult<S> hermitian_eig(const QuaternionMatrix<S>& q, S tol) {
  using CMatrix = Eigen::Matrix<std::complex<S>, Eigen::Dynamic, Eigen::Dynamic>;
  using QVec = std::vector<Quaternion<S>>;
  detail::check_hermitian_input(q, tol, "hermitian_eig");

  const auto n = q.rows();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(complex_adjoint(q));
  if (solver.info() != Eigen::Success) throw std::runtime_error("hermitian_eig: solver failed");
  const auto& lam = solver.eigenvalues();
  const auto& vec = solver.eigenvectors();
  const S pair_tol = detail::pairing_tolerance(q);

  EigenResult<S> result;
  result.eigenvalues = detail::take_pairs<S>(lam, pair_tol);
  result.eigenvectors = QuaternionMatrix<S>(n, n);

  auto to_quaternion = [&](Eigen::Index col) {
    QVec v(n);
    for (Eigen::Index u = 0; u < n; ++u) {
      const auto x1 = vec(u, col);
      const auto x2 = -std::conj(vec(u + n, col));
      v[u] = {x1.real(), x1.imag(), x2.real(), x2.imag()};
    }
    return v;
  };

  Eigen::Index out_col = 0;
  Eigen::Index begin = 0;
  while (begin < 2 * n) {
    Eigen::Index end = begin + 1;
    while (end < 2 * n && (lam(end) - lam(end - 1) <= pair_tol || (end - begin) % 2 == 1)) ++end;
    const auto m = (end - begin) / 2;

    std::vector<QVec> residual;
    residual.reserve(end - begin);
    for (auto c = begin; c < end; ++c) residual.push_back(to_quaternion(c));

    for (Eigen::Index picked = 0; picked < m; ++picked) {
      std::size_t best = 0;
      S best_norm = -1;
      for (std::size_t s = 0; s < residual.size(); ++s) {
        const S nn = std::sqrt(detail::inner(residual[s], residual[s]).r);
        if (nn > best_norm) {
          best_norm = nn;
          best = s;
        }
      }
      QVec basis = residual[best];
      for (auto& e : basis) e = (S(1) / best_norm) * e;
      residual.erase(residual.begin() + static_cast<std::ptrdiff_t>(best));
      for (auto& r : residual) {
        const auto alpha = detail::inner(basis, r);
        for (Eigen::Index u = 0; u < n; ++u) r[u] = r[u] - basis[u] * alpha;
      }
      for (Eigen::Index u = 0; u < n; ++u) result.eigenvectors.set(u, out_col, basis[u]);
      ++out_col;
    }
    begin = end;
  }
  return result;
}

}  // namespace qlap
