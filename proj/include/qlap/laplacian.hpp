#pragma once

// Quaternionic, classical and sign-magnetic Laplacians of weighted digraphs.
//
// Notation: T = sgn|A|, O = T.*T', N = sgn|A - A'|, R = sgn(|A| - |A'|);
// U(.) keeps entries with u <= v, L(.) keeps u >= v.

#include "qlap/digraph.hpp"
#include "qlap/quaternion.hpp"

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <string>

namespace qlap {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using MatrixXcd = Eigen::MatrixXcd;

struct Topology {
  MatrixXd T, O, N, R;
};

struct HComponents {
  MatrixXd H0, H1, H2, H3;
};

struct SymmetrizedAdjacency {
  MatrixXd As1, As2, As3;
};

struct LaplacianBundle {
  Topology topo;
  HComponents h;
  SymmetrizedAdjacency as;
  VectorXd Dbar;
  QMatrix Hq;
  QMatrix Lq;
  std::optional<QMatrix> Lq_norm;  // empty when some Dbar entry is zero
};

struct SignMagneticBundle {
  MatrixXcd Hsigma;
  MatrixXcd Lsigma;
  VectorXd Dbar;
};

Topology topology_matrices(const MatrixXd& a);
HComponents h_components(const Topology& t);
SymmetrizedAdjacency symmetrized_adjacencies(const MatrixXd& a);

/// Works on any square real matrix; nonzero diagonals are allowed so the
/// renormalized A + I goes through the same code.
LaplacianBundle build_quaternionic(const MatrixXd& a);
LaplacianBundle build_quaternionic(const Digraph& g);

/// I - D^-1/2 Hq D^-1/2. Throws std::domain_error naming the first isolated node.
QMatrix normalize(const LaplacianBundle& b);

enum class LaplacianKind { Quaternionic, Classical, SignMagnetic };

std::string to_string(LaplacianKind kind);
LaplacianKind parse_laplacian_kind(const std::string& name);

/// D~^-1/2 H~ D~^-1/2 built from A + I. Classical uses only the real channel,
/// sign-magnetic the real and i channels.
QMatrix propagation_matrix(const Digraph& g, LaplacianKind kind = LaplacianKind::Quaternionic);

/// D - As with As = (A + A')/2 and D = Diag(|As| e); normalized gives
/// I - D^-1/2 As D^-1/2.
MatrixXd classical_laplacian(const Digraph& g, bool normalized);

SignMagneticBundle sign_magnetic_laplacian(const Digraph& g);

/// Embeds a complex matrix as the (R, I) channels of a quaternion matrix.
QMatrix from_complex(const MatrixXcd& m);

/// Recovers an adjacency matrix from Hq by case analysis of each pair u < v:
/// real part -> symmetric digon, i part -> single edge, j/k parts ->
/// asymmetric digon. A single edge u -> v of weight w and v -> u of weight -w
/// share the same Hq, so the result equals canonical_orientation(A).
MatrixXd reconstruct_adjacency(const QMatrix& hq);

}  // namespace qlap
