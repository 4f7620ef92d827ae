#include "qlap/laplacian.hpp"

#include <cmath>
#include <stdexcept>

namespace qlap {

namespace {

MatrixXd sgn(const MatrixXd& m) {
  return m.unaryExpr([](double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

MatrixXd upper(const MatrixXd& m) { return m.triangularView<Eigen::Upper>(); }
MatrixXd lower(const MatrixXd& m) { return m.triangularView<Eigen::Lower>(); }

void require_square(const MatrixXd& a, const char* who) {
  if (a.rows() != a.cols()) throw std::invalid_argument(std::string(who) + ": matrix is not square");
}

VectorXd inv_sqrt_degrees(const VectorXd& d) {
  VectorXd s(d.size());
  for (Index u = 0; u < d.size(); ++u) {
    if (!(d(u) > 0))
      throw std::domain_error("node " + std::to_string(u) + " is isolated (zero degree); cannot normalize");
    s(u) = 1.0 / std::sqrt(d(u));
  }
  return s;
}

}  // namespace

Topology topology_matrices(const MatrixXd& a) {
  require_square(a, "topology_matrices");
  Topology t;
  t.T = sgn(a.cwiseAbs());
  t.O = t.T.cwiseProduct(t.T.transpose());
  t.N = sgn((a - a.transpose()).cwiseAbs());
  t.R = sgn(a.cwiseAbs() - a.transpose().cwiseAbs());
  return t;
}

HComponents h_components(const Topology& t) {
  const Index n = t.T.rows();
  const MatrixXd ones = MatrixXd::Ones(n, n);
  HComponents h;
  h.H0 = ones - t.N;
  h.H1 = t.R.cwiseProduct(ones - t.O);
  h.H2 = t.O.cwiseProduct(t.N).cwiseProduct(upper(t.T) - lower(MatrixXd(t.T.transpose())));
  h.H3 = -h.H2;
  return h;
}

SymmetrizedAdjacency symmetrized_adjacencies(const MatrixXd& a) {
  require_square(a, "symmetrized_adjacencies");
  const MatrixXd at = a.transpose();
  SymmetrizedAdjacency s;
  s.As1 = 0.5 * (a + at);
  s.As2 = 0.5 * (upper(a) + lower(at));
  s.As3 = 0.5 * (lower(a) + upper(at));
  return s;
}

LaplacianBundle build_quaternionic(const MatrixXd& a) {
  require_square(a, "build_quaternionic");
  LaplacianBundle b;
  b.topo = topology_matrices(a);
  b.h = h_components(b.topo);
  b.as = symmetrized_adjacencies(a);
  b.Dbar = b.as.As1.cwiseAbs().rowwise().sum();
  b.Hq = QMatrix(b.as.As1.cwiseProduct(b.h.H0), b.as.As1.cwiseProduct(b.h.H1),
                 b.as.As2.cwiseProduct(b.h.H2), b.as.As3.cwiseProduct(b.h.H3));
  b.Lq = QMatrix::from_real(MatrixXd(b.Dbar.asDiagonal())) - b.Hq;
  if ((b.Dbar.array() > 0).all()) b.Lq_norm = normalize(b);
  return b;
}

LaplacianBundle build_quaternionic(const Digraph& g) { return build_quaternionic(g.adjacency()); }

QMatrix normalize(const LaplacianBundle& b) {
  const VectorXd s = inv_sqrt_degrees(b.Dbar);
  QMatrix out(b.Hq.rows(), b.Hq.cols());
  for (int c = 0; c < 4; ++c)
    out.component(c) = -(s.asDiagonal() * b.Hq.component(c) * s.asDiagonal());
  out.real().diagonal().array() += 1.0;
  return out;
}

std::string to_string(LaplacianKind kind) {
  switch (kind) {
    case LaplacianKind::Quaternionic: return "quaternionic";
    case LaplacianKind::Classical: return "classical";
    case LaplacianKind::SignMagnetic: return "sign-magnetic";
  }
  return "?";
}

LaplacianKind parse_laplacian_kind(const std::string& name) {
  if (name == "quaternionic") return LaplacianKind::Quaternionic;
  if (name == "classical") return LaplacianKind::Classical;
  if (name == "sign-magnetic") return LaplacianKind::SignMagnetic;
  throw std::invalid_argument("unknown laplacian '" + name +
                              "' (expected quaternionic, classical or sign-magnetic)");
}

namespace {

SignMagneticBundle sign_magnetic_from(const MatrixXd& a) {
  const Topology t = topology_matrices(a);
  const MatrixXd as = 0.5 * (a + a.transpose());
  const Index n = a.rows();
  SignMagneticBundle b;
  b.Dbar = as.cwiseAbs().rowwise().sum();
  b.Hsigma = MatrixXcd(n, n);
  b.Hsigma.real() = as.cwiseProduct(MatrixXd::Ones(n, n) - t.N);
  b.Hsigma.imag() = as.cwiseProduct(t.R);
  b.Lsigma = -b.Hsigma;
  b.Lsigma.diagonal().real() += b.Dbar;
  return b;
}

}  // namespace

QMatrix propagation_matrix(const Digraph& g, LaplacianKind kind) {
  const Index n = g.size();
  const MatrixXd a = g.adjacency() + MatrixXd::Identity(n, n);
  QMatrix h;
  VectorXd d;
  switch (kind) {
    case LaplacianKind::Quaternionic: {
      LaplacianBundle b = build_quaternionic(a);
      h = std::move(b.Hq);
      d = std::move(b.Dbar);
      break;
    }
    case LaplacianKind::Classical: {
      const MatrixXd as = 0.5 * (a + a.transpose());
      d = as.cwiseAbs().rowwise().sum();
      h = QMatrix::from_real(as);
      break;
    }
    case LaplacianKind::SignMagnetic: {
      SignMagneticBundle b = sign_magnetic_from(a);
      h = from_complex(b.Hsigma);
      d = std::move(b.Dbar);
      break;
    }
  }
  const VectorXd s = inv_sqrt_degrees(d);
  for (int c = 0; c < 4; ++c) h.component(c) = s.asDiagonal() * h.component(c) * s.asDiagonal();
  return h;
}

MatrixXd classical_laplacian(const Digraph& g, bool normalized) {
  const MatrixXd& a = g.adjacency();
  const MatrixXd as = 0.5 * (a + a.transpose());
  const VectorXd d = as.cwiseAbs().rowwise().sum();
  if (!normalized) return MatrixXd(d.asDiagonal()) - as;
  const VectorXd s = inv_sqrt_degrees(d);
  MatrixXd l = -(s.asDiagonal() * as * s.asDiagonal());
  l.diagonal().array() += 1.0;
  return l;
}

SignMagneticBundle sign_magnetic_laplacian(const Digraph& g) { return sign_magnetic_from(g.adjacency()); }

QMatrix from_complex(const MatrixXcd& m) {
  QMatrix q(m.rows(), m.cols());
  q.component(0) = m.real();
  q.component(1) = m.imag();
  return q;
}

MatrixXd reconstruct_adjacency(const QMatrix& hq) {
  if (hq.rows() != hq.cols()) throw std::invalid_argument("reconstruct_adjacency: matrix is not square");
  const Index n = hq.rows();
  MatrixXd a = MatrixXd::Zero(n, n);
  for (Index u = 0; u < n; ++u) {
    for (Index v = u + 1; v < n; ++v) {
      const Quatd h = hq(u, v);
      if (h.r != 0.0) {
        a(u, v) = a(v, u) = h.r;
      } else if (h.i > 0.0) {
        a(u, v) = 2.0 * h.i;
      } else if (h.i < 0.0) {
        a(v, u) = -2.0 * h.i;
      } else if (h.j != 0.0 || h.k != 0.0) {
        a(u, v) = 2.0 * h.j;
        a(v, u) = -2.0 * h.k;
      }
    }
  }
  return a;
}

}  // namespace qlap
