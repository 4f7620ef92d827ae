#include "qlap/verify.hpp"

#include "qlap/hermitian_eig.hpp"
#include "qlap/laplacian.hpp"
#include "qlap/matrix_io.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace qlap {

namespace {

struct PropertyName {
  Property p;
  const char* name;
};

constexpr PropertyName kNames[] = {
    {Property::Thm1, "thm1"},
    {Property::Thm2, "thm2"},
    {Property::Thm3, "thm3"},
    {Property::Psd, "psd"},
    {Property::LambdaMax, "lambda_max"},
    {Property::Hermitian, "hermitian"},
    {Property::Orthogonality, "orthogonality"},
    {Property::Reconstruction, "reconstruction"},
};

CheckResult skip(std::string why) { return {Outcome::Skip, 0.0, std::move(why)}; }

CheckResult judge(double violation, double tol, std::string where = {}) {
  return {violation <= tol ? Outcome::Pass : Outcome::Fail, violation, std::move(where)};
}

bool has_pair(const MatrixXd& a, bool (*pred)(double, double)) {
  for (Index u = 0; u < a.rows(); ++u)
    for (Index v = u + 1; v < a.cols(); ++v)
      if (pred(a(u, v), a(v, u))) return true;
  return false;
}

bool asymmetric_digon(double x, double y) { return x != 0.0 && y != 0.0 && x != y; }
bool symmetric_digon(double x, double y) { return x != 0.0 && x == y; }

double max_abs(const MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double relative_floor(double lambda_min, double scale) {
  return std::max(0.0, -lambda_min) / std::max(scale, 1e-300);
}

CheckResult thm1(const Digraph& g) {
  const MatrixXd& a = g.adjacency();
  if (a != MatrixXd(a.transpose())) return skip("adjacency is not symmetric");
  if ((a.array() < 0).any()) return skip("negative weights");
  if ((a.rowwise().sum().array() <= 0).any()) return skip("zero-degree node");
  const LaplacianBundle b = build_quaternionic(g);
  const MatrixXd l = classical_laplacian(g, false);
  double v = max_abs(b.Lq.real() - l);
  for (int c = 1; c < 4; ++c) v = std::max(v, max_abs(b.Lq.component(c)));
  return {Outcome::Pass, v, {}};
}

CheckResult thm2(const Digraph& g) {
  if (has_pair(g.adjacency(), asymmetric_digon)) return skip("graph has asymmetric digons");
  const LaplacianBundle b = build_quaternionic(g);
  const SignMagneticBundle s = sign_magnetic_laplacian(g);
  double v = std::max(max_abs(b.Lq.real() - s.Lsigma.real()), max_abs(b.Lq.component(1) - s.Lsigma.imag()));
  v = std::max({v, max_abs(b.Lq.component(2)), max_abs(b.Lq.component(3))});
  return {Outcome::Pass, v, {}};
}

CheckResult thm3(const Digraph& g) {
  const MatrixXd& a = g.adjacency();
  if (has_pair(a, symmetric_digon)) return skip("graph has symmetric digons");
  const Index n = g.size();
  const LaplacianBundle b = build_quaternionic(g);
  const SignMagneticBundle s = sign_magnetic_laplacian(g);
  const MatrixXd& O = b.topo.O;
  const MatrixXd keep = MatrixXd::Ones(n, n) - O;
  const MatrixXd tt = b.topo.T.transpose();
  const MatrixXd h21 =
      b.topo.N.cwiseProduct(MatrixXd(b.topo.T.triangularView<Eigen::Upper>()) - MatrixXd(tt.triangularView<Eigen::Lower>()));
  const MatrixXd h31 = -h21;
  const QMatrix expected(MatrixXd(s.Hsigma.real()).cwiseProduct(keep), MatrixXd(s.Hsigma.imag()).cwiseProduct(keep),
                         O.cwiseProduct(b.as.As2.cwiseProduct(h21)), O.cwiseProduct(b.as.As3.cwiseProduct(h31)));
  return {Outcome::Pass, max_abs_diff(b.Hq, expected), {}};
}

CheckResult psd(const Digraph& g) {
  const LaplacianBundle b = build_quaternionic(g);
  const auto lam = hermitian_eigenvalues(b.Lq, 0.0);
  double v = lam.size() ? relative_floor(lam(0), frobenius_norm(b.Lq)) : 0.0;
  std::string where = lam.size() ? "min eigenvalue of L " + format_double(lam(0)) : "";
  if (b.Lq_norm) {
    const auto ln = hermitian_eigenvalues(*b.Lq_norm, 1e-12);
    const double vn = relative_floor(ln(0), frobenius_norm(*b.Lq_norm));
    if (vn > v) {
      v = vn;
      where = "min eigenvalue of L_norm " + format_double(ln(0));
    }
  }
  return {Outcome::Pass, v, where};
}

CheckResult lambda_max(const Digraph& g) {
  const LaplacianBundle b = build_quaternionic(g);
  if (!b.Lq_norm) return skip("zero-degree node; L_norm undefined");
  const auto ln = hermitian_eigenvalues(*b.Lq_norm, 1e-12);
  const double top = ln(ln.size() - 1);
  return {Outcome::Pass, std::max(0.0, top - 2.0) / 2.0, "max eigenvalue " + format_double(top)};
}

CheckResult hermitian(const Digraph& g) {
  const LaplacianBundle b = build_quaternionic(g);
  double v = std::max(max_abs_diff(b.Hq, conjugate_transpose(b.Hq)), max_abs_diff(b.Lq, conjugate_transpose(b.Lq)));
  return {Outcome::Pass, v, {}};
}

CheckResult orthogonality(const Digraph& g) {
  const LaplacianBundle b = build_quaternionic(g);
  double offending = 0;
  std::string where;
  for (Index u = 0; u < g.size(); ++u) {
    for (Index v = 0; v < g.size(); ++v) {
      if (u == v) continue;
      const Quatd h = b.Hq(u, v);
      const int groups = (h.r != 0.0) + (h.i != 0.0) + (h.j != 0.0 || h.k != 0.0);
      if (groups > 1) {
        if (offending == 0) where = "pair (" + std::to_string(u) + "," + std::to_string(v) + ")";
        offending += 1;
      }
    }
  }
  return {Outcome::Pass, offending, where};
}

CheckResult reconstruction(const Digraph& g) {
  const LaplacianBundle b = build_quaternionic(g);
  return {Outcome::Pass, max_abs(reconstruct_adjacency(b.Hq) - canonical_orientation(g.adjacency())), {}};
}

double tolerance_for(Property p, const Tolerances& tol) {
  switch (p) {
    case Property::Thm1:
    case Property::Hermitian:
    case Property::Orthogonality:
    case Property::Reconstruction: return tol.exact;
    case Property::Thm2:
    case Property::Thm3: return tol.identity;
    case Property::Psd:
    case Property::LambdaMax: return tol.spectral;
  }
  return 0.0;
}

void add(PropertyTally& t, const CheckResult& r, const std::string& tag) {
  switch (r.outcome) {
    case Outcome::Pass: ++t.pass; break;
    case Outcome::Fail:
      ++t.fail;
      t.failing.push_back(tag);
      break;
    case Outcome::Skip: ++t.skip; break;
  }
  if (r.outcome != Outcome::Skip) t.worst = std::max(t.worst, r.violation);
}

PropertyTally blank(Property p) {
  PropertyTally t;
  t.property = p;
  return t;
}

void merge(PropertyTally& into, const PropertyTally& from) {
  into.pass += from.pass;
  into.fail += from.fail;
  into.skip += from.skip;
  into.worst = std::max(into.worst, from.worst);
  into.failing.insert(into.failing.end(), from.failing.begin(), from.failing.end());
}

}  // namespace

std::string to_string(Property p) {
  for (const auto& e : kNames)
    if (e.p == p) return e.name;
  return "?";
}

Property parse_property(const std::string& name) {
  for (const auto& e : kNames)
    if (name == e.name) return e.p;
  throw std::invalid_argument("unknown property '" + name + "'");
}

const std::vector<Property>& all_properties() {
  static const std::vector<Property> all = [] {
    std::vector<Property> v;
    for (const auto& e : kNames) v.push_back(e.p);
    return v;
  }();
  return all;
}

CheckResult check_property(const Digraph& g, Property p, const Tolerances& tol) {
  CheckResult r;
  switch (p) {
    case Property::Thm1: r = thm1(g); break;
    case Property::Thm2: r = thm2(g); break;
    case Property::Thm3: r = thm3(g); break;
    case Property::Psd: r = psd(g); break;
    case Property::LambdaMax: r = lambda_max(g); break;
    case Property::Hermitian: r = hermitian(g); break;
    case Property::Orthogonality: r = orthogonality(g); break;
    case Property::Reconstruction: r = reconstruction(g); break;
  }
  if (r.outcome == Outcome::Skip) return r;
  return judge(r.violation, tolerance_for(p, tol), r.detail);
}

std::string CorpusSpec::describe() const {
  std::ostringstream os;
  const DsbmConfig& c = config;
  os << name << ": dsbm clusters=" << c.clusters << " nodes_per_cluster=" << c.nodes_per_cluster
     << " alpha_in=" << format_double(c.intra_prob) << " alpha_out=" << format_double(c.inter_prob)
     << " beta=" << format_double(c.direction_prob) << " delta=" << format_double(c.digon_fraction)
     << " weights=" << c.weight_low << ".." << c.weight_high
     << " signed=" << (c.signed_weights ? (c.sign_mode == SignMode::PerPair ? "per-pair" : "per-edge") : "no")
     << " digon_weights="
     << (c.digon_weights == DigonWeights::Equal ? "equal"
                                                 : c.digon_weights == DigonWeights::Distinct ? "distinct" : "independent")
     << " undirected=" << (c.undirected ? "yes" : "no") << " seeds=" << first_seed << ".."
     << first_seed + count - 1;
  return os.str();
}

std::vector<CorpusSpec> default_corpora(std::size_t count) {
  std::vector<CorpusSpec> out;

  CorpusSpec undirected{"undirected", DsbmConfig::di150(0.0), 1, count};
  undirected.config.undirected = true;
  out.push_back(undirected);

  CorpusSpec symmetric{"symmetric-digons", DsbmConfig::di150(0.3), 1001, count};
  symmetric.config.digon_weights = DigonWeights::Equal;
  out.push_back(symmetric);

  // Opposite-sign digons fall outside the spectral bounds (see tests), so the
  // signed regime flips signs once per node pair.
  CorpusSpec signed_rich{"signed-asymmetric", DsbmConfig::di150(0.5), 2001, count};
  signed_rich.config.signed_weights = true;
  signed_rich.config.sign_mode = SignMode::PerPair;
  signed_rich.config.digon_weights = DigonWeights::Distinct;
  out.push_back(signed_rich);
  return out;
}

bool VerificationReport::ok() const {
  return std::all_of(properties.begin(), properties.end(), [](const PropertyTally& t) { return t.fail == 0; });
}

std::string VerificationReport::to_text(bool table) const {
  std::ostringstream os;
  for (std::size_t c = 0; c < corpora.size(); ++c) os << "corpus." << c << '=' << corpora[c] << '\n';
  for (const auto& t : properties) {
    const std::string key = "property." + to_string(t.property);
    os << key << ".pass=" << t.pass << '\n'
       << key << ".fail=" << t.fail << '\n'
       << key << ".skip=" << t.skip << '\n'
       << key << ".worst=" << format_double(t.worst) << '\n';
    if (t.skip > 0 && t.pass == 0 && t.fail == 0) os << key << ".status=skipped\n";
    else os << key << ".status=" << (t.fail ? "fail" : "pass") << '\n';
    if (!t.failing.empty()) {
      os << key << ".failing_seeds=";
      for (std::size_t i = 0; i < t.failing.size(); ++i) os << (i ? "," : "") << t.failing[i];
      os << '\n';
    }
  }
  os << "status=" << (ok() ? "pass" : "fail") << '\n';
  if (table) {
    os << '\n'
       << std::left << std::setw(20) << "corpus" << std::setw(16) << "property" << std::right << std::setw(6)
       << "pass" << std::setw(6) << "fail" << std::setw(6) << "skip" << "  worst\n";
    for (const auto& r : rows) {
      os << std::left << std::setw(20) << r.corpus << std::setw(16) << to_string(r.tally.property) << std::right
         << std::setw(6) << r.tally.pass << std::setw(6) << r.tally.fail << std::setw(6) << r.tally.skip << "  "
         << format_double(r.tally.worst) << '\n';
    }
  }
  return os.str();
}

VerificationReport verify_corpus(const std::vector<CorpusSpec>& corpora, const std::vector<Property>& properties,
                                 const Tolerances& tol) {
  VerificationReport report;
  for (Property p : properties) report.properties.push_back(blank(p));
  for (const auto& corpus : corpora) {
    report.corpora.push_back(corpus.describe());
    std::vector<PropertyTally> local;
    for (Property p : properties) local.push_back(blank(p));
    for (std::size_t k = 0; k < corpus.count; ++k) {
      DsbmConfig cfg = corpus.config;
      cfg.seed = corpus.first_seed + k;
      const Digraph g = generate_dsbm(cfg);
      const std::string tag = corpus.name + "/" + std::to_string(cfg.seed);
      for (std::size_t i = 0; i < properties.size(); ++i) add(local[i], check_property(g, properties[i], tol), tag);
    }
    for (std::size_t i = 0; i < properties.size(); ++i) {
      merge(report.properties[i], local[i]);
      report.rows.push_back({corpus.name, local[i]});
    }
  }
  return report;
}

VerificationReport verify_graph(const Digraph& g, const std::string& name, const std::vector<Property>& properties,
                                const Tolerances& tol) {
  VerificationReport report;
  report.corpora.push_back(name + ": file nodes=" + std::to_string(g.size()));
  for (Property p : properties) {
    PropertyTally t = blank(p);
    add(t, check_property(g, p, tol), name);
    report.properties.push_back(t);
    report.rows.push_back({name, t});
  }
  return report;
}

CheckResult check_hermitian_matrix(const QMatrix& q, double tol) {
  if (q.rows() != q.cols()) throw std::invalid_argument("hermitian check: matrix is not square");
  const QMatrix qs = conjugate_transpose(q);
  double worst = 0.0;
  Index wu = 0, wv = 0;
  int wc = 0;
  for (int c = 0; c < 4; ++c) {
    for (Index u = 0; u < q.rows(); ++u) {
      for (Index v = 0; v < q.cols(); ++v) {
        const double d = std::abs(q.component(c)(u, v) - qs.component(c)(u, v));
        if (d > worst) {
          worst = d;
          wu = u;
          wv = v;
          wc = c;
        }
      }
    }
  }
  std::string where;
  if (worst > 0) {
    where = "entry (" + std::to_string(wu) + "," + std::to_string(wv) + ") component " +
            std::string(1, "RIJK"[wc]);
  }
  return judge(worst, tol, where);
}

CheckResult check_psd_matrix(const QMatrix& q, double tol) {
  if (q.rows() != q.cols() || !is_hermitian(q, 1e-12 * std::max(1.0, frobenius_norm(q))))
    return skip("matrix is not Hermitian");
  const auto lam = hermitian_eigenvalues(q, 1e-12 * std::max(1.0, frobenius_norm(q)));
  if (lam.size() == 0) return judge(0.0, tol);
  return judge(relative_floor(lam(0), frobenius_norm(q)), tol, "min eigenvalue " + format_double(lam(0)));
}

}  // namespace qlap
