#pragma once

// Executable checks of the Laplacian's structural and spectral properties,
// run graph by graph over seeded DSBM corpora.

#include "qlap/digraph.hpp"
#include "qlap/quaternion.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qlap {

enum class Property { Thm1, Thm2, Thm3, Psd, LambdaMax, Hermitian, Orthogonality, Reconstruction };

std::string to_string(Property p);
Property parse_property(const std::string& name);
const std::vector<Property>& all_properties();

struct Tolerances {
  double exact = 0.0;        // integer-representable identities
  double identity = 1e-12;   // floating-point algebraic identities
  double spectral = 1e-9;    // relative, for eigenvalue bounds
};

enum class Outcome { Pass, Fail, Skip };

struct CheckResult {
  Outcome outcome = Outcome::Skip;
  double violation = 0.0;
  std::string detail;  // why skipped, or where it failed
};

/// One property on one graph. Skip when the graph is outside the property's
/// hypothesis:
///   thm1  symmetric nonnegative A; L^q equals the classical Laplacian
///   thm2  no asymmetric digons; Re + i Im1 of L^q equals L^sigma, Im2 = Im3 = 0
///   thm3  no symmetric digons; H^q = H^sigma.(1 - O) + O.H^m
///   psd   min eigenvalue of L^q and L^q_norm >= -tol (relative to ||L||_F)
///   lambda_max  max eigenvalue of L^q_norm <= 2 + tol (needs positive degrees)
CheckResult check_property(const Digraph& g, Property p, const Tolerances& tol = {});

struct CorpusSpec {
  std::string name;
  DsbmConfig config;  // config.seed is overwritten per graph
  std::uint64_t first_seed = 1;
  std::size_t count = 100;

  std::string describe() const;
};

/// Three regimes covering every theorem's hypothesis: undirected nonnegative,
/// directed with symmetric digons only, and signed with asymmetric digons.
std::vector<CorpusSpec> default_corpora(std::size_t count = 100);

struct PropertyTally {
  Property property;
  std::size_t pass = 0, fail = 0, skip = 0;
  double worst = 0.0;
  std::vector<std::string> failing;  // "<corpus>/<seed>" reproducers
};

struct CorpusRow {
  std::string corpus;
  PropertyTally tally;
};

struct VerificationReport {
  std::vector<std::string> corpora;  // descriptors
  std::vector<PropertyTally> properties;
  std::vector<CorpusRow> rows;  // per corpus and property

  bool ok() const;
  /// key=value lines, optionally followed by an aligned summary table.
  std::string to_text(bool table = false) const;
};

VerificationReport verify_corpus(const std::vector<CorpusSpec>& corpora,
                                 const std::vector<Property>& properties,
                                 const Tolerances& tol = {});

/// Same report shape for one loaded graph.
VerificationReport verify_graph(const Digraph& g, const std::string& name,
                                const std::vector<Property>& properties,
                                const Tolerances& tol = {});

/// Hermitian check of a stored matrix; the detail names the worst entry.
CheckResult check_hermitian_matrix(const QMatrix& q, double tol);
/// PSD check of a stored Hermitian matrix.
CheckResult check_psd_matrix(const QMatrix& q, double tol);

}  // namespace qlap
