#pragma once

// Weighted digraphs: storage, edge-list I/O, seeded DSBM generation, degree
// features and the node/edge splits used by the learning tasks.

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qlap {

using Index = Eigen::Index;
using NodePair = std::pair<Index, Index>;

/// Dense weighted digraph. A(u, v) is the weight of u -> v, 0 when absent.
/// The diagonal is always zero and every weight is finite.
class Digraph {
 public:
  Digraph() = default;
  explicit Digraph(Eigen::MatrixXd adjacency, std::vector<int> labels = {});

  Index size() const { return adjacency_.rows(); }
  const Eigen::MatrixXd& adjacency() const { return adjacency_; }
  double weight(Index u, Index v) const { return adjacency_(u, v); }

  bool has_labels() const { return !labels_.empty(); }
  const std::vector<int>& labels() const { return labels_; }
  int num_classes() const;

  Digraph with_labels(std::vector<int> labels) const { return Digraph(adjacency_, std::move(labels)); }

 private:
  Eigen::MatrixXd adjacency_;
  std::vector<int> labels_;
};

// --- file formats ----------------------------------------------------------

/// `u <TAB> v <TAB> w` per line, 0-based ids; optional `# n=<count>` header;
/// blank lines and other `#` comments ignored; duplicate pairs sum.
Digraph parse_edge_list(std::istream& is);
std::string format_edge_list(const Digraph& g);

/// `node_id <TAB> class_id` per line; every node must be labeled.
std::vector<int> parse_labels(std::istream& is, Index n);
std::string format_labels(const std::vector<int>& labels);

Digraph load_graph(const std::string& edge_path, const std::string& label_path = {});

// --- generation ------------------------------------------------------------

/// How the two directions of a digon get their weights.
enum class DigonWeights { Independent, Equal, Distinct };
/// Sign flips: each directed weight independently, or once per node pair.
enum class SignMode { PerEdge, PerPair };

struct DsbmConfig {
  Index nodes_per_cluster = 30;
  Index clusters = 5;
  double intra_prob = 0.1;      // edge probability inside a cluster
  double inter_prob = 0.6;      // edge probability across clusters
  double direction_prob = 0.2;  // P(lower cluster -> higher cluster)
  double digon_fraction = 0.2;
  std::int64_t weight_low = 2;
  std::int64_t weight_high = 4;
  bool signed_weights = false;
  SignMode sign_mode = SignMode::PerEdge;
  DigonWeights digon_weights = DigonWeights::Independent;
  bool undirected = false;  // every edge becomes a symmetric pair
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  Index node_count() const { return nodes_per_cluster * clusters; }

  /// Desk-scale Di150 family: 150 nodes in 5 clusters.
  static DsbmConfig di150(double delta, std::uint64_t seed = 0);
  /// Desk-scale Di500 family: 500 nodes in 5 clusters, sparser inter-cluster.
  static DsbmConfig di500(double delta, std::uint64_t seed = 0);
};

/// Directed stochastic block model with digons.
///
/// Nodes are numbered cluster by cluster and labeled with their cluster. For
/// each pair u < v (one RNG substream per pair index): the pair is connected
/// with intra_prob or inter_prob; a connected pair becomes a digon with
/// probability digon_fraction, otherwise a single edge oriented u -> v with
/// probability direction_prob when the clusters differ and 1/2 inside a
/// cluster. Weights are uniform integers in [weight_low, weight_high].
Digraph generate_dsbm(const DsbmConfig& cfg);

struct GraphStats {
  Index nodes = 0;
  Index edges = 0;            // nonzero directed entries
  Index connected_pairs = 0;  // unordered pairs with at least one edge
  Index digons = 0;
  Index asymmetric_digons = 0;
  double digon_fraction() const {
    return connected_pairs ? static_cast<double>(digons) / static_cast<double>(connected_pairs) : 0.0;
  }
};
GraphStats graph_stats(const Digraph& g);

/// n x 2 matrix: column 0 in-degree, column 1 out-degree (weighted, optionally
/// over absolute weights).
Eigen::MatrixXd degree_features(const Digraph& g, bool use_abs);

// --- splits ----------------------------------------------------------------

struct SplitFractions {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
  void validate() const;
};

struct NodeSplit {
  std::vector<Index> train, val, test;
};

/// Stratified by class, deterministic in seed. Every class needs >= 3 members.
NodeSplit split_nodes(const Digraph& g, const SplitFractions& fractions, std::uint64_t seed);

enum class EdgeTask { ThreeClass, FourClass, FiveClass };

int num_classes(EdgeTask task);
std::string to_string(EdgeTask task);

/// Class of the ordered pair (u, v):
///  3CEP: 0 (u,v) in E, 1 (v,u) in E, 2 neither.
///  4CEP: 0 (u,v) in E+, 1 (u,v) in E-, 2 (v,u) in E+, 3 (v,u) in E-.
///  5CEP: 4CEP classes plus 4 for neither.
/// Digons (both directions present) have no class.
std::optional<int> edge_class(const Eigen::MatrixXd& adjacency, Index u, Index v, EdgeTask task);

struct LabeledPairs {
  std::vector<NodePair> pairs;
  std::vector<int> labels;
  std::size_t size() const { return pairs.size(); }
};

struct EdgeSplit {
  LabeledPairs train, val, test;
  Digraph training_graph;         // original minus the val/test edges
  std::vector<NodePair> removed;  // directed edges taken out, as (src, dst)
};

/// Samples labeled ordered pairs for an edge-classification task.
///
/// Single (non-digon) edges are the edge-class samples, each presented in a
/// random orientation. Val/test edges are removed from the training graph,
/// but never edges of a seeded spanning forest, so weak components stay
/// connected. Non-edge samples (3/5CEP) are count-matched to the mean
/// edge-class size.
EdgeSplit split_edges(const Digraph& g, EdgeTask task, const SplitFractions& fractions,
                      std::uint64_t seed);

/// Flips every single negative edge u -> v (w < 0) to v -> u with weight -w.
/// Such a pair and its flip share the same quaternionic Hermitian matrix.
Eigen::MatrixXd canonical_orientation(const Eigen::MatrixXd& adjacency);

}  // namespace qlap
