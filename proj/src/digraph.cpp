#include "qlap/digraph.hpp"

#include "qlap/matrix_io.hpp"
#include "qlap/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qlap {

Digraph::Digraph(Eigen::MatrixXd adjacency, std::vector<int> labels)
    : adjacency_(std::move(adjacency)), labels_(std::move(labels)) {
  if (adjacency_.rows() != adjacency_.cols())
    throw std::invalid_argument("Digraph: adjacency must be square");
  if (adjacency_.rows() < 1) throw std::invalid_argument("Digraph: needs at least one node");
  if (!adjacency_.allFinite()) throw std::invalid_argument("Digraph: non-finite weight");
  for (Index u = 0; u < size(); ++u)
    if (adjacency_(u, u) != 0.0)
      throw std::invalid_argument("Digraph: self-loop at node " + std::to_string(u));
  if (!labels_.empty()) {
    if (static_cast<Index>(labels_.size()) != size())
      throw std::invalid_argument("Digraph: label count differs from node count");
    for (int c : labels_)
      if (c < 0) throw std::invalid_argument("Digraph: negative class id");
  }
}

int Digraph::num_classes() const {
  return labels_.empty() ? 0 : *std::max_element(labels_.begin(), labels_.end()) + 1;
}

// ---------------------------------------------------------------------------

Digraph parse_edge_list(std::istream& is) {
  struct Edge {
    long long u, v;
    double w;
  };
  std::vector<Edge> edges;
  long long header_n = -1;
  long long max_id = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      const auto pos = line.find("n=", first);
      if (pos != std::string::npos && line.find_first_not_of(" \t", first + 1) == pos) {
        std::istringstream hs(line.substr(pos + 2));
        long long n = -1;
        if (!(hs >> n) || n < 1)
          throw DataError("edge list line " + std::to_string(lineno) + ": bad node-count header");
        header_n = n;
      }
      continue;
    }
    std::istringstream ls(line);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);
    const std::string where = "edge list line " + std::to_string(lineno);
    if (tok.size() < 2 || tok.size() > 3) throw DataError(where + ": expected 'u v w'");
    auto parse_id = [&](const std::string& s) {
      std::size_t used = 0;
      long long id = -1;
      try {
        id = std::stoll(s, &used);
      } catch (const std::exception&) {
        throw DataError(where + ": bad node id '" + s + "'");
      }
      if (used != s.size() || id < 0) throw DataError(where + ": bad node id '" + s + "'");
      return id;
    };
    Edge e{parse_id(tok[0]), parse_id(tok[1]), tok.size() == 3 ? parse_double(tok[2], where) : 1.0};
    if (e.u == e.v) throw DataError(where + ": self-loop " + tok[0] + " -> " + tok[1]);
    if (!std::isfinite(e.w)) throw DataError(where + ": non-finite weight");
    max_id = std::max({max_id, e.u, e.v});
    edges.push_back(e);
  }
  long long n = header_n > 0 ? header_n : max_id + 1;
  if (n < 1) throw DataError("edge list: no nodes (add a '# n=<count>' header)");
  if (max_id >= n)
    throw DataError("edge list: node id " + std::to_string(max_id) + " exceeds header n=" +
                    std::to_string(n));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : edges) a(e.u, e.v) += e.w;
  if (!a.allFinite()) throw DataError("edge list: summed weight overflows");
  return Digraph(std::move(a));
}

std::string format_edge_list(const Digraph& g) {
  std::ostringstream os;
  os << "# n=" << g.size() << '\n';
  const auto& a = g.adjacency();
  for (Index u = 0; u < g.size(); ++u)
    for (Index v = 0; v < g.size(); ++v)
      if (a(u, v) != 0.0) os << u << '\t' << v << '\t' << format_double(a(u, v)) << '\n';
  return os.str();
}

std::vector<int> parse_labels(std::istream& is, Index n) {
  std::vector<int> labels(n, -1);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    long long node = -1, cls = -1;
    std::string extra;
    if (!(ls >> node >> cls) || (ls >> extra) || node < 0 || cls < 0)
      throw DataError("label file line " + std::to_string(lineno) + ": expected 'node class'");
    if (node >= n)
      throw DataError("label file line " + std::to_string(lineno) + ": node " +
                      std::to_string(node) + " out of range");
    labels[node] = static_cast<int>(cls);
  }
  for (Index u = 0; u < n; ++u)
    if (labels[u] < 0) throw DataError("label file: node " + std::to_string(u) + " has no label");
  return labels;
}

std::string format_labels(const std::vector<int>& labels) {
  std::ostringstream os;
  for (std::size_t u = 0; u < labels.size(); ++u) os << u << '\t' << labels[u] << '\n';
  return os.str();
}

Digraph load_graph(const std::string& edge_path, const std::string& label_path) {
  std::ifstream in(edge_path);
  if (!in) throw DataError("cannot open edge list '" + edge_path + "'");
  Digraph g = parse_edge_list(in);
  if (label_path.empty()) return g;
  std::ifstream lin(label_path);
  if (!lin) throw DataError("cannot open label file '" + label_path + "'");
  return g.with_labels(parse_labels(lin, g.size()));
}

// ---------------------------------------------------------------------------

void DsbmConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument(std::string("dsbm: ") + name + " must lie in [0, 1]");
  };
  if (nodes_per_cluster < 1) throw std::invalid_argument("dsbm: nodes_per_cluster must be >= 1");
  if (clusters < 1) throw std::invalid_argument("dsbm: clusters must be >= 1");
  prob(intra_prob, "intra_prob");
  prob(inter_prob, "inter_prob");
  prob(direction_prob, "direction_prob");
  prob(digon_fraction, "digon_fraction");
  if (weight_low < 1) throw std::invalid_argument("dsbm: weight_low must be >= 1");
  if (weight_high < weight_low) throw std::invalid_argument("dsbm: weight_high must be >= weight_low");
  if (digon_weights == DigonWeights::Distinct && weight_high == weight_low && digon_fraction > 0 &&
      !undirected)
    throw std::invalid_argument("dsbm: distinct digon weights need weight_high > weight_low");
  constexpr Index kMaxNodes = 1 << 20;
  if (nodes_per_cluster > kMaxNodes / clusters)
    throw std::invalid_argument("dsbm: node count overflows");
}

DsbmConfig DsbmConfig::di150(double delta, std::uint64_t seed) {
  DsbmConfig c;
  c.nodes_per_cluster = 30;
  c.clusters = 5;
  c.intra_prob = 0.1;
  c.inter_prob = 0.6;
  c.direction_prob = 0.2;
  c.digon_fraction = delta;
  c.seed = seed;
  return c;
}

DsbmConfig DsbmConfig::di500(double delta, std::uint64_t seed) {
  DsbmConfig c = di150(delta, seed);
  c.nodes_per_cluster = 100;
  c.inter_prob = 0.1;
  return c;
}

Digraph generate_dsbm(const DsbmConfig& cfg) {
  cfg.validate();
  const Index n = cfg.node_count();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> labels(n);
  for (Index u = 0; u < n; ++u) labels[u] = static_cast<int>(u / cfg.nodes_per_cluster);

  const Rng root(cfg.seed);
  std::uint64_t pair_index = 0;
  for (Index u = 0; u < n; ++u) {
    for (Index v = u + 1; v < n; ++v, ++pair_index) {
      Rng rng = root.substream("dsbm.pair", pair_index);
      // Fixed draw order per pair keeps streams aligned across configs.
      const bool same = labels[u] == labels[v];
      const bool exists = rng.bernoulli(same ? cfg.intra_prob : cfg.inter_prob);
      const bool digon = rng.bernoulli(cfg.digon_fraction);
      const double forward_p = same ? 0.5 : cfg.direction_prob;
      const bool forward = rng.bernoulli(forward_p);
      const auto w1 = static_cast<double>(rng.integer(cfg.weight_low, cfg.weight_high));
      auto w2 = static_cast<double>(rng.integer(cfg.weight_low, cfg.weight_high));
      const bool flip1 = rng.bernoulli(0.5);
      const bool flip2 = rng.bernoulli(0.5);
      if (!exists) continue;

      double s1 = 1.0, s2 = 1.0;
      if (cfg.signed_weights) {
        s1 = flip1 ? -1.0 : 1.0;
        s2 = cfg.sign_mode == SignMode::PerPair ? s1 : (flip2 ? -1.0 : 1.0);
      }
      if (cfg.undirected) {
        a(u, v) = a(v, u) = s1 * w1;
      } else if (digon) {
        if (cfg.digon_weights == DigonWeights::Equal) {
          w2 = w1;
        } else if (cfg.digon_weights == DigonWeights::Distinct) {
          while (w2 == w1) w2 = static_cast<double>(rng.integer(cfg.weight_low, cfg.weight_high));
        }
        a(u, v) = s1 * w1;
        a(v, u) = s2 * w2;
        if (cfg.digon_weights == DigonWeights::Equal) a(v, u) = a(u, v);
      } else if (forward) {
        a(u, v) = s1 * w1;
      } else {
        a(v, u) = s1 * w1;
      }
    }
  }
  return Digraph(std::move(a), std::move(labels));
}

GraphStats graph_stats(const Digraph& g) {
  GraphStats s;
  const auto& a = g.adjacency();
  s.nodes = g.size();
  for (Index u = 0; u < s.nodes; ++u) {
    for (Index v = 0; v < s.nodes; ++v) {
      if (a(u, v) != 0.0) ++s.edges;
      if (v <= u) continue;
      const bool f = a(u, v) != 0.0, b = a(v, u) != 0.0;
      if (f || b) ++s.connected_pairs;
      if (f && b) {
        ++s.digons;
        if (a(u, v) != a(v, u)) ++s.asymmetric_digons;
      }
    }
  }
  return s;
}

Eigen::MatrixXd degree_features(const Digraph& g, bool use_abs) {
  const Eigen::MatrixXd a = use_abs ? Eigen::MatrixXd(g.adjacency().cwiseAbs()) : g.adjacency();
  Eigen::MatrixXd x(g.size(), 2);
  x.col(0) = a.colwise().sum().transpose();
  x.col(1) = a.rowwise().sum();
  return x;
}

// ---------------------------------------------------------------------------

void SplitFractions::validate() const {
  if (train < 0 || val < 0 || test < 0 || std::abs(train + val + test - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must be nonnegative and sum to 1");
}

namespace {

Index portion(double fraction, Index total) {
  if (fraction <= 0.0) return 0;
  return std::max<Index>(1, std::llround(fraction * static_cast<double>(total)));
}

}  // namespace

NodeSplit split_nodes(const Digraph& g, const SplitFractions& fractions, std::uint64_t seed) {
  fractions.validate();
  if (!g.has_labels()) throw std::invalid_argument("split_nodes: graph has no labels");
  std::map<int, std::vector<Index>> by_class;
  for (Index u = 0; u < g.size(); ++u) by_class[g.labels()[u]].push_back(u);

  const Rng root(seed);
  NodeSplit split;
  for (auto& [cls, members] : by_class) {
    const Index k = static_cast<Index>(members.size());
    if (k < 3)
      throw std::invalid_argument("split_nodes: class " + std::to_string(cls) + " has " +
                                  std::to_string(k) + " members, need at least 3");
    Rng rng = root.substream("split_nodes.class", static_cast<std::uint64_t>(cls));
    rng.shuffle(members);
    const Index n_val = portion(fractions.val, k);
    const Index n_test = portion(fractions.test, k);
    if (n_val + n_test >= k && fractions.train > 0)
      throw std::invalid_argument("split_nodes: class " + std::to_string(cls) + " too small to split");
    split.test.insert(split.test.end(), members.begin(), members.begin() + n_test);
    split.val.insert(split.val.end(), members.begin() + n_test, members.begin() + n_test + n_val);
    split.train.insert(split.train.end(), members.begin() + n_test + n_val, members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

int num_classes(EdgeTask task) {
  switch (task) {
    case EdgeTask::ThreeClass: return 3;
    case EdgeTask::FourClass: return 4;
    case EdgeTask::FiveClass: return 5;
  }
  return 0;
}

std::string to_string(EdgeTask task) {
  switch (task) {
    case EdgeTask::ThreeClass: return "3CEP";
    case EdgeTask::FourClass: return "4CEP";
    case EdgeTask::FiveClass: return "5CEP";
  }
  return "?";
}

std::optional<int> edge_class(const Eigen::MatrixXd& a, Index u, Index v, EdgeTask task) {
  if (u == v) return std::nullopt;
  const double f = a(u, v), b = a(v, u);
  if (f != 0.0 && b != 0.0) return std::nullopt;
  if (task == EdgeTask::ThreeClass) {
    if (f != 0.0) return 0;
    if (b != 0.0) return 1;
    return 2;
  }
  if (f != 0.0) return f > 0 ? 0 : 1;
  if (b != 0.0) return b > 0 ? 2 : 3;
  if (task == EdgeTask::FiveClass) return 4;
  return std::nullopt;
}

namespace {

struct DisjointSets {
  std::vector<Index> parent;
  explicit DisjointSets(Index n) : parent(n) { std::iota(parent.begin(), parent.end(), Index{0}); }
  Index find(Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

void push(LabeledPairs& out, NodePair p, int label) {
  out.pairs.push_back(p);
  out.labels.push_back(label);
}

}  // namespace

EdgeSplit split_edges(const Digraph& g, EdgeTask task, const SplitFractions& fractions,
                      std::uint64_t seed) {
  fractions.validate();
  const auto& a = g.adjacency();
  const Index n = g.size();

  // Single edges are the samples; digons stay in the training graph.
  std::vector<NodePair> singles;
  std::vector<NodePair> digons;
  bool has_negative = false;
  for (Index u = 0; u < n; ++u) {
    for (Index v = u + 1; v < n; ++v) {
      const bool f = a(u, v) != 0.0, b = a(v, u) != 0.0;
      if (f && b) {
        digons.emplace_back(u, v);
      } else if (f || b) {
        singles.emplace_back(f ? u : v, f ? v : u);  // stored as (src, dst)
        if (a(singles.back().first, singles.back().second) < 0) has_negative = true;
      }
    }
  }
  if (task != EdgeTask::ThreeClass && !has_negative)
    throw std::invalid_argument(to_string(task) + " needs negative edge weights; graph has none");

  const Rng root(seed);
  Rng order_rng = root.substream("split_edges.order");
  order_rng.shuffle(singles);

  // Seeded spanning forest of the undirected support; digons first since they
  // are never removed anyway.
  DisjointSets forest(n);
  for (const auto& [u, v] : digons) forest.unite(u, v);
  std::vector<char> locked(singles.size(), 0);
  for (std::size_t e = 0; e < singles.size(); ++e)
    if (forest.unite(singles[e].first, singles[e].second)) locked[e] = 1;

  const Index m = static_cast<Index>(singles.size());
  const Index n_test = portion(fractions.test, m);
  const Index n_val = portion(fractions.val, m);
  const Index removable = m - std::count(locked.begin(), locked.end(), char{1});
  if (m == 0 || n_test + n_val > removable)
    throw std::invalid_argument("split_edges: graph too small to split " + std::to_string(m) +
                                " edges into val/test while preserving connectivity");

  EdgeSplit split;
  Eigen::MatrixXd training = a;
  Index taken_test = 0, taken_val = 0;
  for (std::size_t e = 0; e < singles.size(); ++e) {
    const auto [src, dst] = singles[e];
    Rng coin = root.substream("split_edges.orient", static_cast<std::uint64_t>(src * n + dst));
    const NodePair shown = coin.bernoulli(0.5) ? NodePair{src, dst} : NodePair{dst, src};
    const int label = *edge_class(a, shown.first, shown.second, task);
    LabeledPairs* bucket = &split.train;
    if (!locked[e]) {
      if (taken_test < n_test) {
        bucket = &split.test;
        ++taken_test;
      } else if (taken_val < n_val) {
        bucket = &split.val;
        ++taken_val;
      }
    }
    if (bucket != &split.train) {
      training(src, dst) = 0.0;
      split.removed.emplace_back(src, dst);
    }
    push(*bucket, shown, label);
  }

  if (task != EdgeTask::FourClass) {
    const int edge_classes = num_classes(task) - 1;
    const Index total = std::llround(static_cast<double>(m) / edge_classes);
    const Index none_test = std::llround(static_cast<double>(total) * n_test / m);
    const Index none_val = std::llround(static_cast<double>(total) * n_val / m);
    const Index none_train = total - none_test - none_val;
    const Index free_pairs = n * (n - 1) / 2 - static_cast<Index>(singles.size() + digons.size());
    if (total > free_pairs)
      throw std::invalid_argument("split_edges: not enough unconnected pairs for the non-edge class");
    const int none_label = num_classes(task) - 1;
    Rng pick = root.substream("split_edges.nonedge");
    std::set<NodePair> chosen;
    auto draw = [&](LabeledPairs& out, Index count) {
      while (count > 0) {
        const Index u = static_cast<Index>(pick.below(n));
        const Index v = static_cast<Index>(pick.below(n));
        if (u == v || a(u, v) != 0.0 || a(v, u) != 0.0) continue;
        if (!chosen.insert({std::min(u, v), std::max(u, v)}).second) continue;
        push(out, {u, v}, none_label);
        --count;
      }
    };
    draw(split.train, none_train);
    draw(split.val, none_val);
    draw(split.test, none_test);
  }

  split.training_graph = Digraph(std::move(training), g.labels());
  return split;
}

Eigen::MatrixXd canonical_orientation(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd out = a;
  for (Index u = 0; u < a.rows(); ++u) {
    for (Index v = 0; v < a.cols(); ++v) {
      if (u != v && a(u, v) < 0.0 && a(v, u) == 0.0) {
        out(v, u) = -a(u, v);
        out(u, v) = 0.0;
      }
    }
  }
  return out;
}

}  // namespace qlap
