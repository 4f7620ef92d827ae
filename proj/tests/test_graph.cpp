#include "doctest.h"

#include "qlap/digraph.hpp"
#include "qlap/matrix_io.hpp"
#include "support.hpp"

#include <fstream>
#include <set>
#include <sstream>

using namespace qlap;

namespace {

Digraph parse(const std::string& text) {
  std::istringstream is(text);
  return parse_edge_list(is);
}

}  // namespace

TEST_CASE("edge list parsing") {
  SUBCASE("example file") {
    const Digraph g = load_graph(qtest::data_path("example4.tsv"));
    CHECK(g.adjacency() == qtest::example4_adjacency());
  }
  SUBCASE("header only") {
    const Digraph g = parse("# n=3\n");
    CHECK(g.size() == 3);
    CHECK(g.adjacency().isZero());
  }
  SUBCASE("duplicates sum") {
    const Digraph g = parse("0 1 2\n0 1 3\n");
    CHECK(g.weight(0, 1) == 5);
    CHECK(g.size() == 2);
  }
  SUBCASE("comments, blanks, missing weight") {
    const Digraph g = parse("# a comment\n\n0\t2\n");
    CHECK(g.size() == 3);
    CHECK(g.weight(0, 2) == 1);
  }
  SUBCASE("errors name the line") {
    try {
      parse("0 1 1\n1 x 2\n");
      FAIL("expected an error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("1 1 2\n"), DataError);
    CHECK_THROWS_AS(parse("0 1 inf\n"), DataError);
    CHECK_THROWS_AS(parse("0 1 nan\n"), DataError);
    CHECK_THROWS_AS(parse("0 1 2 3\n"), DataError);
    CHECK_THROWS_AS(parse("# n=2\n0 5 1\n"), DataError);
    CHECK_THROWS_AS(parse(""), DataError);
  }
  SUBCASE("round trip") {
    const Digraph g(qtest::example4_adjacency());
    CHECK(parse(format_edge_list(g)).adjacency() == g.adjacency());
  }
}

TEST_CASE("labels") {
  std::istringstream is("0\t1\n2\t0\n1\t1\n");
  CHECK(parse_labels(is, 3) == std::vector<int>{1, 1, 0});
  std::istringstream missing("0 1\n");
  CHECK_THROWS_AS(parse_labels(missing, 2), DataError);
  std::istringstream range("5 1\n");
  CHECK_THROWS_AS(parse_labels(range, 2), DataError);
}

TEST_CASE("digraph invariants") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  a(0, 0) = 1;
  CHECK_THROWS_AS(Digraph{a}, std::invalid_argument);
  CHECK_THROWS_AS(Digraph(Eigen::MatrixXd(0, 0)), std::invalid_argument);
  CHECK_THROWS_AS(Digraph(Eigen::MatrixXd::Zero(2, 2), {0}), std::invalid_argument);
}

TEST_CASE("degree features") {
  const Digraph g(qtest::example4_adjacency());
  Eigen::MatrixXd want(4, 2);
  want << 4, 1, 2, 4, 5, 4, 4, 6;
  CHECK(degree_features(g, false) == want);
  CHECK(degree_features(Digraph(Eigen::MatrixXd::Zero(3, 3)), false).isZero());

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2, 2);
  s(0, 1) = -3;
  Eigen::MatrixXd signed_want(2, 2);
  signed_want << 0, 3, 3, 0;
  CHECK(degree_features(Digraph(s), true) == signed_want);

  const Digraph r = generate_dsbm(DsbmConfig::di150(0.2, 4));
  const Eigen::MatrixXd x = degree_features(r, false);
  const Eigen::MatrixXd xt = degree_features(Digraph(r.adjacency().transpose()), false);
  CHECK(x.col(0) == xt.col(1));
  CHECK(x.col(1) == xt.col(0));
}

TEST_CASE("dsbm generator") {
  SUBCASE("shape and determinism") {
    const DsbmConfig cfg = DsbmConfig::di150(0.2, 42);
    const Digraph a = generate_dsbm(cfg), b = generate_dsbm(cfg);
    CHECK(a.size() == 150);
    CHECK(a.num_classes() == 5);
    CHECK(a.adjacency() == b.adjacency());
    CHECK(format_edge_list(a) == format_edge_list(b));
    CHECK(a.adjacency() != generate_dsbm(DsbmConfig::di150(0.2, 43)).adjacency());
  }
  SUBCASE("digon fraction near delta") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const GraphStats s = graph_stats(generate_dsbm(DsbmConfig::di150(0.2, seed)));
      CHECK(std::abs(s.digon_fraction() - 0.2) <= 0.05);
    }
  }
  SUBCASE("delta 0 has no digons") {
    const GraphStats s = graph_stats(generate_dsbm(DsbmConfig::di150(0.0, 1)));
    CHECK(s.digons == 0);
    CHECK(s.connected_pairs > 0);
  }
  SUBCASE("edge frequencies match alpha over 50 seeds") {
    double intra = 0, inter = 0, intra_pairs = 0, inter_pairs = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const Digraph g = generate_dsbm(DsbmConfig::di150(0.2, seed));
      const auto& a = g.adjacency();
      for (Index u = 0; u < g.size(); ++u) {
        for (Index v = u + 1; v < g.size(); ++v) {
          const bool e = a(u, v) != 0 || a(v, u) != 0;
          if (g.labels()[u] == g.labels()[v]) {
            intra += e;
            intra_pairs += 1;
          } else {
            inter += e;
            inter_pairs += 1;
          }
        }
      }
    }
    CHECK(std::abs(intra / intra_pairs - 0.1) <= 0.03);
    CHECK(std::abs(inter / inter_pairs - 0.6) <= 0.03);
  }
  SUBCASE("weights, signs and digon modes") {
    DsbmConfig cfg = DsbmConfig::di150(0.5, 3);
    cfg.signed_weights = true;
    cfg.sign_mode = SignMode::PerPair;
    cfg.digon_weights = DigonWeights::Distinct;
    const Digraph g = generate_dsbm(cfg);
    const auto& a = g.adjacency();
    bool negative = false;
    for (Index u = 0; u < g.size(); ++u) {
      for (Index v = 0; v < g.size(); ++v) {
        if (a(u, v) == 0) continue;
        CHECK(std::abs(a(u, v)) >= 2);
        CHECK(std::abs(a(u, v)) <= 4);
        negative = negative || a(u, v) < 0;
        if (a(v, u) != 0) {
          CHECK(a(u, v) != a(v, u));
          CHECK((a(u, v) > 0) == (a(v, u) > 0));
        }
      }
    }
    CHECK(negative);
    cfg.digon_weights = DigonWeights::Equal;
    CHECK(graph_stats(generate_dsbm(cfg)).asymmetric_digons == 0);
    cfg.undirected = true;
    const Digraph u = generate_dsbm(cfg);
    CHECK(u.adjacency() == Eigen::MatrixXd(u.adjacency().transpose()));
  }
  SUBCASE("invalid configs") {
    DsbmConfig cfg;
    cfg.intra_prob = 1.5;
    CHECK_THROWS_AS(generate_dsbm(cfg), std::invalid_argument);
    cfg = DsbmConfig();
    cfg.weight_low = 0;
    CHECK_THROWS_AS(generate_dsbm(cfg), std::invalid_argument);
    cfg = DsbmConfig();
    cfg.weight_high = 1;
    CHECK_THROWS_AS(generate_dsbm(cfg), std::invalid_argument);
    cfg = DsbmConfig();
    cfg.nodes_per_cluster = 1 << 20;
    CHECK_THROWS_AS(generate_dsbm(cfg), std::invalid_argument);
  }
}

TEST_CASE("node splits") {
  const Digraph g = generate_dsbm(DsbmConfig::di150(0.2, 1));
  const NodeSplit s = split_nodes(g, {0.6, 0.2, 0.2}, 9);
  CHECK(s.train.size() == 90);
  CHECK(s.val.size() == 30);
  CHECK(s.test.size() == 30);
  std::vector<int> per_class(5, 0);
  for (Index u : s.test) ++per_class[g.labels()[u]];
  CHECK(per_class == std::vector<int>(5, 6));
  std::set<Index> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 150);

  const NodeSplit again = split_nodes(g, {0.6, 0.2, 0.2}, 9);
  CHECK(again.test == s.test);
  CHECK(split_nodes(g, {0.6, 0.2, 0.2}, 10).test != s.test);

  // relabel classes in a different order: per-class counts unchanged
  std::vector<int> shuffled = g.labels();
  for (int& c : shuffled) c = 4 - c;
  const NodeSplit r = split_nodes(g.with_labels(shuffled), {0.6, 0.2, 0.2}, 9);
  std::vector<int> per_class_r(5, 0);
  for (Index u : r.val) ++per_class_r[shuffled[u]];
  CHECK(per_class_r == std::vector<int>(5, 6));

  const Digraph tiny(Eigen::MatrixXd::Zero(4, 4), {0, 0, 1, 1});
  CHECK_THROWS_AS(split_nodes(tiny, {0.6, 0.2, 0.2}, 0), std::invalid_argument);
  CHECK_THROWS_AS(split_nodes(g, {0.5, 0.2, 0.2}, 0), std::invalid_argument);
}

TEST_CASE("edge classes on the four-node example") {
  const Eigen::MatrixXd a = qtest::example4_adjacency();
  // 1-based (3,1) is an edge, (1,3) its reverse, (1,4) neither
  CHECK(edge_class(a, 2, 0, EdgeTask::ThreeClass) == 0);
  CHECK(edge_class(a, 0, 2, EdgeTask::ThreeClass) == 1);
  CHECK(edge_class(a, 0, 3, EdgeTask::ThreeClass) == 2);
  CHECK_FALSE(edge_class(a, 1, 3, EdgeTask::ThreeClass).has_value());

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(3, 3);
  s(0, 1) = 2;
  s(2, 1) = -1;
  CHECK(edge_class(s, 0, 1, EdgeTask::FourClass) == 0);
  CHECK(edge_class(s, 2, 1, EdgeTask::FourClass) == 1);
  CHECK(edge_class(s, 1, 0, EdgeTask::FourClass) == 2);
  CHECK(edge_class(s, 1, 2, EdgeTask::FourClass) == 3);
  CHECK_FALSE(edge_class(s, 0, 2, EdgeTask::FourClass).has_value());
  CHECK(edge_class(s, 0, 2, EdgeTask::FiveClass) == 4);
}

namespace {

// Weak components via repeated relaxation; independent of the split code.
int weak_components(const Eigen::MatrixXd& a) {
  const Index n = a.rows();
  std::vector<Index> comp(n);
  for (Index u = 0; u < n; ++u) comp[u] = u;
  bool changed = true;
  while (changed) {
    changed = false;
    for (Index u = 0; u < n; ++u)
      for (Index v = 0; v < n; ++v)
        if ((a(u, v) != 0 || a(v, u) != 0) && comp[v] < comp[u]) {
          comp[u] = comp[v];
          changed = true;
        }
  }
  return static_cast<int>(std::set<Index>(comp.begin(), comp.end()).size());
}

}  // namespace

TEST_CASE("edge splits") {
  DsbmConfig cfg = DsbmConfig::di150(0.2, 5);
  cfg.signed_weights = true;
  const Digraph g = generate_dsbm(cfg);
  const auto& a = g.adjacency();

  for (EdgeTask task : {EdgeTask::ThreeClass, EdgeTask::FourClass, EdgeTask::FiveClass}) {
    CAPTURE(to_string(task));
    const EdgeSplit s = split_edges(g, task, {0.8, 0.05, 0.15}, 3);

    // training graph + removed edges reconstruct the original
    Eigen::MatrixXd back = s.training_graph.adjacency();
    for (const auto& [u, v] : s.removed) {
      CHECK(back(u, v) == 0);
      back(u, v) = a(u, v);
    }
    CHECK(back == a);
    CHECK(weak_components(s.training_graph.adjacency()) == weak_components(a));

    // labels agree with the original graph
    for (const LabeledPairs* lp : {&s.train, &s.val, &s.test}) {
      for (std::size_t k = 0; k < lp->size(); ++k) {
        const auto [u, v] = lp->pairs[k];
        CHECK(edge_class(a, u, v, task) == lp->labels[k]);
      }
    }

    std::vector<int> counts(num_classes(task), 0);
    for (const LabeledPairs* lp : {&s.train, &s.val, &s.test})
      for (int y : lp->labels) ++counts[y];
    for (int c : counts) CHECK(c > 0);
    if (task != EdgeTask::FourClass) {
      const int none = counts.back();
      double mean = 0;
      for (std::size_t c = 0; c + 1 < counts.size(); ++c) mean += counts[c];
      mean /= static_cast<double>(counts.size() - 1);
      CHECK(std::abs(none - mean) <= 1.0);
    }

    const EdgeSplit again = split_edges(g, task, {0.8, 0.05, 0.15}, 3);
    CHECK(again.test.pairs == s.test.pairs);
    CHECK(again.train.labels == s.train.labels);
  }

  const Digraph unsigned_g = generate_dsbm(DsbmConfig::di150(0.2, 5));
  CHECK_THROWS_AS(split_edges(unsigned_g, EdgeTask::FourClass, {0.8, 0.0, 0.2}, 0), std::invalid_argument);

  Eigen::MatrixXd two = Eigen::MatrixXd::Zero(2, 2);
  two(0, 1) = 1;
  CHECK_THROWS_AS(split_edges(Digraph(two), EdgeTask::ThreeClass, {0.8, 0.05, 0.15}, 0), std::invalid_argument);
}

TEST_CASE("canonical orientation") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 1) = -3;
  a(1, 2) = 2;
  a(2, 0) = -1;
  a(0, 2) = 4;  // digon with (2,0): left alone
  const Eigen::MatrixXd c = canonical_orientation(a);
  CHECK(c(0, 1) == 0);
  CHECK(c(1, 0) == 3);
  CHECK(c(1, 2) == 2);
  CHECK(c(2, 0) == -1);
  CHECK(c(0, 2) == 4);
}
