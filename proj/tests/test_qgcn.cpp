#include "doctest.h"

#include "qlap/laplacian.hpp"
#include "qlap/matrix_io.hpp"
#include "qlap/qgcn.hpp"
#include "support.hpp"

#include <sstream>

using namespace qlap;
using Eigen::MatrixXd;

namespace {

Quatd at(const QMatrix& q, Index r, Index c) { return q(r, c); }

QMatrix scalar(const Quatd& q) {
  QMatrix m(1, 1);
  m.set(0, 0, q);
  return m;
}

QMatrix random_q(Rng& rng, Index r, Index c) {
  QMatrix q(r, c);
  for (int k = 0; k < 4; ++k)
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) q.component(k)(i, j) = rng.uniform(-1, 1);
  return q;
}

DsbmConfig toy_config(std::uint64_t seed) {
  DsbmConfig c;
  c.nodes_per_cluster = 20;
  c.clusters = 2;
  c.intra_prob = 0.2;
  c.inter_prob = 0.5;
  c.digon_fraction = 0.0;
  c.seed = seed;
  return c;
}

ModelConfig small_model(int epochs) {
  ModelConfig m;
  m.f1 = 4;
  m.f2 = 4;
  m.max_epochs = epochs;
  m.patience = 1000;
  m.seed = 7;
  return m;
}

}  // namespace

TEST_CASE("task and head names") {
  for (Task t : {Task::NC, Task::ThreeClass, Task::FourClass, Task::FiveClass}) CHECK(parse_task(to_string(t)) == t);
  CHECK(to_string(Task::ThreeClass) == "3CEP");
  CHECK(parse_head("conv1d-pair") == HeadType::Conv1dPair);
  CHECK_THROWS_AS(parse_task("6CEP"), std::invalid_argument);
  CHECK(ModelConfig::defaults_for(Task::FiveClass).learning_rate == 1e-2);
  CHECK(ModelConfig::defaults_for(Task::NC).learning_rate == 1e-3);
}

TEST_CASE("model config validation") {
  ModelConfig m;
  m.f1 = 0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m = ModelConfig{};
  m.dropout = 1.0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("split activation") {
  const QMatrix z = split_activation(scalar(Quatd(1, -2, 3, -4)));
  CHECK(at(z, 0, 0) == Quatd(1, 0, 3, 0));
  Rng rng(1);
  QMatrix pos = random_q(rng, 3, 2);
  for (int k = 0; k < 4; ++k) pos.component(k) = pos.component(k).cwiseAbs();
  CHECK(split_activation(pos) == pos);
}

TEST_CASE("quaternion convolution") {
  SUBCASE("product order is X then Theta") {
    const QMatrix out = qconv_forward(QMatrix::identity(1), scalar(Quatd(1, 1)), scalar(Quatd::unit_j()));
    CHECK(at(out, 0, 0) == Quatd(0, 0, 1, 1));
  }
  SUBCASE("identity filter passes P X through") {
    Rng rng(2);
    const QMatrix p = propagation_matrix(Digraph(qtest::example4_adjacency()));
    QMatrix x = random_q(rng, 4, 3);
    for (int k = 0; k < 4; ++k) x.component(k) = x.component(k).cwiseAbs();
    const QMatrix px = matmul(p, x);
    CHECK(max_abs_diff(qconv_forward(p, x, QMatrix::identity(3)), split_activation(px)) <= 1e-15);
  }
  SUBCASE("real input on an undirected graph stays real") {
    DsbmConfig c = toy_config(3);
    c.undirected = true;
    const Digraph g = generate_dsbm(c);
    const QMatrix p = propagation_matrix(g);
    const QMatrix x = QMatrix::from_real(degree_features(g, false));
    const QMatrix theta = QMatrix::from_real(MatrixXd::Random(2, 5));
    const QMatrix out = qconv_forward(p, x, theta);
    for (int k = 1; k < 4; ++k) CHECK(out.component(k).isZero(0.0));
    // plain real GCN layer on the symmetrized, renormalized adjacency
    const MatrixXd a = g.adjacency() + MatrixXd::Identity(g.size(), g.size());
    const Eigen::VectorXd d = a.rowwise().sum().cwiseSqrt().cwiseInverse();
    const MatrixXd ahat = d.asDiagonal() * a * d.asDiagonal();
    const MatrixXd want = (ahat * x.real() * theta.real()).cwiseMax(0.0);
    CHECK((out.real() - want).cwiseAbs().maxCoeff() <= 1e-10 * (1 + want.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("chebyshev filter response") {
  Rng rng(4);
  const QMatrix x = random_q(rng, 4, 1);
  const LaplacianBundle b = build_quaternionic(Digraph(qtest::example4_adjacency()));
  REQUIRE(b.Lq_norm);
  CHECK(chebyshev_filter_response(0.0, *b.Lq_norm, x).component(0).isZero(0.0));
  CHECK(max_abs_diff(chebyshev_filter_response(1.0, QMatrix::identity(4), x), x) == 0.0);
  // theta0 (I + D^-1/2 H D^-1/2) x, assembled from the bundle's pieces
  const double theta0 = 0.7;
  QMatrix dinv(4, 4);
  for (Index u = 0; u < 4; ++u) dinv.real()(u, u) = 1.0 / std::sqrt(b.Dbar(u));
  const QMatrix want = theta0 * matmul(QMatrix::identity(4) + matmul(matmul(dinv, b.Hq), dinv), x);
  CHECK(max_abs_diff(chebyshev_filter_response(theta0, *b.Lq_norm, x), want) <= 1e-12);
  CHECK_THROWS_AS(chebyshev_filter_response(1.0, QMatrix::identity(3), x), std::invalid_argument);
}

TEST_CASE("unwind orders R, I, J, K") {
  QMatrix q(1, 2);
  q.set(0, 0, Quatd(1, 2, 3, 4));
  q.set(0, 1, Quatd(5, 6, 7, 8));
  MatrixXd want(1, 8);
  want << 1, 5, 2, 6, 3, 7, 4, 8;
  CHECK(unwind(q) == want);
}

TEST_CASE("heads") {
  const MatrixXd u = MatrixXd::Random(4, 8);
  CHECK(node_head(u, MatrixXd::Zero(8, 3)).isZero(0.0));
  CHECK_THROWS_AS(node_head(u, MatrixXd::Zero(7, 3)), std::invalid_argument);

  MatrixXd w = MatrixXd::Random(16, 3);
  const std::vector<NodePair> fwd{{0, 1}}, rev{{1, 0}};
  CHECK((edge_head(u, fwd, w) - edge_head(u, rev, w)).cwiseAbs().maxCoeff() > 1e-6);
  // antisymmetric halves cancel on a shared embedding
  w.bottomRows(8) = -w.topRows(8);
  CHECK(edge_head(u, {{2, 2}}, w).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(edge_head(u, {{0, 4}}, MatrixXd::Zero(16, 3)), std::out_of_range);
}

TEST_CASE("argmax and accuracy") {
  MatrixXd s(3, 3);
  s << 1, 1, 0,
       0, 2, 2,
       5, 5, 5;
  CHECK(argmax_rows(s) == std::vector<int>{0, 1, 0});
  CHECK(accuracy({1, 2, 3}, {1, 2, 3}) == 1.0);
  CHECK(accuracy({1, 0}, {1, 2}) == 0.5);
  CHECK_THROWS_AS(accuracy({}, {}), std::invalid_argument);

  // uniform random guesses over five balanced classes
  Rng rng(2024);
  std::vector<int> guess, truth;
  for (int k = 0; k < 1000; ++k) {
    truth.push_back(k % 5);
    guess.push_back(static_cast<int>(rng.integer(0, 4)));
  }
  CHECK(accuracy(guess, truth) == doctest::Approx(0.2).epsilon(0.25));
}

TEST_CASE("full forward matches a classical GCN on undirected graphs with real weights") {
  DsbmConfig c = toy_config(8);
  c.undirected = true;
  const Digraph g = generate_dsbm(c);
  const NodeSplit split = split_nodes(g, {}, 1);
  const Problem prob = make_node_problem(g, split, LaplacianKind::Quaternionic);
  ModelConfig m = small_model(0);
  ModelParams p = init_params(m, 2, 2, Task::NC);
  for (int k = 1; k < 4; ++k) {
    p.theta1.component(k).setZero();
    p.theta2.component(k).setZero();
  }
  const MatrixXd a = g.adjacency() + MatrixXd::Identity(g.size(), g.size());
  const Eigen::VectorXd d = a.rowwise().sum().cwiseSqrt().cwiseInverse();
  const MatrixXd ahat = d.asDiagonal() * a * d.asDiagonal();
  const MatrixXd z1 = (ahat * degree_features(g, false) * p.theta1.real()).cwiseMax(0.0);
  const MatrixXd z2 = (ahat * z1 * p.theta2.real()).cwiseMax(0.0);
  const MatrixXd want = z2 * p.W.topRows(m.f2);
  const MatrixXd got = logits(p, prob, prob.test);
  MatrixXd want_rows(static_cast<Index>(prob.test.nodes.size()), 2);
  for (std::size_t k = 0; k < prob.test.nodes.size(); ++k) want_rows.row(k) = want.row(prob.test.nodes[k]);
  CHECK((got - want_rows).cwiseAbs().maxCoeff() <= 1e-10 * (1 + want_rows.cwiseAbs().maxCoeff()));

  const Problem classical = make_node_problem(g, split, LaplacianKind::Classical);
  CHECK((logits(p, classical, classical.test) - got).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("parameter init and shape checks") {
  const ModelConfig m = small_model(0);
  const ModelParams p = init_params(m, 2, 5, Task::NC);
  CHECK(p.theta1.rows() == 2);
  CHECK(p.theta1.cols() == 4);
  CHECK(p.W.rows() == 16);
  CHECK(init_params(m, 2, 4, Task::FourClass).W.rows() == 32);
  const double bound = 1.0 / std::sqrt(8.0);
  for (int k = 0; k < 4; ++k) CHECK(p.theta1.component(k).cwiseAbs().maxCoeff() <= bound);
  CHECK(init_params(m, 2, 5, Task::NC).W == p.W);
  try {
    ModelConfig wide = m;
    wide.f2 = 6;
    check_param_shapes(p, wide, 2, 5, Task::NC);
    FAIL("expected a shape error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("theta2") != std::string::npos);
  }
}

TEST_CASE("training") {
  const Digraph g = generate_dsbm(toy_config(11));
  const NodeSplit split = split_nodes(g, {}, 2);
  const Problem prob = make_node_problem(g, split, LaplacianKind::Quaternionic);

  SUBCASE("zero epochs returns the initialization") {
    const ModelConfig m = small_model(0);
    const TrainResult r = train(m, prob);
    const ModelParams init = init_params(m, 2, 2, Task::NC);
    CHECK(r.params.theta1 == init.theta1);
    CHECK(r.params.theta2 == init.theta2);
    CHECK(r.params.W == init.W);
    CHECK(r.history.empty());
    CHECK(r.best_epoch == -1);
  }
  SUBCASE("two-cluster toy is fit within 500 epochs") {
    // no validation set, so the last parameters come back
    const Problem fit = make_node_problem(g, split_nodes(g, {0.8, 0.0, 0.2}, 2), LaplacianKind::Quaternionic);
    ModelConfig m = small_model(500);
    m.f1 = m.f2 = 16;
    m.dropout = 0.0;
    m.learning_rate = 1e-2;
    const TrainResult r = train(m, fit);
    CHECK(r.history.size() == 500);
    CHECK(evaluate(r.params, fit, fit.train) == 1.0);
  }
  SUBCASE("same seed, same trajectory") {
    const ModelConfig m = small_model(40);
    const TrainResult a = train(m, prob), b = train(m, prob);
    CHECK(history_csv(a.history) == history_csv(b.history));
    CHECK(a.params.W == b.params.W);
    ModelConfig other = m;
    other.seed = 8;
    CHECK(history_csv(train(other, prob).history) != history_csv(a.history));
  }
  SUBCASE("evaluation ignores dropout") {
    const TrainResult r = train(small_model(5), prob);
    CHECK(logits(r.params, prob, prob.test) == logits(r.params, prob, prob.test));
    CHECK(evaluate(r.params, prob, prob.test) == evaluate(r.params, prob, prob.test));
  }
  SUBCASE("early stopping") {
    ModelConfig m = small_model(400);
    m.patience = 5;
    const TrainResult r = train(m, prob);
    CHECK(r.stopped_early);
    CHECK(static_cast<int>(r.history.size()) < 400);
    CHECK(r.best_epoch >= 1);
  }
  SUBCASE("divergence names the epoch") {
    ModelConfig m = small_model(50);
    m.learning_rate = 1e300;
    CHECK_THROWS_AS(train(m, prob), TrainingDiverged);
  }
}

TEST_CASE("history csv") {
  const std::vector<EpochRecord> h{{1, 0.5, 0.25, 0.75}, {2, 0.125, 1.0, std::numeric_limits<double>::quiet_NaN()}};
  const std::string csv = history_csv(h);
  CHECK(csv.rfind("epoch,train_loss,train_acc,val_acc\n", 0) == 0);
  CHECK(csv.find("1,0.5,0.25,0.75\n") != std::string::npos);
  CHECK(csv.find("2,0.125,1,\n") != std::string::npos);
}

TEST_CASE("checkpoint round trip") {
  Checkpoint c;
  c.config = small_model(3);
  c.task = Task::ThreeClass;
  c.laplacian = LaplacianKind::SignMagnetic;
  c.in_features = 2;
  c.classes = 3;
  c.params = init_params(c.config, 2, 3, Task::ThreeClass);
  const std::string text = format_checkpoint(c);
  std::istringstream is(text);
  const Checkpoint back = parse_checkpoint(is);
  CHECK(back.task == c.task);
  CHECK(back.laplacian == c.laplacian);
  CHECK(back.config.f1 == 4);
  CHECK(back.params.theta1 == c.params.theta1);
  CHECK(back.params.theta2 == c.params.theta2);
  CHECK(back.params.W == c.params.W);
  CHECK(format_checkpoint(back) == text);

  std::string broken = text;
  broken.replace(broken.find("f2 4"), 4, "f2 5");
  std::istringstream bad(broken);
  CHECK_THROWS_AS(parse_checkpoint(bad), DataError);
}
