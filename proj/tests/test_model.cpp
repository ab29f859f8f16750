#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "msgcn/error.hpp"
#include "msgcn/model.hpp"
#include "msgcn/synthgen.hpp"
#include "oracles.hpp"

using namespace msgcn;

TEST_CASE("gate examples") {
  const Eigen::Vector2d delta(0.3, -0.7);
  CHECK(gate(Eigen::MatrixXd::Zero(2, 3), Eigen::VectorXd::Zero(3), delta).isZero());
  CHECK(gate(Eigen::MatrixXd::Zero(2, 3), Eigen::VectorXd::Ones(3), delta).isOnes());
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(2, 2);
  U(0, 0) = 1.0;
  U(0, 1) = -1.0;
  const auto g = gate(U, Eigen::VectorXd::Zero(2), Eigen::Vector2d(-0.5, 0.0));
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.5);
}

TEST_CASE("diagonal two-node graph passes the target through") {
  ProjectedGraph g;
  g.node_features = {0.0, 0.0};
  g.node_positions = {{0.3, 0.3}, {0.3, 0.3}};
  g.edges = {{0, 1}};
  g.original_index = {-1, 0};
  ConvParams layer{Eigen::MatrixXd::Random(2, 2), Eigen::VectorXd::Ones(2), Eigen::MatrixXd::Identity(2, 2),
                   Eigen::VectorXd::Zero(2)};
  Eigen::MatrixXd h(2, 2);
  h << 0.5, -0.25, 2.0, -3.0;
  const auto out = spatial_conv(layer, g, h);
  CHECK(out(0, 0) == 2.0);
  CHECK(out(0, 1) == 0.0);
  CHECK(out(1, 0) == 0.5);
}

TEST_CASE("star graph with open gates sums the leaves") {
  ProjectedGraph g;
  g.node_features.assign(5, 0.0);
  g.node_positions = {{0, 0}, {1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  g.edges = {{0, 1}, {0, 2}, {0, 3}, {0, 4}};
  g.original_index = {-1, 0, 1, 2, 3};
  ConvParams layer{Eigen::MatrixXd::Zero(2, 1), Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Identity(1, 1),
                   Eigen::VectorXd::Zero(1)};
  Eigen::MatrixXd h(5, 1);
  h << 9.0, 1.0, 2.0, 3.0, 4.0;
  CHECK(spatial_conv(layer, g, h)(0, 0) == 10.0);
}

TEST_CASE("spatial_conv matches the literal evaluator") {
  Rng rng(123);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = oracle::random_graph(rng, 6);
    const int d_in = 1 + static_cast<int>(uniform_index(rng, 5));
    const int d_out = 1 + static_cast<int>(uniform_index(rng, 5));
    ConvParams layer{Eigen::MatrixXd::Random(2, d_in), Eigen::VectorXd::Random(d_in),
                     Eigen::MatrixXd::Random(d_out, d_in), Eigen::VectorXd::Random(d_out)};
    const Eigen::MatrixXd h = Eigen::MatrixXd::Random(static_cast<Eigen::Index>(g.num_nodes()), d_in);
    const auto want = oracle::conv_literal(layer, g, oracle::to_rows(h));
    const auto got = spatial_conv(layer, g, h);
    for (std::size_t i = 0; i < want.size(); ++i)
      for (int o = 0; o < d_out; ++o) worst = std::max(worst, std::abs(got(i, o) - want[i][o]));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("forward matches the literal model and is nonnegative") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = oracle::random_graph(rng, 6);
    const auto p = oracle::random_params(rng, 8);
    const double got = predict(p, g);
    CHECK(got >= 0.0);
    CHECK(std::abs(got - oracle::predict_literal(p, g)) < 1e-12);
  }
}

TEST_CASE("constant readout heads") {
  Rng rng(5);
  auto p = init_params(1);
  p.readout_weight.setZero();
  p.readout_bias = -1.0;
  for (int k = 0; k < 5; ++k) CHECK(predict(p, oracle::random_graph(rng)) == 0.0);
  p.readout_bias = 0.3;
  for (int k = 0; k < 5; ++k) CHECK(predict(p, oracle::random_graph(rng)) == 0.3);
}

TEST_CASE("train mode is deterministic given the rng state") {
  Rng gr(8);
  const auto g = oracle::random_graph(gr, 6);
  const auto p = init_params(3);
  Rng a(99), b(99);
  const auto ra = forward(p, g, Mode::train, a);
  const auto rb = forward(p, g, Mode::train, b);
  CHECK(ra.prediction == rb.prediction);
  CHECK(ra.trace.dropout_mask == rb.trace.dropout_mask);
  CHECK(ra.trace.conv2.output == rb.trace.conv2.output);
  // eval mode ignores the rng entirely
  Rng c(1), d(2);
  CHECK(forward(p, g, Mode::eval, c).prediction == forward(p, g, Mode::eval, d).prediction);
  CHECK(ra.trace.dropout_mask.size() > 0);
}

TEST_CASE("predict_network") {
  GeneratorConfig cfg;
  cfg.num_nodes = 3;
  cfg.seed = 4;
  auto net = generate_network(cfg);
  auto p = init_params(2);
  p.readout_bias = 0.2;
  const auto preds = predict_network(p, net);
  CHECK(preds.size() == 9);
  for (const auto& x : preds) CHECK(x.predicted >= 0.0);

  auto shuffled = net;
  std::reverse(shuffled.intra_edges.begin(), shuffled.intra_edges.end());
  const auto again = predict_network(p, shuffled);
  for (std::size_t k = 0; k < preds.size(); ++k) CHECK(again[k].predicted == preds[k].predicted);

  p.readout_weight.setZero();
  p.readout_bias = 0.0;
  for (const auto& x : predict_network(p, net)) CHECK(x.predicted == 0.0);
}

TEST_CASE("init_params shapes, bounds and determinism") {
  const auto a = init_params(10);
  CHECK(a == init_params(10));
  CHECK_FALSE(a == init_params(11));
  CHECK(a.conv2.gate_weight.rows() == 2);
  CHECK(a.conv2.gate_weight.cols() == 32);
  CHECK(a.conv2.mix_weight.rows() == 32);
  CHECK(a.conv2.mix_weight.cols() == 32);
  CHECK(a.conv1.gate_weight.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 3.0));
  CHECK(a.conv1.mix_weight.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 33.0));
  CHECK(a.conv2.gate_weight.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 34.0));
  CHECK(a.conv2.mix_weight.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 64.0));
  CHECK(a.readout_weight.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 33.0));
  CHECK(a.conv1.mix_bias.isZero());
  CHECK(a.readout_bias == 0.0);
  CHECK(parameter_count(32) == static_cast<std::size_t>(flatten(a).size()));
  CHECK(unflatten(flatten(a), 32) == a);
  CHECK_THROWS_AS(unflatten(Eigen::VectorXd::Zero(3), 32), Error);
}

TEST_CASE("relabelling non-target nodes leaves the prediction unchanged") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = oracle::random_graph(rng, 6);
    if (g.num_nodes() < 4) continue;
    const auto p = oracle::random_params(rng, 6);
    const double base = predict(p, g);
    // swap local ids 2 and n-1 (neither projection nor target)
    const int a = 2, b = static_cast<int>(g.num_nodes()) - 1;
    auto h = g;
    std::swap(h.node_features[a], h.node_features[b]);
    std::swap(h.node_positions[a], h.node_positions[b]);
    for (auto& [u, v] : h.edges) {
      auto relabel = [&](int x) { return x == a ? b : x == b ? a : x; };
      u = relabel(u);
      v = relabel(v);
      if (u > v) std::swap(u, v);
    }
    std::sort(h.edges.begin(), h.edges.end());
    CHECK(std::abs(predict(p, h) - base) < 1e-12);
  }
}

TEST_CASE("translation changes nothing") {
  Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    auto g = oracle::random_graph(rng, 6);
    // dyadic grid positions so the shifted differences are exact
    for (auto& pos : g.node_positions) {
      pos.x = std::floor(pos.x * 64.0) / 64.0;
      pos.y = std::floor(pos.y * 64.0) / 64.0;
    }
    const auto p = oracle::random_params(rng, 6);
    auto shifted = g;
    for (auto& pos : shifted.node_positions) {
      pos.x += 3.25;
      pos.y -= 17.5;
    }
    CHECK(predict(p, shifted) == predict(p, g));

    auto rough = g;
    for (auto& pos : rough.node_positions) {
      pos.x += 0.1234567;
      pos.y += 0.7654321;
    }
    CHECK(std::abs(predict(p, rough) - predict(p, g)) < 1e-12);
  }
}
