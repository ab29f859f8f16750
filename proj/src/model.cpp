#include "msgcn/model.hpp"

#include <cmath>

#include "msgcn/error.hpp"

namespace msgcn {

namespace {

template <typename Derived>
bool same(const Eigen::MatrixBase<Derived>& a, const Eigen::MatrixBase<Derived>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

ConvParams conv_zeros(int d_in, int d_out) {
  return {Eigen::MatrixXd::Zero(2, d_in), Eigen::VectorXd::Zero(d_in), Eigen::MatrixXd::Zero(d_out, d_in),
          Eigen::VectorXd::Zero(d_out)};
}

void fill_glorot(Eigen::Ref<Eigen::MatrixXd> m, int fan_in, int fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = uniform(rng, -bound, bound);
}

std::vector<std::pair<int, int>> directed_pairs(const ProjectedGraph& graph) {
  std::vector<std::pair<int, int>> out;
  out.reserve(graph.edges.size() * 2);
  for (const auto& [a, b] : graph.edges) {
    out.emplace_back(a, b);
    out.emplace_back(b, a);
  }
  return out;
}

void conv_forward(const ConvParams& layer, const ProjectedGraph& graph, const Eigen::MatrixXd& input,
                  ConvTrace& t) {
  const auto n = static_cast<Eigen::Index>(graph.num_nodes());
  const int d_in = layer.in_dim();
  if (input.rows() != n || input.cols() != d_in) {
    throw Error("embedding shape does not match graph/layer");
  }
  t.input = input;
  t.directed = directed_pairs(graph);
  t.gate_pre.resize(static_cast<Eigen::Index>(t.directed.size()), d_in);
  t.message = Eigen::MatrixXd::Zero(n, d_in);
  for (std::size_t e = 0; e < t.directed.size(); ++e) {
    const auto [i, j] = t.directed[e];
    const Eigen::Vector2d delta(graph.node_positions[j].x - graph.node_positions[i].x,
                                graph.node_positions[j].y - graph.node_positions[i].y);
    const Eigen::VectorXd pre = layer.gate_weight.transpose() * delta + layer.gate_bias;
    t.gate_pre.row(static_cast<Eigen::Index>(e)) = pre.transpose();
    t.message.row(i) += (pre.cwiseMax(0.0).array() * input.row(j).transpose().array()).matrix().transpose();
  }
  t.pre_activation = (t.message * layer.mix_weight.transpose()).rowwise() + layer.mix_bias.transpose();
  t.output = t.pre_activation.cwiseMax(0.0);
}

}  // namespace

bool operator==(const ConvParams& a, const ConvParams& b) {
  return same(a.gate_weight, b.gate_weight) && same(a.gate_bias, b.gate_bias) &&
         same(a.mix_weight, b.mix_weight) && same(a.mix_bias, b.mix_bias);
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  return a.conv1 == b.conv1 && a.conv2 == b.conv2 && same(a.readout_weight, b.readout_weight) &&
         a.readout_bias == b.readout_bias;
}

ModelParams ModelParams::zeros(int hidden) {
  ModelParams p;
  p.conv1 = conv_zeros(1, hidden);
  p.conv2 = conv_zeros(hidden, hidden);
  p.readout_weight = Eigen::VectorXd::Zero(hidden);
  p.readout_bias = 0.0;
  return p;
}

std::vector<TensorSlot> tensor_layout(int hidden) {
  std::vector<TensorSlot> slots;
  std::size_t offset = 0;
  auto add = [&](std::string name, int rows, int cols) {
    slots.push_back({std::move(name), rows, cols, offset});
    offset += static_cast<std::size_t>(rows) * cols;
  };
  add("conv1.gate_weight", 2, 1);
  add("conv1.gate_bias", 1, 1);
  add("conv1.mix_weight", hidden, 1);
  add("conv1.mix_bias", hidden, 1);
  add("conv2.gate_weight", 2, hidden);
  add("conv2.gate_bias", hidden, 1);
  add("conv2.mix_weight", hidden, hidden);
  add("conv2.mix_bias", hidden, 1);
  add("readout.weight", hidden, 1);
  add("readout.bias", 1, 1);
  return slots;
}

std::size_t parameter_count(int hidden) {
  const auto slots = tensor_layout(hidden);
  return slots.back().offset + static_cast<std::size_t>(slots.back().rows) * slots.back().cols;
}

Eigen::VectorXd flatten(const ModelParams& params) {
  const int h = params.hidden();
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count(h)));
  Eigen::Index at = 0;
  auto put = [&](const auto& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) flat[at++] = m(r, c);
  };
  for (const ConvParams* conv : {&params.conv1, &params.conv2}) {
    put(conv->gate_weight);
    put(conv->gate_bias);
    put(conv->mix_weight);
    put(conv->mix_bias);
  }
  put(params.readout_weight);
  flat[at++] = params.readout_bias;
  return flat;
}

ModelParams unflatten(const Eigen::VectorXd& flat, int hidden) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count(hidden)) {
    throw Error("flat parameter vector has wrong length");
  }
  ModelParams p = ModelParams::zeros(hidden);
  Eigen::Index at = 0;
  auto take = [&](auto& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = flat[at++];
  };
  for (ConvParams* conv : {&p.conv1, &p.conv2}) {
    take(conv->gate_weight);
    take(conv->gate_bias);
    take(conv->mix_weight);
    take(conv->mix_bias);
  }
  take(p.readout_weight);
  p.readout_bias = flat[at++];
  return p;
}

bool all_finite(const ModelParams& params) { return flatten(params).allFinite(); }

ModelParams init_params(std::uint64_t seed, int hidden) {
  if (hidden < 1) throw Error("hidden width must be positive");
  Rng rng(seed);
  ModelParams p = ModelParams::zeros(hidden);
  fill_glorot(p.conv1.gate_weight, 2, 1, rng);
  fill_glorot(p.conv1.mix_weight, 1, hidden, rng);
  fill_glorot(p.conv2.gate_weight, 2, hidden, rng);
  fill_glorot(p.conv2.mix_weight, hidden, hidden, rng);
  fill_glorot(p.readout_weight, hidden, 1, rng);
  // Open gates: with a zero gate bias every zero-offset edge (the diagonal
  // link) sits exactly on the relu kink and never passes a message.
  // 1.0 blew up activations on 10-node graphs.
  p.conv1.gate_bias.setConstant(kInitGateBias);
  p.conv2.gate_bias.setConstant(kInitGateBias);
  return p;
}

Eigen::VectorXd gate(const Eigen::MatrixXd& gate_weight, const Eigen::VectorXd& gate_bias,
                     const Eigen::Vector2d& delta_p) {
  return (gate_weight.transpose() * delta_p + gate_bias).cwiseMax(0.0);
}

Eigen::MatrixXd spatial_conv(const ConvParams& layer, const ProjectedGraph& graph,
                             const Eigen::MatrixXd& embeddings) {
  ConvTrace t;
  conv_forward(layer, graph, embeddings, t);
  return t.output;
}

ForwardResult forward(const ModelParams& params, const ProjectedGraph& graph, Mode mode, Rng& rng,
                      double dropout_rate) {
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw Error("dropout rate must lie in [0, 1)");
  const auto n = static_cast<Eigen::Index>(graph.num_nodes());
  ForwardResult res;
  auto& t = res.trace;

  Eigen::MatrixXd x(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = graph.node_features[i];
  conv_forward(params.conv1, graph, x, t.conv1);

  Eigen::MatrixXd hidden = t.conv1.output;
  if (mode == Mode::train && dropout_rate > 0.0) {
    const double scale = 1.0 / (1.0 - dropout_rate);
    t.dropout_mask.resize(hidden.rows(), hidden.cols());
    for (Eigen::Index c = 0; c < hidden.cols(); ++c)
      for (Eigen::Index r = 0; r < hidden.rows(); ++r)
        t.dropout_mask(r, c) = uniform01(rng) >= dropout_rate ? scale : 0.0;
    hidden = hidden.cwiseProduct(t.dropout_mask);
  }
  conv_forward(params.conv2, graph, hidden, t.conv2);

  t.pooled = t.conv2.output.colwise().mean().transpose();
  t.readout_pre = params.readout_weight.dot(t.pooled) + params.readout_bias;
  t.output = t.readout_pre > 0.0 ? t.readout_pre : 0.0;
  res.prediction = t.output;
  return res;
}

double predict(const ModelParams& params, const ProjectedGraph& graph) {
  Rng unused(0);
  return forward(params, graph, Mode::eval, unused).prediction;
}

std::vector<LinkPrediction> predict_network(const ModelParams& params, const SpatialMultiplexNetwork& net) {
  std::vector<LinkPrediction> out;
  for (const auto& link : candidate_links(net)) {
    out.push_back({link, predict(params, build_projected_graph(net, link))});
  }
  return out;
}

}  // namespace msgcn
