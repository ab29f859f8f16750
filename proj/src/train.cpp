#include "msgcn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "msgcn/error.hpp"

namespace msgcn {

namespace {

void check_batch(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.empty()) throw Error("empty batch");
  if (predictions.size() != targets.size()) throw Error("predictions and targets differ in length");
}

double population_variance(std::span<const double> v, double& mean) {
  const double n = static_cast<double>(v.size());
  mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / n;
}

// Returns d loss / d input. delta_p for edge (i, j) is p_j - p_i.
Eigen::MatrixXd conv_backward(const ConvParams& layer, const ConvTrace& t,
                              const std::vector<Eigen::Vector2d>& deltas, const Eigen::MatrixXd& d_out,
                              ConvParams& grads) {
  const Eigen::MatrixXd d_pre = d_out.cwiseProduct((t.pre_activation.array() > 0.0).cast<double>().matrix());
  grads.mix_weight.noalias() += d_pre.transpose() * t.message;
  grads.mix_bias += d_pre.colwise().sum().transpose();
  const Eigen::MatrixXd d_message = d_pre * layer.mix_weight;

  Eigen::MatrixXd d_input = Eigen::MatrixXd::Zero(t.input.rows(), t.input.cols());
  for (std::size_t e = 0; e < t.directed.size(); ++e) {
    const auto [i, j] = t.directed[e];
    const auto row = static_cast<Eigen::Index>(e);
    const Eigen::RowVectorXd pre = t.gate_pre.row(row);
    const Eigen::RowVectorXd g = pre.cwiseMax(0.0);
    d_input.row(j) += g.cwiseProduct(d_message.row(i));
    const Eigen::RowVectorXd d_gate_pre =
        d_message.row(i).cwiseProduct(t.input.row(j)).cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
    grads.gate_weight.noalias() += deltas[e] * d_gate_pre;
    grads.gate_bias += d_gate_pre.transpose();
  }
  return d_input;
}

std::vector<Eigen::Vector2d> edge_deltas(const ConvTrace& t, const ProjectedGraph* graph) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(t.directed.size());
  for (const auto& [i, j] : t.directed) {
    out.emplace_back(graph->node_positions[j].x - graph->node_positions[i].x,
                     graph->node_positions[j].y - graph->node_positions[i].y);
  }
  return out;
}

void accumulate_gradient_impl(const ModelParams& params, const ProjectedGraph* graph, const ForwardTrace& trace,
                              double upstream, ModelParams& grads) {
  const double d_pre = trace.readout_pre > 0.0 ? upstream : 0.0;
  if (d_pre == 0.0) return;
  grads.readout_weight += d_pre * trace.pooled;
  grads.readout_bias += d_pre;

  const auto n = trace.conv2.output.rows();
  Eigen::MatrixXd d_h2(n, trace.conv2.output.cols());
  d_h2.rowwise() = (d_pre / static_cast<double>(n)) * params.readout_weight.transpose();

  const auto deltas = edge_deltas(trace.conv2, graph);
  Eigen::MatrixXd d_hidden = conv_backward(params.conv2, trace.conv2, deltas, d_h2, grads.conv2);
  if (trace.dropout_mask.size() > 0) d_hidden = d_hidden.cwiseProduct(trace.dropout_mask);
  conv_backward(params.conv1, trace.conv1, deltas, d_hidden, grads.conv1);
}

}  // namespace

LossBreakdown loss(std::span<const double> predictions, std::span<const double> targets, const LossConfig& cfg) {
  check_batch(predictions, targets);
  const double n = static_cast<double>(predictions.size());
  LossBreakdown out;
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    const double err = predictions[k] - targets[k];
    const double off = predictions[k] - cfg.y_range;
    out.mse += err * err;
    out.range_penalty += off * off;
  }
  out.mse /= n;
  out.range_penalty /= n;
  double mean = 0.0;
  out.spread = 1.0 / (population_variance(predictions, mean) + cfg.epsilon);
  out.total = cfg.w_mse * out.mse + cfg.w_spread * out.spread + cfg.w_range * out.range_penalty;
  return out;
}

Eigen::VectorXd loss_gradient(std::span<const double> predictions, std::span<const double> targets,
                              const LossConfig& cfg) {
  check_batch(predictions, targets);
  const double n = static_cast<double>(predictions.size());
  double mean = 0.0;
  const double var = population_variance(predictions, mean);
  const double spread_scale = -cfg.w_spread / ((var + cfg.epsilon) * (var + cfg.epsilon));
  Eigen::VectorXd g(static_cast<Eigen::Index>(predictions.size()));
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    const double yhat = predictions[k];
    g[static_cast<Eigen::Index>(k)] = 2.0 * cfg.w_mse * (yhat - targets[k]) / n +
                                      spread_scale * 2.0 * (yhat - mean) / n +
                                      2.0 * cfg.w_range * (yhat - cfg.y_range) / n;
  }
  return g;
}

void accumulate_gradient(const ModelParams& params, const ProjectedGraph& graph, const ForwardTrace& trace,
                         double upstream, ModelParams& grads) {
  accumulate_gradient_impl(params, &graph, trace, upstream, grads);
}

BatchResult backward(const ModelParams& params, std::span<const Sample> batch, const LossConfig& cfg, Mode mode,
                     Rng& rng, double dropout_rate) {
  if (batch.empty()) throw Error("empty batch");
  std::vector<ForwardTrace> traces;
  traces.reserve(batch.size());
  BatchResult out;
  out.predictions.reserve(batch.size());
  std::vector<double> targets;
  targets.reserve(batch.size());
  for (const auto& s : batch) {
    auto res = forward(params, *s.graph, mode, rng, dropout_rate);
    out.predictions.push_back(res.prediction);
    targets.push_back(s.target);
    traces.push_back(std::move(res.trace));
  }
  out.loss = loss(out.predictions, targets, cfg);
  const Eigen::VectorXd upstream = loss_gradient(out.predictions, targets, cfg);
  out.gradients = ModelParams::zeros(params.hidden());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    accumulate_gradient_impl(params, batch[k].graph, traces[k], upstream[static_cast<Eigen::Index>(k)],
                             out.gradients);
  }
  return out;
}

AdamState make_adam_state(const ModelParams& params) {
  const auto n = static_cast<Eigen::Index>(parameter_count(params.hidden()));
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0};
}

ModelParams adam_step(const ModelParams& params, const ModelParams& grads, AdamState& state, long t,
                      const TrainConfig& cfg) {
  if (t < 1) throw Error("adam step index must be >= 1");
  const Eigen::VectorXd g = flatten(grads);
  Eigen::VectorXd theta = flatten(params);
  if (state.m.size() != theta.size()) state = make_adam_state(params);
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * g;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
  state.step = t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    const double m_hat = state.m[k] / c1;
    const double v_hat = state.v[k] / c2;
    theta[k] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_epsilon);
  }
  return unflatten(theta, params.hidden());
}

FitResult fit(std::span<const SpatialMultiplexNetwork> train_networks, const TrainConfig& cfg,
              LossConfig loss_cfg) {
  if (cfg.epochs < 1) throw Error("epochs must be >= 1");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw Error("dropout must lie in [0, 1)");

  struct NetworkBatch {
    std::vector<ProjectedGraph> graphs;
    std::vector<double> targets;
  };
  std::vector<NetworkBatch> batches;
  double lo = INFINITY;
  double hi = -INFINITY;
  double target_sum = 0.0;
  std::size_t target_count = 0;
  for (const auto& net : train_networks) {
    NetworkBatch b;
    for (const auto& link : candidate_links(net)) {
      if (!link.true_weight) continue;
      b.graphs.push_back(build_projected_graph(net, link));
      b.targets.push_back(*link.true_weight);
      target_sum += *link.true_weight;
      ++target_count;
      lo = std::min(lo, *link.true_weight);
      hi = std::max(hi, *link.true_weight);
    }
    if (!b.graphs.empty()) batches.push_back(std::move(b));
  }
  if (batches.empty()) throw Error("no labelled candidate links in the training networks");
  loss_cfg.y_range = hi - lo;

  FitResult out;
  out.loss_config = loss_cfg;
  out.params = init_params(derive_seed(cfg.seed, 1), cfg.hidden_width);
  // Start the readout at the mean target: with a zero bias and nonnegative
  // pooled features the output relu is dead for about half of all seeds.
  out.params.readout_bias = target_sum / static_cast<double>(target_count);
  AdamState state = make_adam_state(out.params);
  Rng rng(derive_seed(cfg.seed, 2));

  std::vector<std::size_t> order(batches.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  long step = 0;
  std::vector<Sample> samples;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order.begin(), order.end(), rng);
    LossBreakdown sum;
    for (std::size_t idx : order) {
      const auto& b = batches[idx];
      samples.clear();
      for (std::size_t k = 0; k < b.graphs.size(); ++k) samples.push_back({&b.graphs[k], b.targets[k]});
      const auto res = backward(out.params, samples, loss_cfg, Mode::train, rng, cfg.dropout);
      out.params = adam_step(out.params, res.gradients, state, ++step, cfg);
      sum.total += res.loss.total;
      sum.mse += res.loss.mse;
      sum.spread += res.loss.spread;
      sum.range_penalty += res.loss.range_penalty;
    }
    const double n = static_cast<double>(batches.size());
    out.history.push_back({sum.total / n, sum.mse / n, sum.spread / n, sum.range_penalty / n});
  }
  return out;
}

}  // namespace msgcn
