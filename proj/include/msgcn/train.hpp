#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "msgcn/graph.hpp"
#include "msgcn/model.hpp"

namespace msgcn {

struct LossConfig {
  double w_mse = 1.0;
  // The spread term is off by default: at 0.05 it pushed test correlation
  // negative on small complete networks.
  double w_spread = 0.0;
  double w_range = 0.05;
  double epsilon = 1e-8;
  // max - min of the training targets; fit() overwrites it.
  double y_range = 0.0;
};

struct LossBreakdown {
  double total = 0.0;
  double mse = 0.0;
  double spread = 0.0;
  double range_penalty = 0.0;
};

// total = w_mse * mean((yhat - y)^2)
//       + w_spread / (Var(yhat) + eps)          (population variance)
//       + w_range * mean((yhat - y_range)^2)
LossBreakdown loss(std::span<const double> predictions, std::span<const double> targets, const LossConfig& cfg);

// d total / d prediction_k for every k. The spread term couples the whole batch.
Eigen::VectorXd loss_gradient(std::span<const double> predictions, std::span<const double> targets,
                              const LossConfig& cfg);

// Adds d(prediction)/d(params) * upstream to grads, replaying the trace.
void accumulate_gradient(const ModelParams& params, const ProjectedGraph& graph, const ForwardTrace& trace,
                         double upstream, ModelParams& grads);

struct Sample {
  const ProjectedGraph* graph;
  double target;
};

struct BatchResult {
  LossBreakdown loss;
  ModelParams gradients;
  std::vector<double> predictions;
};

// Forward every sample, evaluate the batch loss, and backpropagate exact
// gradients of the total loss. ReLU derivative at 0 is taken as 0.
BatchResult backward(const ModelParams& params, std::span<const Sample> batch, const LossConfig& cfg, Mode mode,
                     Rng& rng, double dropout_rate);

struct TrainConfig {
  int epochs = 40;
  double learning_rate = 1e-4;
  double dropout = 0.5;
  int hidden_width = kDefaultHidden;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
};

AdamState make_adam_state(const ModelParams& params);

// One bias-corrected Adam update at step t (t >= 1). Returns the new params
// and stores the new moments in state.
ModelParams adam_step(const ModelParams& params, const ModelParams& grads, AdamState& state, long t,
                      const TrainConfig& cfg);

struct FitResult {
  ModelParams params;
  // Mean batch loss per epoch.
  std::vector<LossBreakdown> history;
  LossConfig loss_config;
};

// One Adam step per network per epoch; a network's labelled candidate links
// form its batch. Network order is reshuffled every epoch from cfg.seed.
FitResult fit(std::span<const SpatialMultiplexNetwork> train_networks, const TrainConfig& cfg,
              LossConfig loss_cfg);

}  // namespace msgcn
