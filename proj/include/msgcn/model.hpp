#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "msgcn/graph.hpp"
#include "msgcn/random.hpp"

namespace msgcn {

inline constexpr int kDefaultHidden = 32;
inline constexpr double kInitGateBias = 0.5;

// One spatial convolution layer:
//   m_i  = sum_{j in N(i)} relu(U^T (p_j - p_i) + b) * h_j
//   h'_i = relu(W m_i + c)
struct ConvParams {
  Eigen::MatrixXd gate_weight;  // U, 2 x d_in
  Eigen::VectorXd gate_bias;    // b, d_in
  Eigen::MatrixXd mix_weight;   // W, d_out x d_in
  Eigen::VectorXd mix_bias;     // c, d_out

  int in_dim() const { return static_cast<int>(gate_bias.size()); }
  int out_dim() const { return static_cast<int>(mix_bias.size()); }

  friend bool operator==(const ConvParams& a, const ConvParams& b);
};

struct ModelParams {
  ConvParams conv1;
  ConvParams conv2;
  Eigen::VectorXd readout_weight;
  double readout_bias = 0.0;

  int hidden() const { return static_cast<int>(readout_weight.size()); }

  // All tensors zero, dims (1 -> hidden -> hidden -> 1).
  static ModelParams zeros(int hidden = kDefaultHidden);

  friend bool operator==(const ModelParams& a, const ModelParams& b);
};

// Name, shape and offset of every tensor inside the flat parameter vector.
// Matrices are stored column-major.
struct TensorSlot {
  std::string name;
  int rows;
  int cols;
  std::size_t offset;
};

std::vector<TensorSlot> tensor_layout(int hidden);
std::size_t parameter_count(int hidden);
Eigen::VectorXd flatten(const ModelParams& params);
ModelParams unflatten(const Eigen::VectorXd& flat, int hidden);
bool all_finite(const ModelParams& params);

// Glorot-uniform weights with bound sqrt(6 / (fan_in + fan_out)) per tensor.
// Gate biases start at kInitGateBias, all other biases at zero.
ModelParams init_params(std::uint64_t seed, int hidden = kDefaultHidden);

Eigen::VectorXd gate(const Eigen::MatrixXd& gate_weight, const Eigen::VectorXd& gate_bias,
                     const Eigen::Vector2d& delta_p);

// Embeddings are n x d_in (one row per node); result is n x d_out.
Eigen::MatrixXd spatial_conv(const ConvParams& layer, const ProjectedGraph& graph,
                             const Eigen::MatrixXd& embeddings);

struct ConvTrace {
  Eigen::MatrixXd input;                      // n x d_in
  std::vector<std::pair<int, int>> directed;  // (receiver i, sender j)
  Eigen::MatrixXd gate_pre;                   // |directed| x d_in, before relu
  Eigen::MatrixXd message;                    // n x d_in
  Eigen::MatrixXd pre_activation;             // n x d_out
  Eigen::MatrixXd output;                     // n x d_out
};

struct ForwardTrace {
  ConvTrace conv1;
  Eigen::MatrixXd dropout_mask;  // n x hidden; empty when no dropout was applied
  ConvTrace conv2;
  Eigen::VectorXd pooled;
  double readout_pre = 0.0;
  double output = 0.0;
};

enum class Mode { train, eval };

struct ForwardResult {
  double prediction = 0.0;
  ForwardTrace trace;
};

// conv1 -> inverted dropout (train mode only) -> conv2 -> mean pool ->
// relu(w . pooled + b).
ForwardResult forward(const ModelParams& params, const ProjectedGraph& graph, Mode mode, Rng& rng,
                      double dropout_rate = 0.5);

// Eval-mode prediction for a single projected graph.
double predict(const ModelParams& params, const ProjectedGraph& graph);

struct LinkPrediction {
  CandidateLink link;
  double predicted = 0.0;
};

std::vector<LinkPrediction> predict_network(const ModelParams& params, const SpatialMultiplexNetwork& net);

}  // namespace msgcn
