#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "msgcn/graph.hpp"
#include "msgcn/random.hpp"

namespace msgcn {

enum class NetworkType { complete, random, small_world };

std::string to_string(NetworkType type);
// Accepts "complete", "random", "small_world" and "small-world".
NetworkType parse_network_type(const std::string& text);

struct GeneratorConfig {
  NetworkType network_type = NetworkType::complete;
  int num_nodes = 5;
  int num_layers = 2;
  // Edge probability (random) or shortcut probability per ring edge (small world).
  double p = 0.5;
  // Ring neighbours per node (small world only).
  int k = 2;
  std::uint64_t seed = 0;
};

// Empty when the config is usable. Node and layer counts follow the synthetic
// benchmark table; p only has to be a probability.
std::vector<std::string> config_errors(const GeneratorConfig& config);

using UndirectedEdges = std::vector<std::pair<int, int>>;

// One layer's topology, edges as (u < v) sorted ascending.
UndirectedEdges gen_topology(const GeneratorConfig& config, Rng& rng);

// Single synchronous pass: x_i <- sum_j w_ij x_j over intralayer
// neighbours, right-hand side evaluated on the pre-update features.
void apply_feature_update(SpatialMultiplexNetwork& net);

// Replaces inter_edges with every adjacent-layer pair (p, i) -> (p+1, j),
// weighted (x_ip + x_jq) / 2.
void assign_interlayer_weights(SpatialMultiplexNetwork& net);

SpatialMultiplexNetwork generate_network(const GeneratorConfig& config, Rng& rng);

// Convenience: seeds an Rng from config.seed.
SpatialMultiplexNetwork generate_network(const GeneratorConfig& config);

struct DatasetManifest {
  GeneratorConfig config;
  std::size_t count = 0;
  std::uint64_t master_seed = 0;
  // When set, p is drawn uniformly from [first, second] for each network.
  std::optional<std::pair<double, double>> p_range;
  // When non-empty, k is drawn uniformly from these values for each network.
  std::vector<int> k_choices;
  std::vector<std::uint64_t> seeds;
  double train_fraction = 0.8;

  std::size_t train_count() const;
};

DatasetManifest make_manifest(const GeneratorConfig& config, std::size_t count, std::uint64_t master_seed);

// Config actually used for network `index` (p/k resolved from ranges).
GeneratorConfig resolve_config(const DatasetManifest& manifest, std::size_t index);

std::vector<SpatialMultiplexNetwork> generate_dataset(const DatasetManifest& manifest);

}  // namespace msgcn
