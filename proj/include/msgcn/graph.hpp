#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace msgcn {

struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

struct IntraEdge {
  int layer = 0;
  int u = 0;
  int v = 0;
  double weight = 0.0;

  friend bool operator==(const IntraEdge&, const IntraEdge&) = default;
};

struct InterEdge {
  int layer_p = 0;
  int u = 0;
  int layer_q = 0;
  int v = 0;
  double weight = 0.0;

  friend bool operator==(const InterEdge&, const InterEdge&) = default;
};

// Multiplex network with node positions shared by every replica. features[l][i]
// is the scalar feature of node i in layer l. Interlayer edges are the ground
// truth labels for link weight prediction.
struct SpatialMultiplexNetwork {
  int num_layers = 2;
  std::vector<Position> positions;
  std::vector<std::vector<double>> features;
  std::vector<IntraEdge> intra_edges;
  std::vector<InterEdge> inter_edges;

  std::size_t num_nodes() const { return positions.size(); }

  friend bool operator==(const SpatialMultiplexNetwork&, const SpatialMultiplexNetwork&) = default;
};

struct Violation {
  std::string invariant;
  std::string detail;
};

// Checks every multiplex invariant and reports all failures. Never throws.
std::vector<Violation> validate(const SpatialMultiplexNetwork& net);

std::string format_violations(const std::vector<Violation>& violations);

// An interlayer node pair (source_node in source_layer) -> (target_node in
// target_layer), with target_layer = source_layer + 1.
struct CandidateLink {
  int source_layer = 0;
  int source_node = 0;
  int target_layer = 1;
  int target_node = 0;
  std::optional<double> true_weight;

  friend bool operator==(const CandidateLink&, const CandidateLink&) = default;
};

// All (num_layers - 1) * M^2 adjacent-layer node pairs, ordered by layer pair,
// then source node, then target node. Labels are filled from inter_edges; an
// edge stored as (q, v) -> (p, u) with q > p labels candidate (p, u) -> (q, v).
std::vector<CandidateLink> candidate_links(const SpatialMultiplexNetwork& net);

// Single-layer graph that scores one candidate link. Node 0 is the projected
// source node; the rest are the target and its neighbours in the target layer
// in ascending original index. Edges are undirected pairs (a < b), sorted.
struct ProjectedGraph {
  std::vector<double> node_features;
  std::vector<Position> node_positions;
  std::vector<std::pair<int, int>> edges;
  int projected_index = 0;
  int target_index = 1;
  // Original layer-q index of every non-projected node (-1 for the projection).
  std::vector<int> original_index;

  std::size_t num_nodes() const { return node_features.size(); }

  // Adjacency lists derived from edges, each list ascending.
  std::vector<std::vector<int>> neighbours() const;
};

ProjectedGraph build_projected_graph(const SpatialMultiplexNetwork& net, const CandidateLink& link);

// Undirected intralayer adjacency of one layer, each list ascending.
std::vector<std::vector<int>> layer_adjacency(const SpatialMultiplexNetwork& net, int layer);

}  // namespace msgcn
