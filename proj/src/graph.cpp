#include "msgcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>
#include <tuple>

#include "msgcn/error.hpp"

namespace msgcn {

namespace {

std::string describe(const IntraEdge& e) {
  std::ostringstream os;
  os << "intra_edges(layer=" << e.layer << ", u=" << e.u << ", v=" << e.v << ", w=" << e.weight << ")";
  return os.str();
}

std::string describe(const InterEdge& e) {
  std::ostringstream os;
  os << "inter_edges(lp=" << e.layer_p << ", u=" << e.u << ", lq=" << e.layer_q << ", v=" << e.v
     << ", w=" << e.weight << ")";
  return os.str();
}

}  // namespace

std::vector<Violation> validate(const SpatialMultiplexNetwork& net) {
  std::vector<Violation> out;
  const int m = static_cast<int>(net.num_nodes());
  const int layers = net.num_layers;
  auto node_ok = [m](int i) { return i >= 0 && i < m; };
  auto layer_ok = [layers](int l) { return l >= 0 && l < layers; };

  if (layers < 2) {
    out.push_back({"num_layers >= 2", "num_layers=" + std::to_string(layers)});
  }
  for (int i = 0; i < m; ++i) {
    const auto& p = net.positions[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      out.push_back({"finite position", "node " + std::to_string(i)});
    }
  }
  if (static_cast<int>(net.features.size()) != std::max(layers, 0)) {
    out.push_back({"one feature vector per layer", "features has " + std::to_string(net.features.size()) +
                                                       " layers, expected " + std::to_string(layers)});
  }
  for (std::size_t l = 0; l < net.features.size(); ++l) {
    const auto& f = net.features[l];
    if (static_cast<int>(f.size()) != m) {
      out.push_back({"same node set in every layer", "layer " + std::to_string(l) + " has " +
                                                         std::to_string(f.size()) + " features, expected " +
                                                         std::to_string(m)});
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (!std::isfinite(f[i])) {
        out.push_back({"finite feature", "layer " + std::to_string(l) + " node " + std::to_string(i)});
      }
    }
  }

  std::set<std::tuple<int, int, int>> seen_intra;
  for (const auto& e : net.intra_edges) {
    if (!layer_ok(e.layer)) {
      out.push_back({"intra edge layer in range", describe(e)});
      continue;
    }
    if (!node_ok(e.u) || !node_ok(e.v)) {
      out.push_back({"node index in range", describe(e)});
      continue;
    }
    if (e.u == e.v) {
      out.push_back({"no self-loop", describe(e)});
      continue;
    }
    if (!std::isfinite(e.weight)) {
      out.push_back({"non-finite weight", describe(e)});
    }
    if (!seen_intra.emplace(e.layer, std::min(e.u, e.v), std::max(e.u, e.v)).second) {
      out.push_back({"duplicate intra edge", describe(e)});
    }
  }

  std::set<std::tuple<int, int, int, int>> seen_inter;
  for (const auto& e : net.inter_edges) {
    if (!layer_ok(e.layer_p) || !layer_ok(e.layer_q)) {
      out.push_back({"inter edge layer in range", describe(e)});
      continue;
    }
    if (std::abs(e.layer_p - e.layer_q) != 1) {
      out.push_back({"non-adjacent interlayer edge", describe(e)});
      continue;
    }
    if (!node_ok(e.u) || !node_ok(e.v)) {
      out.push_back({"node index in range", describe(e)});
      continue;
    }
    if (!std::isfinite(e.weight)) {
      out.push_back({"non-finite weight", describe(e)});
    }
    const bool forward = e.layer_p < e.layer_q;
    const auto key = forward ? std::make_tuple(e.layer_p, e.u, e.layer_q, e.v)
                             : std::make_tuple(e.layer_q, e.v, e.layer_p, e.u);
    if (!seen_inter.insert(key).second) {
      out.push_back({"duplicate inter edge", describe(e)});
    }
  }
  return out;
}

std::string format_violations(const std::vector<Violation>& violations) {
  std::ostringstream os;
  for (const auto& v : violations) {
    os << "  " << v.invariant << ": " << v.detail << "\n";
  }
  return os.str();
}

std::vector<CandidateLink> candidate_links(const SpatialMultiplexNetwork& net) {
  const int m = static_cast<int>(net.num_nodes());
  std::vector<CandidateLink> out;
  out.reserve(static_cast<std::size_t>(std::max(net.num_layers - 1, 0)) * m * m);
  for (int p = 0; p + 1 < net.num_layers; ++p) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        out.push_back({p, i, p + 1, j, std::nullopt});
      }
    }
  }
  auto slot = [m](int p, int i, int j) {
    return static_cast<std::size_t>(p) * m * m + static_cast<std::size_t>(i) * m + j;
  };
  for (const auto& e : net.inter_edges) {
    if (e.layer_q == e.layer_p + 1) {
      out[slot(e.layer_p, e.u, e.v)].true_weight = e.weight;
    } else if (e.layer_p == e.layer_q + 1) {
      out[slot(e.layer_q, e.v, e.u)].true_weight = e.weight;
    }
  }
  return out;
}

std::vector<std::vector<int>> layer_adjacency(const SpatialMultiplexNetwork& net, int layer) {
  std::vector<std::vector<int>> adj(net.num_nodes());
  for (const auto& e : net.intra_edges) {
    if (e.layer != layer) continue;
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return adj;
}

std::vector<std::vector<int>> ProjectedGraph::neighbours() const {
  std::vector<std::vector<int>> adj(num_nodes());
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

ProjectedGraph build_projected_graph(const SpatialMultiplexNetwork& net, const CandidateLink& link) {
  const int m = static_cast<int>(net.num_nodes());
  if (std::abs(link.source_layer - link.target_layer) != 1 || link.source_layer < 0 ||
      link.target_layer < 0 || link.source_layer >= net.num_layers || link.target_layer >= net.num_layers) {
    throw Error("candidate link layers must be adjacent and in range");
  }
  if (link.source_node < 0 || link.source_node >= m || link.target_node < 0 || link.target_node >= m) {
    throw Error("candidate link node index out of range");
  }
  const int q = link.target_layer;
  const int j = link.target_node;

  std::vector<int> included;
  for (const auto& e : net.intra_edges) {
    if (e.layer != q) continue;
    if (e.u == j) included.push_back(e.v);
    if (e.v == j) included.push_back(e.u);
  }
  included.push_back(j);
  std::sort(included.begin(), included.end());
  included.erase(std::unique(included.begin(), included.end()), included.end());

  // local index of original node k, or -1
  std::vector<int> local(m, -1);
  for (std::size_t a = 0; a < included.size(); ++a) local[included[a]] = static_cast<int>(a) + 1;

  ProjectedGraph g;
  g.projected_index = 0;
  g.target_index = local[j];
  g.node_features.push_back(net.features[link.source_layer][link.source_node]);
  g.node_positions.push_back(net.positions[link.source_node]);
  g.original_index.push_back(-1);
  for (int k : included) {
    g.node_features.push_back(net.features[q][k]);
    g.node_positions.push_back(net.positions[k]);
    g.original_index.push_back(k);
  }

  g.edges.emplace_back(g.projected_index, g.target_index);
  for (const auto& e : net.intra_edges) {
    if (e.layer != q) continue;
    const int a = local[e.u];
    const int b = local[e.v];
    if (a < 0 || b < 0) continue;
    g.edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  return g;
}

}  // namespace msgcn
