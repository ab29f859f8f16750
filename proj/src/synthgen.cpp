#include "msgcn/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "msgcn/error.hpp"

namespace msgcn {

std::string to_string(NetworkType type) {
  switch (type) {
    case NetworkType::complete:
      return "complete";
    case NetworkType::random:
      return "random";
    case NetworkType::small_world:
      return "small_world";
  }
  return "unknown";
}

NetworkType parse_network_type(const std::string& text) {
  if (text == "complete") return NetworkType::complete;
  if (text == "random") return NetworkType::random;
  if (text == "small_world" || text == "small-world") return NetworkType::small_world;
  throw Error("unknown network type '" + text + "' (expected complete, random or small-world)");
}

std::vector<std::string> config_errors(const GeneratorConfig& config) {
  std::vector<std::string> errors;
  const int n = config.num_nodes;
  const int min_nodes = config.network_type == NetworkType::complete ? 2 : 4;
  if (n < min_nodes || n > 10) {
    errors.push_back("num_nodes=" + std::to_string(n) + " outside [" + std::to_string(min_nodes) + ", 10] for " +
                     to_string(config.network_type));
  }
  if (config.num_layers != 2 && config.num_layers != 3) {
    errors.push_back("num_layers must be 2 or 3");
  }
  if (config.network_type != NetworkType::complete && !(config.p >= 0.0 && config.p <= 1.0)) {
    errors.push_back("p must lie in [0, 1]");
  }
  if (config.network_type == NetworkType::small_world) {
    if (config.k != 2 && config.k != 4) errors.push_back("k must be 2 or 4");
    if (config.k >= n) errors.push_back("k must be smaller than num_nodes");
  }
  return errors;
}

namespace {

void require_valid(const GeneratorConfig& config) {
  const auto errors = config_errors(config);
  if (errors.empty()) return;
  std::string msg = "invalid generator config:";
  for (const auto& e : errors) msg += " " + e + ";";
  throw Error(msg);
}

UndirectedEdges newman_watts_strogatz(int n, int k, double p, Rng& rng) {
  std::vector<std::set<int>> adj(n);
  UndirectedEdges ring;
  for (int offset = 1; offset <= k / 2; ++offset) {
    for (int u = 0; u < n; ++u) {
      const int v = (u + offset) % n;
      if (adj[u].insert(v).second) {
        adj[v].insert(u);
        ring.emplace_back(u, v);
      }
    }
  }
  // Shortcuts are added on top of the lattice; no ring edge is removed.
  for (const auto& [u, v] : ring) {
    if (uniform01(rng) >= p) continue;
    if (static_cast<int>(adj[u].size()) >= n - 1) continue;
    std::vector<int> free;
    for (int w = 0; w < n; ++w) {
      if (w != u && !adj[u].count(w)) free.push_back(w);
    }
    const int w = free[uniform_index(rng, free.size())];
    adj[u].insert(w);
    adj[w].insert(u);
  }
  UndirectedEdges edges;
  for (int u = 0; u < n; ++u) {
    for (int w : adj[u]) {
      if (u < w) edges.emplace_back(u, w);
    }
  }
  return edges;
}

}  // namespace

UndirectedEdges gen_topology(const GeneratorConfig& config, Rng& rng) {
  require_valid(config);
  const int n = config.num_nodes;
  UndirectedEdges edges;
  switch (config.network_type) {
    case NetworkType::complete:
      for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) edges.emplace_back(u, v);
      break;
    case NetworkType::random:
      for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
          if (uniform01(rng) < config.p) edges.emplace_back(u, v);
      break;
    case NetworkType::small_world:
      edges = newman_watts_strogatz(n, config.k, config.p, rng);
      break;
  }
  return edges;
}

void apply_feature_update(SpatialMultiplexNetwork& net) {
  for (int l = 0; l < net.num_layers; ++l) {
    const auto& before = net.features[l];
    std::vector<double> after(before.size(), 0.0);
    for (const auto& e : net.intra_edges) {
      if (e.layer != l) continue;
      after[e.u] += e.weight * before[e.v];
      after[e.v] += e.weight * before[e.u];
    }
    net.features[l] = std::move(after);
  }
}

void assign_interlayer_weights(SpatialMultiplexNetwork& net) {
  const int m = static_cast<int>(net.num_nodes());
  net.inter_edges.clear();
  net.inter_edges.reserve(static_cast<std::size_t>(net.num_layers - 1) * m * m);
  for (int p = 0; p + 1 < net.num_layers; ++p) {
    const int q = p + 1;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        net.inter_edges.push_back({p, i, q, j, (net.features[p][i] + net.features[q][j]) / 2.0});
      }
    }
  }
}

SpatialMultiplexNetwork generate_network(const GeneratorConfig& config, Rng& rng) {
  require_valid(config);
  const int n = config.num_nodes;
  SpatialMultiplexNetwork net;
  net.num_layers = config.num_layers;

  net.positions.resize(n);
  for (auto& pos : net.positions) {
    pos.x = uniform01(rng);
    pos.y = uniform01(rng);
  }

  const auto topology = gen_topology(config, rng);
  for (int l = 0; l < net.num_layers; ++l) {
    for (const auto& [u, v] : topology) {
      net.intra_edges.push_back({l, u, v, uniform01(rng)});
    }
  }

  net.features.assign(net.num_layers, std::vector<double>(n));
  for (auto& layer : net.features) {
    for (auto& x : layer) x = uniform01(rng);
  }

  apply_feature_update(net);
  assign_interlayer_weights(net);
  return net;
}

SpatialMultiplexNetwork generate_network(const GeneratorConfig& config) {
  Rng rng(config.seed);
  return generate_network(config, rng);
}

std::size_t DatasetManifest::train_count() const {
  return static_cast<std::size_t>(std::floor(static_cast<double>(count) * train_fraction + 1e-9));
}

DatasetManifest make_manifest(const GeneratorConfig& config, std::size_t count, std::uint64_t master_seed) {
  DatasetManifest m;
  m.config = config;
  m.count = count;
  m.master_seed = master_seed;
  m.seeds.reserve(count);
  for (std::size_t i = 0; i < count; ++i) m.seeds.push_back(derive_seed(master_seed, i));
  return m;
}

GeneratorConfig resolve_config(const DatasetManifest& manifest, std::size_t index) {
  GeneratorConfig cfg = manifest.config;
  cfg.seed = manifest.seeds.at(index);
  Rng rng(derive_seed(cfg.seed, 0x5eed));
  if (manifest.p_range) {
    cfg.p = uniform(rng, manifest.p_range->first, manifest.p_range->second);
  }
  if (!manifest.k_choices.empty()) {
    cfg.k = manifest.k_choices[uniform_index(rng, manifest.k_choices.size())];
  }
  return cfg;
}

std::vector<SpatialMultiplexNetwork> generate_dataset(const DatasetManifest& manifest) {
  if (manifest.seeds.size() != manifest.count) {
    throw Error("manifest seed list does not match count");
  }
  std::vector<SpatialMultiplexNetwork> out;
  out.reserve(manifest.count);
  for (std::size_t i = 0; i < manifest.count; ++i) {
    out.push_back(generate_network(resolve_config(manifest, i)));
  }
  return out;
}

}  // namespace msgcn
