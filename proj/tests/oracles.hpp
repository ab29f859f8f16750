#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls into the library's numeric code.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "msgcn/graph.hpp"
#include "msgcn/model.hpp"
#include "msgcn/random.hpp"

namespace oracle {

inline bool adjacent(const msgcn::ProjectedGraph& g, int a, int b) {
  for (const auto& [u, v] : g.edges) {
    if ((u == a && v == b) || (u == b && v == a)) return true;
  }
  return false;
}

// Gated neighbourhood sum followed by the mixing layer, one scalar at a time.
inline std::vector<std::vector<double>> conv_literal(const msgcn::ConvParams& layer, const msgcn::ProjectedGraph& g,
                                                     const std::vector<std::vector<double>>& h) {
  const int n = static_cast<int>(g.num_nodes());
  const int d_in = static_cast<int>(layer.gate_bias.size());
  const int d_out = static_cast<int>(layer.mix_bias.size());
  std::vector<std::vector<double>> out(n, std::vector<double>(d_out, 0.0));
  for (int i = 0; i < n; ++i) {
    std::vector<double> m(d_in, 0.0);
    for (int j = 0; j < n; ++j) {
      if (j == i || !adjacent(g, i, j)) continue;
      const double dx = g.node_positions[j].x - g.node_positions[i].x;
      const double dy = g.node_positions[j].y - g.node_positions[i].y;
      for (int k = 0; k < d_in; ++k) {
        const double pre = layer.gate_weight(0, k) * dx + layer.gate_weight(1, k) * dy + layer.gate_bias[k];
        const double gate = pre > 0.0 ? pre : 0.0;
        m[k] += gate * h[j][k];
      }
    }
    for (int o = 0; o < d_out; ++o) {
      double s = layer.mix_bias[o];
      for (int k = 0; k < d_in; ++k) s += layer.mix_weight(o, k) * m[k];
      out[i][o] = s > 0.0 ? s : 0.0;
    }
  }
  return out;
}

inline std::vector<std::vector<double>> to_rows(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) rows[r][c] = m(r, c);
  return rows;
}

// Eval-mode model output built from conv_literal.
inline double predict_literal(const msgcn::ModelParams& p, const msgcn::ProjectedGraph& g) {
  std::vector<std::vector<double>> x(g.num_nodes(), std::vector<double>(1));
  for (std::size_t i = 0; i < g.num_nodes(); ++i) x[i][0] = g.node_features[i];
  const auto h2 = conv_literal(p.conv2, g, conv_literal(p.conv1, g, x));
  double s = p.readout_bias;
  for (int k = 0; k < p.hidden(); ++k) {
    double pooled = 0.0;
    for (const auto& row : h2) pooled += row[k];
    s += p.readout_weight[k] * pooled / static_cast<double>(h2.size());
  }
  return s > 0.0 ? s : 0.0;
}

// Random projected graph with 2..max_nodes nodes; node 0 is joined to node 1.
inline msgcn::ProjectedGraph random_graph(msgcn::Rng& rng, int max_nodes = 6) {
  msgcn::ProjectedGraph g;
  const int n = 2 + static_cast<int>(msgcn::uniform_index(rng, static_cast<std::uint64_t>(max_nodes - 1)));
  for (int i = 0; i < n; ++i) {
    g.node_features.push_back(msgcn::uniform01(rng));
    g.node_positions.push_back({msgcn::uniform01(rng), msgcn::uniform01(rng)});
    g.original_index.push_back(i == 0 ? -1 : i - 1);
  }
  g.edges.emplace_back(0, 1);
  for (int a = 1; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (msgcn::uniform01(rng) < 0.6) g.edges.emplace_back(a, b);
  return g;
}

inline msgcn::ModelParams random_params(msgcn::Rng& rng, int hidden) {
  auto p = msgcn::ModelParams::zeros(hidden);
  auto fill = [&](auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = msgcn::uniform(rng, -1.0, 1.0);
  };
  for (auto* c : {&p.conv1, &p.conv2}) {
    fill(c->gate_weight);
    fill(c->gate_bias);
    fill(c->mix_weight);
    fill(c->mix_bias);
  }
  fill(p.readout_weight);
  p.readout_bias = msgcn::uniform(rng, 0.0, 1.0);
  return p;
}

struct NaiveMetrics {
  double mse, r, r2, mae;
};

// Two-pass textbook formulas.
inline NaiveMetrics naive_metrics(const std::vector<double>& pred, const std::vector<double>& act) {
  const double n = static_cast<double>(pred.size());
  double mp = 0, ma = 0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    mp += pred[k];
    ma += act[k];
  }
  mp /= n;
  ma /= n;
  double se = 0, ae = 0, cov = 0, vp = 0, va = 0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    se += (pred[k] - act[k]) * (pred[k] - act[k]);
    ae += std::abs(pred[k] - act[k]);
    cov += (pred[k] - mp) * (act[k] - ma);
    vp += (pred[k] - mp) * (pred[k] - mp);
    va += (act[k] - ma) * (act[k] - ma);
  }
  return {se / n, cov / std::sqrt(vp * va), 1.0 - se / va, ae / n};
}

struct WelchCase {
  std::vector<double> a;
  std::vector<double> b;
  double t, df, p;
};

// t, Welch-Satterthwaite df and two-sided p computed once with mpmath at 50
// significant digits (betainc, regularized).
inline const std::vector<WelchCase>& welch_cases() {
  static const std::vector<WelchCase> cases = {
#include "welch_cases.inc"
  };
  return cases;
}

// Scalar Adam with bias correction, one coordinate.
struct ScalarAdam {
  double m = 0.0, v = 0.0;
  double step(double theta, double g, long t, double lr, double b1 = 0.9, double b2 = 0.999, double eps = 1e-8) {
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, static_cast<double>(t)));
    const double vh = v / (1 - std::pow(b2, static_cast<double>(t)));
    return theta - lr * mh / (std::sqrt(vh) + eps);
  }
};

}  // namespace oracle
