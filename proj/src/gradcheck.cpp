#include "msgcn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "msgcn/error.hpp"
#include "msgcn/synthgen.hpp"
#include "msgcn/train.hpp"

namespace msgcn {

namespace {

constexpr int kWidths[] = {3, 4, 8, 16, 32};
constexpr int kMaxRedraws = 200;

double min_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().minCoeff() : std::numeric_limits<double>::infinity(); }

// Smallest |relu input| seen anywhere in the batch.
double kink_distance(const ModelParams& params, const std::vector<ProjectedGraph>& graphs) {
  double d = std::numeric_limits<double>::infinity();
  Rng unused(0);
  for (const auto& g : graphs) {
    const auto t = forward(params, g, Mode::eval, unused).trace;
    d = std::min({d, min_abs(t.conv1.gate_pre), min_abs(t.conv1.pre_activation), min_abs(t.conv2.gate_pre),
                  min_abs(t.conv2.pre_activation), std::abs(t.readout_pre)});
  }
  return d;
}

void randomize_biases(ModelParams& p, Rng& rng) {
  for (ConvParams* c : {&p.conv1, &p.conv2}) {
    for (Eigen::Index i = 0; i < c->gate_bias.size(); ++i) c->gate_bias[i] = uniform(rng, -0.5, 0.5);
    for (Eigen::Index i = 0; i < c->mix_bias.size(); ++i) c->mix_bias[i] = uniform(rng, -0.2, 0.5);
  }
  p.readout_bias = uniform(rng, 0.3, 0.8);
}

}  // namespace

bool GradCheckReport::passed() const {
  return !instances.empty() &&
         std::all_of(instances.begin(), instances.end(), [](const auto& i) { return i.passed(); });
}

std::string GradCheckReport::format() const {
  std::string out;
  char line[256];
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const auto& i = instances[k];
    std::snprintf(line, sizeof line, "%-4zu %-28s hidden=%-3d params=%-5zu batch=%-3zu max_rel=%.3e max_abs=%.3e %s\n",
                  k, i.description.c_str(), i.hidden, i.parameters, i.batch, i.max_rel_error, i.max_abs_error,
                  i.passed() ? "ok" : "FAIL");
    out += line;
  }
  out += passed() ? "gradcheck passed\n" : "gradcheck FAILED\n";
  return out;
}

GradCheckReport run_gradcheck(std::uint64_t seed, const GradCheckOptions& options) {
  GradCheckReport report;
  for (int n = 0; n < options.instances; ++n) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(n)));
    GradCheckInstance inst;
    inst.hidden = kWidths[n % std::size(kWidths)];

    GeneratorConfig gen;
    gen.network_type = static_cast<NetworkType>(n % 3);
    gen.num_nodes = 4 + static_cast<int>(uniform_index(rng, 4));
    gen.num_layers = 2 + static_cast<int>(uniform_index(rng, 2));
    gen.p = uniform(rng, 0.3, 0.7);
    gen.k = 2;

    std::vector<ProjectedGraph> graphs;
    std::vector<double> targets;
    ModelParams params;
    LossConfig loss_cfg;
    for (;; ++inst.redraws) {
      if (inst.redraws > kMaxRedraws) throw Error("gradcheck could not draw an instance away from relu kinks");
      gen.seed = rng();
      const auto net = generate_network(gen);
      graphs.clear();
      targets.clear();
      auto links = candidate_links(net);
      shuffle(links.begin(), links.end(), rng);
      for (const auto& link : links) {
        if (graphs.size() == 6) break;
        graphs.push_back(build_projected_graph(net, link));
        targets.push_back(*link.true_weight);
      }
      params = init_params(rng(), inst.hidden);
      randomize_biases(params, rng);
      loss_cfg.w_spread = uniform(rng, 0.0, 0.1);
      loss_cfg.w_range = uniform(rng, 0.0, 0.1);
      loss_cfg.epsilon = 1e-2;  // keeps the spread term well conditioned
      loss_cfg.y_range = uniform(rng, 0.5, 2.0);
      if (kink_distance(params, graphs) >= options.kink_margin) break;
    }
    inst.description = to_string(gen.network_type) + " n=" + std::to_string(gen.num_nodes) +
                       " L=" + std::to_string(gen.num_layers);
    inst.batch = graphs.size();

    std::vector<Sample> batch;
    for (std::size_t k = 0; k < graphs.size(); ++k) batch.push_back({&graphs[k], targets[k]});
    Rng unused(0);
    const auto analytic = flatten(backward(params, batch, loss_cfg, Mode::eval, unused, 0.0).gradients);
    const Eigen::VectorXd theta = flatten(params);
    inst.parameters = static_cast<std::size_t>(theta.size());
    auto total = [&](const Eigen::VectorXd& t) {
      return backward(unflatten(t, inst.hidden), batch, loss_cfg, Mode::eval, unused, 0.0).loss.total;
    };
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      Eigen::VectorXd plus = theta, minus = theta;
      plus[k] += options.step;
      minus[k] -= options.step;
      const double numeric = (total(plus) - total(minus)) / (2.0 * options.step);
      const double abs_err = std::abs(numeric - analytic[k]);
      const double scale = std::max(std::abs(numeric), std::abs(analytic[k]));
      const double rel_err = scale > 0.0 ? abs_err / scale : 0.0;
      inst.max_abs_error = std::max(inst.max_abs_error, abs_err);
      if (scale >= options.abs_tolerance) inst.max_rel_error = std::max(inst.max_rel_error, rel_err);
      if (rel_err >= options.rel_tolerance && abs_err >= options.abs_tolerance) ++inst.failures;
    }
    report.instances.push_back(std::move(inst));
  }
  return report;
}

}  // namespace msgcn
