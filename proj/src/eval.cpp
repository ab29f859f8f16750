#include "msgcn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "msgcn/error.hpp"

namespace msgcn {

double MetricSet::mean_abs_error() const {
  if (abs_errors.empty()) return 0.0;
  return std::accumulate(abs_errors.begin(), abs_errors.end(), 0.0) / static_cast<double>(abs_errors.size());
}

MetricSet metrics(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw Error("predicted and actual differ in length");
  if (predicted.size() < 2) throw Error("metrics need at least two values");
  const double n = static_cast<double>(predicted.size());
  MetricSet out;
  out.abs_errors.reserve(predicted.size());
  double mean_p = 0.0;
  double mean_a = 0.0;
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    const double err = predicted[k] - actual[k];
    out.mse += err * err;
    out.abs_errors.push_back(std::abs(err));
    mean_p += predicted[k];
    mean_a += actual[k];
  }
  out.mse /= n;
  mean_p /= n;
  mean_a /= n;

  double s_pp = 0.0, s_aa = 0.0, s_pa = 0.0;
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    const double dp = predicted[k] - mean_p;
    const double da = actual[k] - mean_a;
    s_pp += dp * dp;
    s_aa += da * da;
    s_pa += dp * da;
  }
  if (s_aa > 0.0) {
    out.r_squared = 1.0 - out.mse * n / s_aa;
    if (s_pp > 0.0) out.pearson_r = std::clamp(s_pa / std::sqrt(s_pp * s_aa), -1.0, 1.0);
  }
  return out;
}

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw Error("incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw Error("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw Error("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw Error("degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

TTestResult welch_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error("welch t-test needs at least two values per sample");
  auto moments = [](std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, ss / (n - 1.0)};
  };
  const auto [mean_a, var_a] = moments(a);
  const auto [mean_b, var_b] = moments(b);
  if (!(var_a > 0.0) || !(var_b > 0.0)) throw Error("welch t-test needs nonzero variance in both samples");
  const double se_a = var_a / static_cast<double>(a.size());
  const double se_b = var_b / static_cast<double>(b.size());
  TTestResult r;
  r.t = (mean_a - mean_b) / std::sqrt(se_a + se_b);
  r.df = (se_a + se_b) * (se_a + se_b) /
         (se_a * se_a / static_cast<double>(a.size() - 1) + se_b * se_b / static_cast<double>(b.size() - 1));
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

LinkEvaluation evaluate_links(const ModelParams& params, std::span<const SpatialMultiplexNetwork> networks) {
  LinkEvaluation out;
  for (const auto& net : networks) {
    for (const auto& link : candidate_links(net)) {
      if (!link.true_weight) continue;
      out.predicted.push_back(predict(params, build_projected_graph(net, link)));
      out.actual.push_back(*link.true_weight);
    }
  }
  return out;
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t group_index, int trial) {
  return derive_seed(derive_seed(master, group_index), static_cast<std::uint64_t>(trial));
}

TrialResult run_trial(const ExperimentGroup& group, const ExperimentConfig& cfg, std::uint64_t seed, int trial) {
  TrialResult res;
  res.group = group.label;
  res.trial = trial;
  res.seed = seed;
  try {
    auto manifest = make_manifest(group.generator, group.networks, derive_seed(seed, 0));
    manifest.p_range = group.p_range;
    manifest.k_choices = group.k_choices;
    const auto data = generate_dataset(manifest);
    const std::size_t n_train = manifest.train_count();
    if (n_train == 0 || n_train >= data.size()) throw Error("dataset too small for an 80/20 split");
    const std::span<const SpatialMultiplexNetwork> all(data);

    TrainConfig train = cfg.train;
    train.seed = derive_seed(seed, 1);
    const auto fitted = fit(all.first(n_train), train, cfg.loss);
    const auto links = evaluate_links(fitted.params, all.subspan(n_train));
    res.metrics = metrics(links.predicted, links.actual);
    double mean = 0.0;
    for (double v : links.predicted) mean += v;
    mean /= static_cast<double>(links.predicted.size());
    double ss = 0.0;
    for (double v : links.predicted) ss += (v - mean) * (v - mean);
    res.prediction_variance = ss / static_cast<double>(links.predicted.size());
    res.ok = true;
  } catch (const std::exception& e) {
    res.ok = false;
    res.error = e.what();
  }
  return res;
}

std::pair<double, double> mean_std(std::span<const double> values) {
  if (values.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

GroupSummary summarize(const ExperimentGroup& group, std::span<const TrialResult> trials) {
  GroupSummary s;
  s.label = group.label;
  s.network_type = to_string(group.generator.network_type);
  s.nodes = group.generator.num_nodes;
  s.layers = group.generator.num_layers;
  std::vector<double> mse, r, r2, mae;
  for (const auto& t : trials) {
    if (!t.ok || t.group != group.label) continue;
    ++s.completed;
    mse.push_back(t.metrics.mse);
    mae.push_back(t.metrics.mean_abs_error());
    if (t.metrics.pearson_r) r.push_back(*t.metrics.pearson_r);
    if (t.metrics.r_squared) r2.push_back(*t.metrics.r_squared);
  }
  std::tie(s.mse_mean, s.mse_std) = mean_std(mse);
  std::tie(s.r_mean, s.r_std) = mean_std(r);
  std::tie(s.r2_mean, s.r2_std) = mean_std(r2);
  std::tie(s.mae_mean, s.mae_std) = mean_std(mae);
  return s;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw Error("experiment needs at least one trial");
  std::map<std::string, std::size_t> index_of;
  for (std::size_t g = 0; g < cfg.groups.size(); ++g) {
    if (!index_of.emplace(cfg.groups[g].label, g).second) {
      throw Error("duplicate experiment group label '" + cfg.groups[g].label + "'");
    }
    const auto errors = config_errors(cfg.groups[g].generator);
    if (!errors.empty()) throw Error("group '" + cfg.groups[g].label + "': " + errors.front());
  }
  for (const auto& [a, b] : cfg.comparisons) {
    if (!index_of.count(a) || !index_of.count(b)) {
      throw Error("comparison references unknown group '" + (index_of.count(a) ? b : a) + "'");
    }
  }

  ExperimentReport report;
  for (std::size_t g = 0; g < cfg.groups.size(); ++g) {
    for (int t = 0; t < cfg.trials; ++t) {
      report.trials.push_back(run_trial(cfg.groups[g], cfg, trial_seed(cfg.seed, g, t), t));
    }
  }
  for (const auto& group : cfg.groups) report.groups.push_back(summarize(group, report.trials));

  auto collect = [&](const std::string& label, bool abs_errors) {
    std::vector<double> v;
    for (const auto& t : report.trials) {
      if (!t.ok || t.group != label) continue;
      if (abs_errors) {
        v.insert(v.end(), t.metrics.abs_errors.begin(), t.metrics.abs_errors.end());
      } else if (t.metrics.pearson_r) {
        v.push_back(*t.metrics.pearson_r);
      }
    }
    return v;
  };
  for (const auto& [a, b] : cfg.comparisons) {
    for (const bool abs_errors : {true, false}) {
      ComparisonResult c{a, b, abs_errors ? "abs_error" : "pearson_r", std::nullopt, ""};
      try {
        c.test = welch_ttest(collect(a, abs_errors), collect(b, abs_errors));
      } catch (const Error& e) {
        c.error = e.what();
      }
      report.comparisons.push_back(std::move(c));
    }
  }
  return report;
}

}  // namespace msgcn
