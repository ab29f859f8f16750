#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "msgcn/model.hpp"
#include "msgcn/synthgen.hpp"
#include "msgcn/train.hpp"

namespace msgcn {

// pearson_r and r_squared are empty when the actual values are constant.
struct MetricSet {
  double mse = 0.0;
  std::optional<double> pearson_r;
  std::optional<double> r_squared;
  std::vector<double> abs_errors;

  double mean_abs_error() const;
};

MetricSet metrics(std::span<const double> predicted, std::span<const double> actual);

// Regularized incomplete beta I_x(a, b), continued fraction evaluated to
// relative tolerance 1e-10 (plus double rounding).
double incomplete_beta(double a, double b, double x);

// Two-sided tail probability P(|T| >= |t|) for Student t with df degrees of
// freedom; df may be fractional.
double student_t_two_sided_p(double t, double df);

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

// Welch's unequal-variance t-test. Throws when either sample has fewer than
// two values or zero variance.
TTestResult welch_ttest(std::span<const double> a, std::span<const double> b);

struct LinkEvaluation {
  std::vector<double> predicted;
  std::vector<double> actual;
};

// Eval-mode predictions for every labelled candidate link of every network,
// pooled in network order.
LinkEvaluation evaluate_links(const ModelParams& params, std::span<const SpatialMultiplexNetwork> networks);

struct ExperimentGroup {
  std::string label;
  GeneratorConfig generator;
  std::size_t networks = 500;
  std::optional<std::pair<double, double>> p_range;
  std::vector<int> k_choices;
};

struct ExperimentConfig {
  std::vector<ExperimentGroup> groups;
  int trials = 25;
  std::uint64_t seed = 0;
  TrainConfig train;
  LossConfig loss;
  // Pairs of group labels compared with Welch t-tests.
  std::vector<std::pair<std::string, std::string>> comparisons;
};

struct TrialResult {
  std::string group;
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  MetricSet metrics;
  // Test-set variance of predictions.
  double prediction_variance = 0.0;
};

struct GroupSummary {
  std::string label;
  std::string network_type;
  int nodes = 0;
  int layers = 0;
  int completed = 0;
  double mse_mean = 0.0, mse_std = 0.0;
  double r_mean = 0.0, r_std = 0.0;
  double r2_mean = 0.0, r2_std = 0.0;
  double mae_mean = 0.0, mae_std = 0.0;
};

struct ComparisonResult {
  std::string group_a;
  std::string group_b;
  // "abs_error" pools every test-link absolute error of every trial;
  // "pearson_r" uses one value per trial.
  std::string quantity;
  std::optional<TTestResult> test;
  std::string error;
};

struct ExperimentReport {
  std::vector<TrialResult> trials;
  std::vector<GroupSummary> groups;
  std::vector<ComparisonResult> comparisons;
};

// Seed of trial `trial` in group `group_index`.
std::uint64_t trial_seed(std::uint64_t master, std::size_t group_index, int trial);

// Generates a fresh dataset for the trial, trains on the first 80 %, and
// scores the pooled candidate links of the remaining networks.
TrialResult run_trial(const ExperimentGroup& group, const ExperimentConfig& cfg, std::uint64_t seed, int trial);

// Mean and sample standard deviation of per-trial values (std 0 for one value).
std::pair<double, double> mean_std(std::span<const double> values);

GroupSummary summarize(const ExperimentGroup& group, std::span<const TrialResult> trials);

ExperimentReport run_experiment(const ExperimentConfig& cfg);

}  // namespace msgcn
