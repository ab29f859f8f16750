#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <functional>
#include <ostream>

#include "msgcn/error.hpp"
#include "msgcn/eval.hpp"
#include "msgcn/gradcheck.hpp"
#include "msgcn/io.hpp"
#include "msgcn/synthgen.hpp"
#include "msgcn/train.hpp"

namespace msgcn {

namespace {

namespace fs = std::filesystem;

struct GenerateArgs {
  std::string type;
  int nodes = 0;
  int layers = 2;
  std::size_t count = 0;
  std::optional<double> p;
  std::vector<double> p_range;
  std::optional<int> k;
  std::uint64_t seed = 0;
  std::string out;
};

struct TrainArgs {
  std::string data;
  TrainConfig train;
  std::vector<double> loss_weights{LossConfig{}.w_mse, LossConfig{}.w_spread, LossConfig{}.w_range};
  std::string out;
  std::string history;
};

struct EvaluateArgs {
  std::string model, data, out;
};

struct PredictArgs {
  std::string model, network, out;
};

struct ExperimentArgs {
  std::string config, out;
  std::optional<int> trials;
};

struct IngestArgs {
  std::string stations, boardings, intra, cross, date, out;
};

struct GradcheckArgs {
  std::uint64_t seed = 0;
  int instances = GradCheckOptions{}.instances;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  GeneratorConfig cfg;
  cfg.network_type = parse_network_type(a.type);
  cfg.num_nodes = a.nodes;
  cfg.num_layers = a.layers;
  if (a.p) cfg.p = *a.p;
  if (a.count == 0) throw Error("--count must be positive");

  auto manifest = make_manifest(cfg, a.count, a.seed);
  if (!a.p_range.empty()) {
    const double lo = a.p_range[0], hi = a.p_range[1];
    if (!(lo >= 0.0 && lo <= hi && hi <= 1.0)) throw Error("--p-range needs 0 <= A <= B <= 1");
    manifest.p_range = std::pair{lo, hi};
    cfg.p = lo;
  }
  if (cfg.network_type == NetworkType::small_world) {
    if (a.k) {
      cfg.k = *a.k;
    } else {
      for (int k : {2, 4}) {
        if (k < cfg.num_nodes) manifest.k_choices.push_back(k);
      }
      if (!manifest.k_choices.empty()) cfg.k = manifest.k_choices.front();
    }
  }
  manifest.config = cfg;
  const auto errors = config_errors(cfg);
  if (!errors.empty()) {
    std::string msg = "invalid generator configuration:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw Error(msg);
  }
  io::write_synthetic_dataset(a.out, manifest);
  out << "wrote " << a.count << " networks (" << manifest.train_count() << " train, "
      << a.count - manifest.train_count() << " test) to " << a.out << "\n";
  return 0;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const auto& t = a.train;
  if (t.epochs < 1) throw Error("--epochs must be at least 1");
  if (t.hidden_width < 1) throw Error("--hidden must be at least 1");
  if (!(t.dropout >= 0.0 && t.dropout < 1.0)) throw Error("--dropout must lie in [0, 1)");
  if (!(t.learning_rate > 0.0 && std::isfinite(t.learning_rate))) throw Error("--lr must be positive");
  for (double w : a.loss_weights) {
    if (!(w >= 0.0 && std::isfinite(w))) throw Error("--loss-weights must be finite and non-negative");
  }
  LossConfig loss_cfg;
  loss_cfg.w_mse = a.loss_weights[0];
  loss_cfg.w_spread = a.loss_weights[1];
  loss_cfg.w_range = a.loss_weights[2];

  const auto nets = io::load_dataset(a.data, io::Split::train);
  const auto result = fit(nets, t, loss_cfg);
  if (!all_finite(result.params)) throw Error("training diverged (non-finite parameters)");

  io::save_checkpoint(a.out, {result.params, t, result.loss_config});
  fs::path history = a.history;
  if (history.empty()) history = fs::path(a.out).replace_extension("loss.csv");
  io::write_file_atomic(history, io::loss_history_csv(result.history));
  out << "trained on " << nets.size() << " networks; final loss " << io::format_double(result.history.back().total)
      << "\ncheckpoint " << a.out << "\nloss history " << history.string() << "\n";
  return 0;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const auto ckpt = io::load_checkpoint(a.model);
  const auto nets = io::load_dataset(a.data, io::Split::test);
  const auto links = evaluate_links(ckpt.params, nets);
  if (links.actual.size() < 2) throw Error("evaluation needs at least two labelled links");
  const auto m = metrics(links.predicted, links.actual);
  const auto csv = io::metrics_csv(m, links.actual.size());
  io::write_file_atomic(a.out, csv);
  out << csv;
  return 0;
}

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const auto ckpt = io::load_checkpoint(a.model);
  const auto net = io::load_network(a.network);
  const auto predictions = predict_network(ckpt.params, net);
  io::write_file_atomic(a.out, io::predictions_csv(predictions));
  out << "wrote " << predictions.size() << " predictions to " << a.out << "\n";
  return 0;
}

int cmd_experiment(const ExperimentArgs& a, std::ostream& out) {
  auto cfg = io::parse_experiment_config(io::read_file(a.config), a.config);
  if (a.trials) cfg.trials = *a.trials;
  const auto report = run_experiment(cfg);
  io::write_report(a.out, report);
  for (const auto& g : report.groups) {
    out << g.label << ": " << g.completed << " trials, mse " << io::format_double(g.mse_mean) << ", r "
        << io::format_double(g.r_mean) << ", mae " << io::format_double(g.mae_mean) << "\n";
  }
  int failed = 0;
  for (const auto& t : report.trials) failed += t.ok ? 0 : 1;
  if (failed) out << failed << " trial(s) failed; see trials.csv\n";
  out << "report written to " << a.out << "\n";
  return 0;
}

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
  const auto tables = io::read_temporal_tables(a.stations, a.boardings, a.intra, a.cross);
  const auto nets = io::ingest_temporal(tables, a.date);
  io::write_network_directory(a.out, nets, "temporal");
  out << "wrote " << nets.size() << " networks to " << a.out << "\n";
  return 0;
}

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  GradCheckOptions opt;
  opt.instances = a.instances;
  if (opt.instances < 1) throw Error("--instances must be positive");
  const auto report = run_gradcheck(a.seed, opt);
  out << report.format();
  return report.passed() ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatial multiplex graph convolution: interlayer link weight prediction"};
  app.name("msgcn");
  app.require_subcommand(1);

  std::function<int()> action;

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a synthetic dataset directory");
  g->add_option("--type", gen.type, "complete, random or small-world")->required();
  g->add_option("--nodes", gen.nodes, "Nodes per layer")->required();
  g->add_option("--layers", gen.layers, "Layers (2 or 3)");
  g->add_option("--count", gen.count, "Number of networks")->required();
  auto* p_opt = g->add_option("--p", gen.p, "Edge or shortcut probability");
  auto* pr_opt = g->add_option("--p-range", gen.p_range, "Draw p uniformly from A,B per network")
                     ->delimiter(',')
                     ->expected(2);
  p_opt->excludes(pr_opt);
  g->add_option("--k", gen.k, "Ring neighbours (small world); default draws from {2,4}");
  g->add_option("--seed", gen.seed, "Master seed")->required();
  g->add_option("--out", gen.out, "Output directory")->required();
  g->callback([&] { action = [&] { return cmd_generate(gen, out); }; });

  TrainArgs tr;
  std::string weights_text;
  auto* t = app.add_subcommand("train", "Train a model on the train split of a dataset");
  t->add_option("--data", tr.data, "Dataset directory")->required();
  t->add_option("--epochs", tr.train.epochs, "Epochs")->capture_default_str();
  t->add_option("--hidden", tr.train.hidden_width, "Hidden width")->capture_default_str();
  t->add_option("--dropout", tr.train.dropout, "Dropout rate between the convolutions")->capture_default_str();
  t->add_option("--lr", tr.train.learning_rate, "Adam learning rate")->capture_default_str();
  t->add_option("--loss-weights", tr.loss_weights, "w_mse,w_spread,w_range")
      ->delimiter(',')
      ->expected(3)
      ->capture_default_str();
  t->add_option("--seed", tr.train.seed, "Training seed")->required();
  t->add_option("--out", tr.out, "Checkpoint path")->required();
  t->add_option("--history", tr.history, "Loss history CSV (default: checkpoint path with .loss.csv)");
  t->callback([&] { action = [&] { return cmd_train(tr, out); }; });

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Score a checkpoint on the test split of a dataset");
  e->add_option("--model", ev.model, "Checkpoint")->required();
  e->add_option("--data", ev.data, "Dataset directory")->required();
  e->add_option("--out", ev.out, "Metrics CSV")->required();
  e->callback([&] { action = [&] { return cmd_evaluate(ev, out); }; });

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "Predict every candidate interlayer link of one network");
  p->add_option("--model", pr.model, "Checkpoint")->required();
  p->add_option("--network", pr.network, "Network JSON file")->required();
  p->add_option("--out", pr.out, "Predictions CSV")->required();
  p->callback([&] { action = [&] { return cmd_predict(pr, out); }; });

  ExperimentArgs ex;
  auto* x = app.add_subcommand("experiment", "Run repeated trials over groups and compare them");
  x->add_option("--config", ex.config, "Experiment config file")->required();
  x->add_option("--out", ex.out, "Report directory")->required();
  x->add_option("--trials", ex.trials, "Override the trial count");
  x->callback([&] { action = [&] { return cmd_experiment(ex, out); }; });

  IngestArgs in;
  auto* i = app.add_subcommand("ingest-temporal", "Build two-layer networks from passenger flow tables");
  i->add_option("--stations", in.stations, "Stations CSV")->required();
  i->add_option("--boardings", in.boardings, "Boardings CSV")->required();
  i->add_option("--intra", in.intra, "Within-interval flows CSV")->required();
  i->add_option("--cross", in.cross, "Cross-interval flows CSV")->required();
  i->add_option("--date", in.date, "Date to ingest")->required();
  i->add_option("--out", in.out, "Output directory")->required();
  i->callback([&] { action = [&] { return cmd_ingest(in, out); }; });

  GradcheckArgs gc;
  auto* c = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  c->add_option("--seed", gc.seed, "Seed")->required();
  c->add_option("--instances", gc.instances, "Random instances")->capture_default_str();
  c->callback([&] { action = [&] { return cmd_gradcheck(gc, out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& ex_) {
    err << "error: " << ex_.what() << "\n\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return 2;
  }

  try {
    return action();
  } catch (const std::exception& ex_) {
    err << "error: " << ex_.what() << "\n";
    return 1;
  }
}

}  // namespace msgcn
