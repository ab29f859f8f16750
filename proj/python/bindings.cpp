#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "msgcn/error.hpp"
#include "msgcn/eval.hpp"
#include "msgcn/gradcheck.hpp"
#include "msgcn/io.hpp"
#include "msgcn/synthgen.hpp"
#include "msgcn/train.hpp"

namespace py = pybind11;
using namespace msgcn;

namespace {

GeneratorConfig make_config(const std::string& type, int nodes, int layers, double p, int k, std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.network_type = parse_network_type(type);
  cfg.num_nodes = nodes;
  cfg.num_layers = layers;
  cfg.p = p;
  cfg.k = k;
  cfg.seed = seed;
  const auto errors = config_errors(cfg);
  if (!errors.empty()) throw Error("invalid generator configuration: " + errors.front());
  return cfg;
}

py::dict metrics_dict(const MetricSet& m) {
  py::dict d;
  d["mse"] = m.mse;
  d["pearson_r"] = m.pearson_r ? py::cast(*m.pearson_r) : py::none();
  d["r_squared"] = m.r_squared ? py::cast(*m.r_squared) : py::none();
  d["mae"] = m.mean_abs_error();
  d["count"] = m.abs_errors.size();
  return d;
}

}  // namespace

PYBIND11_MODULE(_msgcn, m) {
  m.doc() = "Interlayer link weight prediction on spatial multiplex networks";

  // Translators run newest first, so the base class goes in first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  py::class_<SpatialMultiplexNetwork>(m, "Network")
      .def_readonly("num_layers", &SpatialMultiplexNetwork::num_layers)
      .def_property_readonly("num_nodes", &SpatialMultiplexNetwork::num_nodes)
      .def_property_readonly("positions",
                             [](const SpatialMultiplexNetwork& n) {
                               std::vector<std::pair<double, double>> out;
                               for (const auto& p : n.positions) out.emplace_back(p.x, p.y);
                               return out;
                             })
      .def_readonly("features", &SpatialMultiplexNetwork::features)
      .def_property_readonly("intra_edges",
                             [](const SpatialMultiplexNetwork& n) {
                               std::vector<std::tuple<int, int, int, double>> out;
                               for (const auto& e : n.intra_edges) out.emplace_back(e.layer, e.u, e.v, e.weight);
                               return out;
                             })
      .def_property_readonly("inter_edges",
                             [](const SpatialMultiplexNetwork& n) {
                               std::vector<std::tuple<int, int, int, int, double>> out;
                               for (const auto& e : n.inter_edges)
                                 out.emplace_back(e.layer_p, e.u, e.layer_q, e.v, e.weight);
                               return out;
                             })
      .def("validate",
           [](const SpatialMultiplexNetwork& n) {
             std::vector<std::pair<std::string, std::string>> out;
             for (const auto& v : validate(n)) out.emplace_back(v.invariant, v.detail);
             return out;
           })
      .def("to_json", &io::serialize_network)
      .def_static("from_json", [](const std::string& text) { return io::parse_network(text); })
      .def_static("load", [](const std::string& path) { return io::load_network(path); })
      .def("save", [](const SpatialMultiplexNetwork& n, const std::string& path) { io::save_network(path, n); })
      .def("__eq__", [](const SpatialMultiplexNetwork& a, const SpatialMultiplexNetwork& b) { return a == b; });

  m.def(
      "generate_network",
      [](const std::string& type, int nodes, int layers, double p, int k, std::uint64_t seed) {
        return generate_network(make_config(type, nodes, layers, p, k, seed));
      },
      py::arg("type"), py::arg("nodes"), py::arg("layers") = 2, py::arg("p") = 0.5, py::arg("k") = 2,
      py::arg("seed") = 0);

  m.def(
      "generate_dataset",
      [](const std::string& type, int nodes, std::size_t count, std::uint64_t seed, int layers, double p, int k) {
        return generate_dataset(make_manifest(make_config(type, nodes, layers, p, k, 0), count, seed));
      },
      py::arg("type"), py::arg("nodes"), py::arg("count"), py::arg("seed"), py::arg("layers") = 2,
      py::arg("p") = 0.5, py::arg("k") = 2);

  m.def("load_dataset", [](const std::string& dir, const std::string& split) {
    const io::Split s = split == "train" ? io::Split::train : split == "test" ? io::Split::test : io::Split::all;
    return io::load_dataset(dir, s);
  }, py::arg("dir"), py::arg("split") = "all");

  m.def("candidate_links", [](const SpatialMultiplexNetwork& net) {
    std::vector<std::tuple<int, int, int, int, std::optional<double>>> out;
    for (const auto& l : candidate_links(net))
      out.emplace_back(l.source_layer, l.source_node, l.target_layer, l.target_node, l.true_weight);
    return out;
  });

  py::class_<io::Checkpoint>(m, "Model")
      .def(py::init([](std::uint64_t seed, int hidden) { return io::Checkpoint{init_params(seed, hidden), {}, {}}; }),
           py::arg("seed") = 0, py::arg("hidden") = kDefaultHidden)
      .def_property_readonly("hidden", [](const io::Checkpoint& c) { return c.params.hidden(); })
      .def_property_readonly("parameter_count",
                             [](const io::Checkpoint& c) { return parameter_count(c.params.hidden()); })
      .def("save", [](const io::Checkpoint& c, const std::string& path) { io::save_checkpoint(path, c); })
      .def_static("load", [](const std::string& path) { return io::load_checkpoint(path); })
      .def("predict",
           [](const io::Checkpoint& c, const SpatialMultiplexNetwork& net) {
             std::vector<std::tuple<int, int, int, int, double>> out;
             for (const auto& p : predict_network(c.params, net))
               out.emplace_back(p.link.source_layer, p.link.source_node, p.link.target_layer, p.link.target_node,
                                p.predicted);
             return out;
           })
      .def("evaluate", [](const io::Checkpoint& c, const std::vector<SpatialMultiplexNetwork>& nets) {
        const auto links = evaluate_links(c.params, nets);
        return metrics_dict(metrics(links.predicted, links.actual));
      });

  m.def(
      "fit",
      [](const std::vector<SpatialMultiplexNetwork>& nets, int epochs, double lr, double dropout, int hidden,
         std::tuple<double, double, double> loss_weights, std::uint64_t seed) {
        TrainConfig t;
        t.epochs = epochs;
        t.learning_rate = lr;
        t.dropout = dropout;
        t.hidden_width = hidden;
        t.seed = seed;
        LossConfig l;
        std::tie(l.w_mse, l.w_spread, l.w_range) = loss_weights;
        FitResult res;
        {
          py::gil_scoped_release release;
          res = fit(nets, t, l);
        }
        std::vector<double> history;
        for (const auto& h : res.history) history.push_back(h.total);
        return std::pair{io::Checkpoint{res.params, t, res.loss_config}, history};
      },
      py::arg("networks"), py::arg("epochs") = TrainConfig{}.epochs, py::arg("lr") = TrainConfig{}.learning_rate,
      py::arg("dropout") = TrainConfig{}.dropout, py::arg("hidden") = kDefaultHidden,
      py::arg("loss_weights") = std::tuple{LossConfig{}.w_mse, LossConfig{}.w_spread, LossConfig{}.w_range},
      py::arg("seed") = 0);

  m.def("metrics", [](const std::vector<double>& predicted, const std::vector<double>& actual) {
    return metrics_dict(metrics(predicted, actual));
  });

  m.def("welch_ttest", [](const std::vector<double>& a, const std::vector<double>& b) {
    const auto r = welch_ttest(a, b);
    return std::tuple{r.t, r.df, r.p};
  });

  m.def("gradcheck", [](std::uint64_t seed, int instances) {
    GradCheckOptions opt;
    opt.instances = instances;
    return run_gradcheck(seed, opt).passed();
  }, py::arg("seed"), py::arg("instances") = GradCheckOptions{}.instances);

  m.def("cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "msgcn");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return std::tuple{code, out.str(), err.str()};
  });
}
