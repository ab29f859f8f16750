#include "msgcn/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "msgcn/error.hpp"

namespace msgcn::io {

namespace fs = std::filesystem;
using nlohmann::json;

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw Error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
}

// Typed field access with "source: path: message" errors.
class Reader {
 public:
  Reader(const json& j, std::string source, std::string path) : j_(j), source_(std::move(source)), path_(std::move(path)) {}

  Reader at(const std::string& key) const {
    if (!j_.is_object()) fail("expected an object");
    auto it = j_.find(key);
    if (it == j_.end()) throw ParseError(source_ + ": " + path_ + ": missing field '" + key + "'");
    return Reader(*it, source_, path_ + "." + key);
  }
  Reader at(std::size_t i) const { return Reader(j_.at(i), source_, path_ + "[" + std::to_string(i) + "]"); }
  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }
  bool is_null() const { return j_.is_null(); }

  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }
  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }
  long long integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<long long>();
  }
  std::uint64_t uint64() const {
    if (!j_.is_number_unsigned() && !(j_.is_number_integer() && j_.get<long long>() >= 0)) {
      fail("expected a non-negative integer");
    }
    return j_.get<std::uint64_t>();
  }
  int int32() const { return static_cast<int>(integer()); }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(source_ + ": " + path_ + ": " + msg); }

 private:
  const json& j_;
  std::string source_;
  std::string path_;
};

}  // namespace

// ---- networks ---------------------------------------------------------------

std::string serialize_network(const SpatialMultiplexNetwork& net) {
  json j;
  j["format_version"] = kNetworkFormatVersion;
  j["num_layers"] = net.num_layers;
  json nodes = json::array();
  for (std::size_t i = 0; i < net.num_nodes(); ++i) {
    nodes.push_back({{"id", i}, {"x", net.positions[i].x}, {"y", net.positions[i].y}});
  }
  j["nodes"] = std::move(nodes);
  j["features"] = net.features;
  json intra = json::array();
  for (const auto& e : net.intra_edges) intra.push_back({{"layer", e.layer}, {"u", e.u}, {"v", e.v}, {"w", e.weight}});
  j["intra_edges"] = std::move(intra);
  json inter = json::array();
  for (const auto& e : net.inter_edges) {
    inter.push_back({{"lp", e.layer_p}, {"u", e.u}, {"lq", e.layer_q}, {"v", e.v}, {"w", e.weight}});
  }
  j["inter_edges"] = std::move(inter);
  return j.dump(1) + "\n";
}

SpatialMultiplexNetwork parse_network(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  const Reader root(j, source, "network");
  const auto version = root.at("format_version").integer();
  if (version != kNetworkFormatVersion) {
    root.at("format_version").fail("unsupported version " + std::to_string(version));
  }
  SpatialMultiplexNetwork net;
  net.num_layers = root.at("num_layers").int32();

  const auto nodes = root.at("nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto n = nodes.at(i);
    if (n.at("id").integer() != static_cast<long long>(i)) n.at("id").fail("node ids must be dense 0..M-1 in order");
    net.positions.push_back({n.at("x").number(), n.at("y").number()});
  }
  const auto features = root.at("features");
  for (std::size_t l = 0; l < features.size(); ++l) {
    const auto layer = features.at(l);
    std::vector<double> values;
    for (std::size_t i = 0; i < layer.size(); ++i) values.push_back(layer.at(i).number());
    net.features.push_back(std::move(values));
  }
  const auto intra = root.at("intra_edges");
  for (std::size_t k = 0; k < intra.size(); ++k) {
    const auto e = intra.at(k);
    net.intra_edges.push_back({e.at("layer").int32(), e.at("u").int32(), e.at("v").int32(), e.at("w").number()});
  }
  const auto inter = root.at("inter_edges");
  for (std::size_t k = 0; k < inter.size(); ++k) {
    const auto e = inter.at(k);
    net.inter_edges.push_back(
        {e.at("lp").int32(), e.at("u").int32(), e.at("lq").int32(), e.at("v").int32(), e.at("w").number()});
  }

  const auto violations = validate(net);
  if (!violations.empty()) {
    throw ValidationError(source + ": invalid network:\n" + format_violations(violations));
  }
  return net;
}

void save_network(const fs::path& path, const SpatialMultiplexNetwork& net) {
  const auto violations = validate(net);
  if (!violations.empty()) throw ValidationError("refusing to save invalid network:\n" + format_violations(violations));
  write_file_atomic(path, serialize_network(net));
}

SpatialMultiplexNetwork load_network(const fs::path& path) { return parse_network(read_file(path), path.string()); }

// ---- dataset directories ----------------------------------------------------

namespace {

std::string network_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "network_%05zu.json", index);
  return buf;
}

json generator_json(const GeneratorConfig& c) {
  return {{"type", to_string(c.network_type)}, {"nodes", c.num_nodes}, {"layers", c.num_layers}, {"p", c.p},
          {"k", c.k}};
}

}  // namespace

void write_synthetic_dataset(const fs::path& dir, const DatasetManifest& manifest) {
  fs::create_directories(dir);
  json m;
  m["format_version"] = kManifestFormatVersion;
  m["source"] = "synthetic";
  m["config"] = generator_json(manifest.config);
  m["p_range"] = manifest.p_range ? json{manifest.p_range->first, manifest.p_range->second} : json(nullptr);
  m["k_choices"] = manifest.k_choices;
  m["master_seed"] = manifest.master_seed;
  m["count"] = manifest.count;
  m["train_count"] = manifest.train_count();
  json entries = json::array();
  const auto nets = generate_dataset(manifest);
  for (std::size_t i = 0; i < nets.size(); ++i) {
    const auto name = network_file_name(i);
    save_network(dir / name, nets[i]);
    const auto cfg = resolve_config(manifest, i);
    entries.push_back({{"file", name},
                       {"split", i < manifest.train_count() ? "train" : "test"},
                       {"seed", manifest.seeds[i]},
                       {"p", cfg.p},
                       {"k", cfg.k}});
  }
  m["networks"] = std::move(entries);
  write_file_atomic(dir / "manifest.json", m.dump(1) + "\n");
}

void write_network_directory(const fs::path& dir, const std::vector<SpatialMultiplexNetwork>& nets,
                             const std::string& source) {
  fs::create_directories(dir);
  json m;
  m["format_version"] = kManifestFormatVersion;
  m["source"] = source;
  m["count"] = nets.size();
  json entries = json::array();
  for (std::size_t i = 0; i < nets.size(); ++i) {
    const auto name = network_file_name(i);
    save_network(dir / name, nets[i]);
    entries.push_back({{"file", name}, {"split", ""}});
  }
  m["networks"] = std::move(entries);
  write_file_atomic(dir / "manifest.json", m.dump(1) + "\n");
}

DatasetIndex read_dataset_index(const fs::path& dir) {
  const auto path = dir / "manifest.json";
  const json j = parse_json(read_file(path), path.string());
  const Reader root(j, path.string(), "manifest");
  if (root.at("format_version").integer() != kManifestFormatVersion) root.fail("unsupported manifest version");
  DatasetIndex idx;
  idx.source = root.at("source").string();
  const auto nets = root.at("networks");
  for (std::size_t i = 0; i < nets.size(); ++i) {
    const auto e = nets.at(i);
    DatasetEntry entry;
    entry.file = e.at("file").string();
    entry.split = e.at("split").string();
    if (e.has("seed")) entry.seed = e.at("seed").uint64();
    idx.entries.push_back(std::move(entry));
  }
  return idx;
}

std::vector<SpatialMultiplexNetwork> load_dataset(const fs::path& dir, Split split) {
  const auto idx = read_dataset_index(dir);
  const bool unsplit = std::all_of(idx.entries.begin(), idx.entries.end(), [](const auto& e) { return e.split.empty(); });
  std::vector<SpatialMultiplexNetwork> out;
  for (const auto& e : idx.entries) {
    const bool keep = unsplit || split == Split::all || (split == Split::train && e.split == "train") ||
                      (split == Split::test && e.split == "test");
    if (keep) out.push_back(load_network(dir / e.file));
  }
  return out;
}

// ---- checkpoints ------------------------------------------------------------

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  const int hidden = ckpt.params.hidden();
  const Eigen::VectorXd flat = flatten(ckpt.params);
  json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["architecture"] = {{"input_dim", 1}, {"hidden", hidden}, {"conv_layers", 2}};
  json tensors = json::array();
  for (const auto& slot : tensor_layout(hidden)) {
    const std::size_t n = static_cast<std::size_t>(slot.rows) * slot.cols;
    std::vector<double> data(flat.data() + slot.offset, flat.data() + slot.offset + n);
    tensors.push_back({{"name", slot.name}, {"shape", {slot.rows, slot.cols}}, {"order", "column_major"}, {"data", data}});
  }
  j["tensors"] = std::move(tensors);
  const auto& t = ckpt.train;
  j["train_config"] = {{"epochs", t.epochs},     {"learning_rate", t.learning_rate}, {"dropout", t.dropout},
                       {"hidden_width", t.hidden_width}, {"beta1", t.beta1},   {"beta2", t.beta2},
                       {"adam_epsilon", t.adam_epsilon}, {"seed", t.seed}};
  const auto& l = ckpt.loss;
  j["loss_config"] = {{"w_mse", l.w_mse},     {"w_spread", l.w_spread}, {"w_range", l.w_range},
                      {"epsilon", l.epsilon}, {"y_range", l.y_range}};
  return j.dump(1) + "\n";
}

Checkpoint parse_checkpoint(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  const Reader root(j, source, "checkpoint");
  if (root.at("format_version").integer() != kCheckpointFormatVersion) {
    root.at("format_version").fail("unsupported checkpoint version");
  }
  const int hidden = root.at("architecture").at("hidden").int32();
  if (hidden < 1) root.at("architecture").at("hidden").fail("must be positive");
  const auto layout = tensor_layout(hidden);
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count(hidden)));
  const auto tensors = root.at("tensors");
  if (tensors.size() != layout.size()) tensors.fail("expected " + std::to_string(layout.size()) + " tensors");
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const auto t = tensors.at(k);
    const auto& slot = layout[k];
    if (t.at("name").string() != slot.name) t.at("name").fail("expected tensor '" + slot.name + "'");
    const auto shape = t.at("shape");
    if (shape.size() != 2 || shape.at(0).int32() != slot.rows || shape.at(1).int32() != slot.cols) {
      shape.fail("shape mismatch for " + slot.name);
    }
    const auto data = t.at("data");
    const std::size_t n = static_cast<std::size_t>(slot.rows) * slot.cols;
    if (data.size() != n) data.fail("expected " + std::to_string(n) + " values");
    for (std::size_t i = 0; i < n; ++i) flat[static_cast<Eigen::Index>(slot.offset + i)] = data.at(i).number();
  }
  Checkpoint c;
  c.params = unflatten(flat, hidden);
  const auto tc = root.at("train_config");
  c.train.epochs = tc.at("epochs").int32();
  c.train.learning_rate = tc.at("learning_rate").number();
  c.train.dropout = tc.at("dropout").number();
  c.train.hidden_width = tc.at("hidden_width").int32();
  c.train.beta1 = tc.at("beta1").number();
  c.train.beta2 = tc.at("beta2").number();
  c.train.adam_epsilon = tc.at("adam_epsilon").number();
  c.train.seed = tc.at("seed").uint64();
  const auto lc = root.at("loss_config");
  c.loss.w_mse = lc.at("w_mse").number();
  c.loss.w_spread = lc.at("w_spread").number();
  c.loss.w_range = lc.at("w_range").number();
  c.loss.epsilon = lc.at("epsilon").number();
  c.loss.y_range = lc.at("y_range").number();
  return c;
}

void save_checkpoint(const fs::path& path, const Checkpoint& ckpt) { write_file_atomic(path, serialize_checkpoint(ckpt)); }

Checkpoint load_checkpoint(const fs::path& path) { return parse_checkpoint(read_file(path), path.string()); }

// ---- CSV --------------------------------------------------------------------

std::size_t CsvTable::column(const std::string& name, const std::string& source) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ParseError(source + ": missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line, const std::string& where) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"' && cur.empty() && !was_quoted) {
      quoted = was_quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur += ch;
    }
  }
  if (quoted) throw ParseError(where + ": unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

std::string quote_csv(const std::string& field) {
  if (field.find_first_of(",\"") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(line_no);
    auto fields = split_csv_line(line, where);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw ParseError(where + ": expected " + std::to_string(t.header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw ParseError(source + ": empty CSV (no header)");
  return t;
}

CsvTable read_csv(const fs::path& path) { return parse_csv(read_file(path), path.string()); }

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += quote_csv(row[i]);
    }
    out += '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) emit(r);
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

}  // namespace

std::string loss_history_csv(const std::vector<LossBreakdown>& history) {
  CsvTable t{{"epoch", "total", "mse", "spread", "range_penalty"}, {}};
  for (std::size_t e = 0; e < history.size(); ++e) {
    const auto& h = history[e];
    t.rows.push_back({std::to_string(e + 1), format_double(h.total), format_double(h.mse), format_double(h.spread),
                      format_double(h.range_penalty)});
  }
  return to_csv(t);
}

std::string metrics_csv(const MetricSet& m, std::size_t count) {
  CsvTable t{{"count", "mse", "pearson_r", "r_squared", "mae"}, {}};
  t.rows.push_back({std::to_string(count), format_double(m.mse), format_optional(m.pearson_r),
                    format_optional(m.r_squared), format_double(m.mean_abs_error())});
  return to_csv(t);
}

std::string predictions_csv(const std::vector<LinkPrediction>& predictions) {
  CsvTable t{{"source_layer", "source_node", "target_layer", "target_node", "predicted", "true_weight"}, {}};
  for (const auto& p : predictions) {
    t.rows.push_back({std::to_string(p.link.source_layer), std::to_string(p.link.source_node),
                      std::to_string(p.link.target_layer), std::to_string(p.link.target_node),
                      format_double(p.predicted), format_optional(p.link.true_weight)});
  }
  return to_csv(t);
}

void write_report(const fs::path& dir, const ExperimentReport& report) {
  fs::create_directories(dir);
  CsvTable trials{{"group", "trial", "seed", "status", "links", "mse", "pearson_r", "r_squared", "mae",
                   "prediction_variance", "error"},
                  {}};
  CsvTable errors{{"group", "trial", "abs_error"}, {}};
  for (const auto& t : report.trials) {
    trials.rows.push_back({t.group, std::to_string(t.trial), std::to_string(t.seed), t.ok ? "ok" : "failed",
                           std::to_string(t.metrics.abs_errors.size()), t.ok ? format_double(t.metrics.mse) : "NA",
                           format_optional(t.metrics.pearson_r), format_optional(t.metrics.r_squared),
                           t.ok ? format_double(t.metrics.mean_abs_error()) : "NA",
                           t.ok ? format_double(t.prediction_variance) : "NA", t.error});
    for (double e : t.metrics.abs_errors) errors.rows.push_back({t.group, std::to_string(t.trial), format_double(e)});
  }
  CsvTable groups{{"group", "network_type", "nodes", "layers", "completed", "mse_mean", "mse_std", "r_mean", "r_std",
                   "r2_mean", "r2_std", "mae_mean", "mae_std"},
                  {}};
  for (const auto& g : report.groups) {
    groups.rows.push_back({g.label, g.network_type, std::to_string(g.nodes), std::to_string(g.layers),
                           std::to_string(g.completed), format_double(g.mse_mean), format_double(g.mse_std),
                           format_double(g.r_mean), format_double(g.r_std), format_double(g.r2_mean),
                           format_double(g.r2_std), format_double(g.mae_mean), format_double(g.mae_std)});
  }
  CsvTable tests{{"group_a", "group_b", "quantity", "t", "df", "p", "error"}, {}};
  for (const auto& c : report.comparisons) {
    tests.rows.push_back({c.group_a, c.group_b, c.quantity, c.test ? format_double(c.test->t) : "NA",
                          c.test ? format_double(c.test->df) : "NA", c.test ? format_double(c.test->p) : "NA",
                          c.error});
  }
  write_file_atomic(dir / "trials.csv", to_csv(trials));
  write_file_atomic(dir / "groups.csv", to_csv(groups));
  write_file_atomic(dir / "ttests.csv", to_csv(tests));
  write_file_atomic(dir / "abs_errors.csv", to_csv(errors));
}

// ---- experiment config ------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

template <typename T>
T parse_number(const std::string& text, const std::string& where) {
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars for double is unavailable on older toolchains.
    try {
      std::size_t used = 0;
      value = std::stod(text, &used);
      if (used != text.size()) throw ParseError(where + ": trailing characters in '" + text + "'");
    } catch (const std::logic_error&) {
      throw ParseError(where + ": expected a number, got '" + text + "'");
    }
  } else {
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) throw ParseError(where + ": expected an integer, got '" + text + "'");
  }
  return value;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& source) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  ExperimentGroup* group = nullptr;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto where = source + ":" + std::to_string(line_no);
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(where + ": unterminated section header");
      const auto inner = trim(line.substr(1, line.size() - 2));
      if (inner.rfind("group", 0) != 0) throw ParseError(where + ": unknown section '" + inner + "'");
      const auto label = trim(inner.substr(5));
      if (label.empty()) throw ParseError(where + ": group needs a label");
      cfg.groups.push_back({});
      group = &cfg.groups.back();
      group->label = label;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (group == nullptr) {
      if (key == "trials") cfg.trials = parse_number<int>(value, where);
      else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(value, where);
      else if (key == "epochs") cfg.train.epochs = parse_number<int>(value, where);
      else if (key == "lr") cfg.train.learning_rate = parse_number<double>(value, where);
      else if (key == "dropout") cfg.train.dropout = parse_number<double>(value, where);
      else if (key == "hidden") cfg.train.hidden_width = parse_number<int>(value, where);
      else if (key == "epsilon") cfg.loss.epsilon = parse_number<double>(value, where);
      else if (key == "loss_weights") {
        const auto parts = split_list(value);
        if (parts.size() != 3) throw ParseError(where + ": loss_weights needs three values");
        cfg.loss.w_mse = parse_number<double>(parts[0], where);
        cfg.loss.w_spread = parse_number<double>(parts[1], where);
        cfg.loss.w_range = parse_number<double>(parts[2], where);
      } else if (key == "compare") {
        const auto parts = split_list(value);
        if (parts.size() != 2) throw ParseError(where + ": compare needs two group labels");
        cfg.comparisons.emplace_back(parts[0], parts[1]);
      } else {
        throw ParseError(where + ": unknown key '" + key + "'");
      }
      continue;
    }
    auto& g = group->generator;
    if (key == "type") {
      try {
        g.network_type = parse_network_type(value);
      } catch (const Error& e) {
        throw ParseError(where + ": " + e.what());
      }
    } else if (key == "nodes") g.num_nodes = parse_number<int>(value, where);
    else if (key == "layers") g.num_layers = parse_number<int>(value, where);
    else if (key == "networks") group->networks = parse_number<std::size_t>(value, where);
    else if (key == "p") g.p = parse_number<double>(value, where);
    else if (key == "k") g.k = parse_number<int>(value, where);
    else if (key == "p_range") {
      const auto parts = split_list(value);
      if (parts.size() != 2) throw ParseError(where + ": p_range needs two values");
      group->p_range = std::pair{parse_number<double>(parts[0], where), parse_number<double>(parts[1], where)};
    } else if (key == "k_choices") {
      for (const auto& part : split_list(value)) group->k_choices.push_back(parse_number<int>(part, where));
    } else {
      throw ParseError(where + ": unknown group key '" + key + "'");
    }
  }
  if (cfg.groups.empty()) throw ParseError(source + ": no [group ...] sections");
  return cfg;
}

// ---- temporal flow tables ---------------------------------------------------

namespace {

long long parse_count(const std::string& text, const std::string& where) {
  const auto v = parse_number<long long>(text, where);
  if (v < 0) throw ParseError(where + ": passenger counts must be non-negative");
  return v;
}

std::vector<Flow> read_flows(const fs::path& path) {
  const auto t = read_csv(path);
  const auto src = path.string();
  const auto c_date = t.column("date", src), c_int = t.column("interval_index", src), c_o = t.column("origin", src),
             c_d = t.column("dest", src), c_p = t.column("passengers", src);
  std::vector<Flow> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto where = src + ": row " + std::to_string(r + 1);
    out.push_back({row[c_date], parse_number<int>(row[c_int], where), row[c_o], row[c_d], parse_count(row[c_p], where)});
  }
  return out;
}

}  // namespace

TemporalFlowTables read_temporal_tables(const fs::path& stations, const fs::path& boardings, const fs::path& intra,
                                        const fs::path& cross) {
  TemporalFlowTables out;
  {
    const auto t = read_csv(stations);
    const auto src = stations.string();
    const auto c_id = t.column("station_id", src), c_name = t.column("name", src), c_x = t.column("x", src),
               c_y = t.column("y", src);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto& row = t.rows[r];
      const auto where = src + ": row " + std::to_string(r + 1);
      out.stations.push_back({row[c_id], row[c_name], parse_number<double>(row[c_x], where),
                              parse_number<double>(row[c_y], where)});
    }
  }
  {
    const auto t = read_csv(boardings);
    const auto src = boardings.string();
    const auto c_date = t.column("date", src), c_int = t.column("interval_index", src),
               c_st = t.column("station_id", src), c_b = t.column("boardings", src);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto& row = t.rows[r];
      const auto where = src + ": row " + std::to_string(r + 1);
      out.boardings.push_back(
          {row[c_date], parse_number<int>(row[c_int], where), row[c_st], parse_count(row[c_b], where)});
    }
  }
  out.intra_flows = read_flows(intra);
  out.cross_flows = read_flows(cross);
  return out;
}

std::vector<SpatialMultiplexNetwork> ingest_temporal(const TemporalFlowTables& tables, const std::string& date) {
  std::map<std::string, std::size_t> station_index;
  for (std::size_t s = 0; s < tables.stations.size(); ++s) {
    if (!station_index.emplace(tables.stations[s].id, s).second) {
      throw Error("duplicate station id '" + tables.stations[s].id + "'");
    }
  }
  auto lookup = [&](const std::string& id, const char* table) {
    const auto it = station_index.find(id);
    if (it == station_index.end()) throw Error(std::string(table) + " references unknown station '" + id + "'");
    return it->second;
  };

  std::set<int> intervals;
  std::map<std::pair<int, std::size_t>, long long> boarding;
  for (const auto& b : tables.boardings) {
    if (b.date != date) continue;
    intervals.insert(b.interval);
    if (!boarding.emplace(std::pair{b.interval, lookup(b.station, "boardings")}, b.boardings).second) {
      throw Error("duplicate boardings row for station '" + b.station + "' interval " + std::to_string(b.interval));
    }
  }
  // interval -> (min station, max station) -> undirected passenger total
  std::map<int, std::map<std::pair<std::size_t, std::size_t>, long long>> intra;
  for (const auto& f : tables.intra_flows) {
    if (f.date != date) continue;
    intervals.insert(f.interval);
    const auto a = lookup(f.origin, "intra_flows");
    const auto b = lookup(f.dest, "intra_flows");
    if (a == b) continue;
    intra[f.interval][{std::min(a, b), std::max(a, b)}] += f.passengers;
  }
  std::map<int, std::map<std::pair<std::size_t, std::size_t>, long long>> cross;
  for (const auto& f : tables.cross_flows) {
    if (f.date != date) continue;
    intervals.insert(f.interval);
    intervals.insert(f.interval + 1);
    cross[f.interval][{lookup(f.origin, "cross_flows"), lookup(f.dest, "cross_flows")}] += f.passengers;
  }
  if (intervals.empty()) throw Error("no rows for date '" + date + "'");
  if (*intervals.rbegin() - *intervals.begin() + 1 != static_cast<int>(intervals.size())) {
    throw Error("intervals for date '" + date + "' are not contiguous");
  }

  std::vector<SpatialMultiplexNetwork> out;
  for (int t = *intervals.begin(); t < *intervals.rbegin(); ++t) {
    const int layer_t[2] = {t, t + 1};
    std::vector<long long> activity(tables.stations.size(), 0);
    for (int l = 0; l < 2; ++l) {
      for (std::size_t s = 0; s < tables.stations.size(); ++s) {
        const auto it = boarding.find({layer_t[l], s});
        if (it != boarding.end()) activity[s] += it->second;
      }
      for (const auto& [pair, n] : intra[layer_t[l]]) {
        activity[pair.first] += n;
        activity[pair.second] += n;
      }
    }
    for (const auto& [pair, n] : cross[t]) {
      activity[pair.first] += n;
      activity[pair.second] += n;
    }

    std::vector<std::size_t> kept;
    std::vector<int> local(tables.stations.size(), -1);
    for (std::size_t s = 0; s < tables.stations.size(); ++s) {
      if (activity[s] > 0) {
        local[s] = static_cast<int>(kept.size());
        kept.push_back(s);
      }
    }
    if (kept.empty()) throw Error("no station has passenger flow in intervals " + std::to_string(t) + "-" +
                                  std::to_string(t + 1));

    SpatialMultiplexNetwork net;
    net.num_layers = 2;
    for (std::size_t s : kept) net.positions.push_back({tables.stations[s].x, tables.stations[s].y});
    net.features.assign(2, std::vector<double>(kept.size()));
    for (int l = 0; l < 2; ++l) {
      for (std::size_t k = 0; k < kept.size(); ++k) {
        const auto it = boarding.find({layer_t[l], kept[k]});
        if (it == boarding.end()) {
          throw Error("missing boardings row for station '" + tables.stations[kept[k]].id + "' interval " +
                      std::to_string(layer_t[l]));
        }
        net.features[l][k] = static_cast<double>(it->second);
      }
      for (const auto& [pair, n] : intra[layer_t[l]]) {
        if (n <= 0 || local[pair.first] < 0 || local[pair.second] < 0) continue;
        net.intra_edges.push_back({l, local[pair.first], local[pair.second], static_cast<double>(n)});
      }
    }
    const auto& cross_t = cross[t];
    for (std::size_t i = 0; i < kept.size(); ++i) {
      for (std::size_t j = 0; j < kept.size(); ++j) {
        const auto it = cross_t.find({kept[i], kept[j]});
        const double w = it == cross_t.end() ? 0.0 : static_cast<double>(it->second);
        net.inter_edges.push_back({0, static_cast<int>(i), 1, static_cast<int>(j), w});
      }
    }
    out.push_back(std::move(net));
  }
  return out;
}

}  // namespace msgcn::io
