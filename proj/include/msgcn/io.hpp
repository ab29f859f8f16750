#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "msgcn/eval.hpp"
#include "msgcn/graph.hpp"
#include "msgcn/model.hpp"
#include "msgcn/synthgen.hpp"
#include "msgcn/train.hpp"

namespace msgcn::io {

inline constexpr int kNetworkFormatVersion = 1;
inline constexpr int kCheckpointFormatVersion = 1;
inline constexpr int kManifestFormatVersion = 1;

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

// ---- networks -------------------------------------------------------------

std::string serialize_network(const SpatialMultiplexNetwork& net);
// Throws ParseError for malformed text, ValidationError for invariant
// violations. `source` names the input in error messages.
SpatialMultiplexNetwork parse_network(const std::string& text, const std::string& source = "<network>");

void save_network(const std::filesystem::path& path, const SpatialMultiplexNetwork& net);
SpatialMultiplexNetwork load_network(const std::filesystem::path& path);

// ---- dataset directories --------------------------------------------------

enum class Split { train, test, all };

struct DatasetEntry {
  std::string file;
  std::string split;  // "train", "test" or "" when the directory is unsplit
  std::uint64_t seed = 0;
};

struct DatasetIndex {
  std::string source;  // "synthetic" or "temporal"
  std::vector<DatasetEntry> entries;
};

// Generates the dataset and writes network_NNNNN.json files plus manifest.json.
void write_synthetic_dataset(const std::filesystem::path& dir, const DatasetManifest& manifest);
void write_network_directory(const std::filesystem::path& dir, const std::vector<SpatialMultiplexNetwork>& nets,
                             const std::string& source);
DatasetIndex read_dataset_index(const std::filesystem::path& dir);
// Networks of the requested split. An unsplit directory returns everything
// for any split.
std::vector<SpatialMultiplexNetwork> load_dataset(const std::filesystem::path& dir, Split split);

// ---- checkpoints ----------------------------------------------------------

struct Checkpoint {
  ModelParams params;
  TrainConfig train;
  LossConfig loss;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& text, const std::string& source = "<checkpoint>");
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// ---- CSV ------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by name; throws ParseError when absent.
  std::size_t column(const std::string& name, const std::string& source) const;
};

// RFC 4180 subset: comma separated, optional double quotes, no embedded newlines.
CsvTable parse_csv(const std::string& text, const std::string& source);
CsvTable read_csv(const std::filesystem::path& path);
std::string to_csv(const CsvTable& table);
std::string format_double(double v);

std::string loss_history_csv(const std::vector<LossBreakdown>& history);
std::string metrics_csv(const MetricSet& m, std::size_t count);
std::string predictions_csv(const std::vector<LinkPrediction>& predictions);

// trials.csv, groups.csv, ttests.csv inside `dir`.
void write_report(const std::filesystem::path& dir, const ExperimentReport& report);

// ---- experiment config ----------------------------------------------------

// Line-based "key = value" file ('#' starts a comment). Keys before the first
// section set run options, "compare = A, B" (repeatable) adds a t-test pair,
// and each "[group LABEL]" section defines one group.
ExperimentConfig parse_experiment_config(const std::string& text, const std::string& source);

// ---- temporal flow tables -------------------------------------------------

struct Station {
  std::string id;
  std::string name;
  double x = 0.0;
  double y = 0.0;
};

struct Boarding {
  std::string date;
  int interval = 0;
  std::string station;
  long long boardings = 0;
};

struct Flow {
  std::string date;
  int interval = 0;
  std::string origin;
  std::string dest;
  long long passengers = 0;
};

struct TemporalFlowTables {
  std::vector<Station> stations;
  std::vector<Boarding> boardings;
  std::vector<Flow> intra_flows;
  // Departures in `interval`, arrivals in `interval + 1`.
  std::vector<Flow> cross_flows;
};

TemporalFlowTables read_temporal_tables(const std::filesystem::path& stations, const std::filesystem::path& boardings,
                                        const std::filesystem::path& intra, const std::filesystem::path& cross);

// One two-layer network per adjacent interval pair (t, t+1) of `date`.
std::vector<SpatialMultiplexNetwork> ingest_temporal(const TemporalFlowTables& tables, const std::string& date);

}  // namespace msgcn::io
