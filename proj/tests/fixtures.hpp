#pragma once

// Hand-built passenger flow fixture: 5 stations, intervals 0..2 on one date,
// plus a row on another date that must be ignored.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "msgcn/graph.hpp"

namespace fixture {

inline const char* kDate = "2023-05-01";
constexpr int kStations = 5;
constexpr int kIntervals = 3;

inline const double kX[kStations] = {0.0, 1.0, 2.0, 0.0, 1.0};
inline const double kY[kStations] = {0.0, 0.0, 0.0, 1.0, 1.0};

inline long long boardings(int t, int s) { return 10 * (s + 1) + t; }
// Directed flow o -> d inside interval t.
inline long long intra(int t, int o, int d) { return 1 + t + 5 * o + d; }
// Directed flow o (interval t) -> d (interval t+1); some pairs have no row.
inline bool cross_present(int t, int o, int d) { return (o + d + t) % 3 != 0; }
inline long long cross(int t, int o, int d) { return 100 * t + 10 * o + d + 1; }

inline std::string station_id(int s) { return "S" + std::to_string(s + 1); }

inline void write_tables(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream st(dir / "stations.csv");
  st << "station_id,name,x,y\n";
  for (int s = 0; s < kStations; ++s) st << station_id(s) << ",\"Stop " << s + 1 << ", North\"," << kX[s] << "," << kY[s] << "\n";
  std::ofstream bo(dir / "boardings.csv");
  bo << "date,interval_index,station_id,boardings\n";
  for (int t = 0; t < kIntervals; ++t)
    for (int s = 0; s < kStations; ++s) bo << kDate << "," << t << "," << station_id(s) << "," << boardings(t, s) << "\n";
  bo << "2023-05-02,7,S1,999\n";
  std::ofstream in(dir / "intra.csv");
  in << "date,interval_index,origin,dest,passengers\n";
  for (int t = 0; t < kIntervals; ++t)
    for (int o = 0; o < kStations; ++o)
      for (int d = 0; d < kStations; ++d)
        if (o != d) in << kDate << "," << t << "," << station_id(o) << "," << station_id(d) << "," << intra(t, o, d) << "\n";
  std::ofstream cr(dir / "cross.csv");
  cr << "date,interval_index,origin,dest,passengers\n";
  for (int t = 0; t + 1 < kIntervals; ++t)
    for (int o = 0; o < kStations; ++o)
      for (int d = 0; d < kStations; ++d)
        if (cross_present(t, o, d)) cr << kDate << "," << t << "," << station_id(o) << "," << station_id(d) << "," << cross(t, o, d) << "\n";
}

// Field-by-field comparison of ingested networks against the tables above.
// Returns one message per mismatch.
inline std::vector<std::string> mismatches(const std::vector<msgcn::SpatialMultiplexNetwork>& nets) {
  std::vector<std::string> bad;
  auto fail = [&](const std::string& m) { bad.push_back(m); };
  if (nets.size() != kIntervals - 1) {
    fail("expected " + std::to_string(kIntervals - 1) + " networks, got " + std::to_string(nets.size()));
    return bad;
  }
  for (int t = 0; t + 1 < kIntervals; ++t) {
    const auto& net = nets[t];
    const std::string at = "network " + std::to_string(t) + ": ";
    if (net.num_layers != 2) fail(at + "num_layers");
    if (net.num_nodes() != kStations) {
      fail(at + "node count");
      continue;
    }
    for (int s = 0; s < kStations; ++s) {
      if (net.positions[s].x != kX[s] || net.positions[s].y != kY[s]) fail(at + "position " + std::to_string(s));
      for (int l = 0; l < 2; ++l) {
        if (net.features[l][s] != static_cast<double>(boardings(t + l, s))) {
          fail(at + "feature layer " + std::to_string(l) + " station " + std::to_string(s));
        }
      }
    }
    for (int l = 0; l < 2; ++l) {
      int count = 0;
      for (const auto& e : net.intra_edges) {
        if (e.layer != l) continue;
        ++count;
        const double want = static_cast<double>(intra(t + l, e.u, e.v) + intra(t + l, e.v, e.u));
        if (e.weight != want) fail(at + "intra weight " + std::to_string(e.u) + "-" + std::to_string(e.v));
      }
      if (count != kStations * (kStations - 1) / 2) fail(at + "intra edge count layer " + std::to_string(l));
    }
    if (net.inter_edges.size() != kStations * kStations) fail(at + "inter edge count");
    for (const auto& e : net.inter_edges) {
      if (e.layer_p != 0 || e.layer_q != 1) fail(at + "inter edge layers");
      const double want = cross_present(t, e.u, e.v) ? static_cast<double>(cross(t, e.u, e.v)) : 0.0;
      if (e.weight != want) fail(at + "inter weight " + std::to_string(e.u) + "->" + std::to_string(e.v));
    }
  }
  return bad;
}

}  // namespace fixture
