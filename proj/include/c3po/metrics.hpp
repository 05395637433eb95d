#pragma once

// Run results: per-router time-averaged load (CPU in use / CPU capacity),
// binned load series, network aggregates tau (mean router load), phi (mean
// latency of executed requests, ms) and psi (dropped / emitted).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "c3po/errors.hpp"
#include "c3po/topology.hpp"

namespace c3po {

enum class Outcome { Pending, Executed, Dropped };

struct RequestJourney {
  std::uint64_t request_id = 0;
  NodeId client = kNoNode;
  std::vector<NodeId> hops;  // starts at the client's edge router
  Outcome outcome = Outcome::Pending;
  NodeId at = kNoNode;       // executing or dropping node
  double emit_time = 0.0;
  double admit_time = 0.0;     // entered the executing node's queue
  double complete_time = 0.0;  // service finished
  double delivered_time = 0.0;  // result back at the client
  double cpu_demand = 0.0;
  double latency() const { return delivered_time - emit_time; }
};

struct NodeReport {
  NodeId id = kNoNode;
  std::string name;
  double cpu_capacity = 1.0;
  double mem_capacity = 1.0;
  double avg_load = 0.0;       // time-average over [0, horizon)
  double avg_in_system = 0.0;  // time-average number queued + in service
  double peak_cpu_reserved = 0.0;
  double peak_mem_reserved = 0.0;
  std::uint64_t executed = 0;
  std::uint64_t dropped = 0;
  std::vector<double> series;  // bin averages of load, bin width report.bin_width

  bool operator==(const NodeReport&) const = default;
};

struct MetricsReport {
  std::uint64_t seed = 0;
  std::string scenario_digest;
  std::string strategy;
  double horizon = 0.0;    // seconds
  double bin_width = 1e-3;  // seconds
  std::vector<NodeReport> nodes;  // routers in id order
  double tau = 0.0;
  std::optional<double> phi_ms;
  double psi = 0.0;
  std::uint64_t emitted = 0;
  std::uint64_t executed = 0;
  std::uint64_t dropped = 0;
  std::vector<RequestJourney> journeys;  // only when requested

  const NodeReport& node(NodeId id) const {
    auto it = std::find_if(nodes.begin(), nodes.end(),
                           [id](const NodeReport& n) { return n.id == id; });
    if (it == nodes.end()) {
      throw ContractViolation("node " + std::to_string(id) + " not in report");
    }
    return *it;
  }
  const NodeReport& node(const std::string& name) const {
    auto it = std::find_if(nodes.begin(), nodes.end(),
                           [&](const NodeReport& n) { return n.name == name; });
    if (it == nodes.end()) throw ContractViolation("node '" + name + "' not in report");
    return *it;
  }
};

// The k most loaded routers, descending, ties by id.
inline std::vector<std::pair<NodeId, double>> top_k_loads(const MetricsReport& report,
                                                          std::size_t k) {
  if (k < 1) throw ContractViolation("top_k_loads needs k >= 1");
  std::vector<std::pair<NodeId, double>> all;
  for (const auto& n : report.nodes) all.emplace_back(n.id, n.avg_load);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.second > b.second || (a.second == b.second && a.first < b.first);
  });
  if (all.size() > k) all.resize(k);
  return all;
}

// Time-average load over [t0, t1) in seconds. Bins are assumed uniform inside;
// windows aligned to bin edges are exact.
inline double window_avg_load(const MetricsReport& report, NodeId node, double t0,
                              double t1) {
  if (!(t0 < t1) || t0 < 0.0 || t1 > report.horizon * (1.0 + 1e-12)) {
    throw ContractViolation("bad load window [" + std::to_string(t0) + ", " +
                            std::to_string(t1) + ")");
  }
  const auto& series = report.node(node).series;
  const double w = report.bin_width;
  double area = 0.0;
  const auto first = static_cast<std::size_t>(std::max(0.0, std::floor(t0 / w)));
  for (std::size_t b = first; b < series.size(); ++b) {
    const double lo = static_cast<double>(b) * w;
    const double hi = std::min(lo + w, report.horizon);
    if (lo >= t1) break;
    const double overlap = std::min(hi, t1) - std::max(lo, t0);
    if (overlap > 0.0) area += series[b] * overlap;
  }
  return area / (t1 - t0);
}

struct SeriesPoint {
  double t_ms = 0.0;  // bin start
  double load = 0.0;
};

// Load series re-binned to bin_ms (>= the recorded bin width).
inline std::vector<SeriesPoint> load_time_series(const MetricsReport& report, NodeId node,
                                                 double bin_ms) {
  (void)report.node(node);
  const double w = bin_ms * 1e-3;
  if (!(w > 0.0)) throw ContractViolation("bin width must be > 0");
  std::vector<SeriesPoint> out;
  for (std::size_t b = 0;; ++b) {
    const double lo = static_cast<double>(b) * w;
    if (lo >= report.horizon * (1.0 - 1e-12)) break;
    const double hi = std::min(lo + w, report.horizon);
    out.push_back({lo * 1e3, window_avg_load(report, node, lo, hi)});
  }
  return out;
}

}  // namespace c3po
