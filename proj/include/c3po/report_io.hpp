#pragma once

// Report serialisation.
//
//   summary.csv        replicate,seed,scenario_digest,tau,phi_ms,psi
//   summary.json       the whole report (round-trips through report_from_json)
//   node_loads.csv     node_id,avg_load
//   series_<node>.csv  t_ms,load
//
// Numbers use the shortest text that parses back to the same double.

#include <cstdint>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "c3po/errors.hpp"
#include "c3po/format.hpp"
#include "c3po/metrics.hpp"

namespace c3po {

inline nlohmann::json report_to_json(const MetricsReport& r) {
  using nlohmann::json;
  json nodes = json::array();
  for (const auto& n : r.nodes) {
    nodes.push_back({{"id", n.id},
                     {"name", n.name},
                     {"cpu_capacity", n.cpu_capacity},
                     {"mem_capacity", n.mem_capacity},
                     {"avg_load", n.avg_load},
                     {"avg_in_system", n.avg_in_system},
                     {"peak_cpu_reserved", n.peak_cpu_reserved},
                     {"peak_mem_reserved", n.peak_mem_reserved},
                     {"executed", n.executed},
                     {"dropped", n.dropped},
                     {"series", n.series}});
  }
  json j = {{"seed", r.seed},
            {"scenario_digest", r.scenario_digest},
            {"strategy", r.strategy},
            {"horizon_s", r.horizon},
            {"bin_width_s", r.bin_width},
            {"tau", r.tau},
            {"phi_ms", r.phi_ms ? json(*r.phi_ms) : json(nullptr)},
            {"psi", r.psi},
            {"emitted", r.emitted},
            {"executed", r.executed},
            {"dropped", r.dropped},
            {"nodes", nodes}};
  if (!r.journeys.empty()) {
    json js = json::array();
    for (const auto& jr : r.journeys) {
      js.push_back({{"request_id", jr.request_id},
                    {"client", jr.client},
                    {"hops", jr.hops},
                    {"outcome", jr.outcome == Outcome::Executed  ? "executed"
                                : jr.outcome == Outcome::Dropped ? "dropped"
                                                                 : "pending"},
                    {"at", jr.at},
                    {"emit_time", jr.emit_time},
                    {"admit_time", jr.admit_time},
                    {"complete_time", jr.complete_time},
                    {"delivered_time", jr.delivered_time},
                    {"cpu_demand", jr.cpu_demand}});
    }
    j["journeys"] = js;
  }
  return j;
}

inline MetricsReport report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  try {
    r.seed = j.at("seed").get<std::uint64_t>();
    r.scenario_digest = j.at("scenario_digest").get<std::string>();
    r.strategy = j.at("strategy").get<std::string>();
    r.horizon = j.at("horizon_s").get<double>();
    r.bin_width = j.at("bin_width_s").get<double>();
    r.tau = j.at("tau").get<double>();
    if (!j.at("phi_ms").is_null()) r.phi_ms = j.at("phi_ms").get<double>();
    r.psi = j.at("psi").get<double>();
    r.emitted = j.at("emitted").get<std::uint64_t>();
    r.executed = j.at("executed").get<std::uint64_t>();
    r.dropped = j.at("dropped").get<std::uint64_t>();
    for (const auto& n : j.at("nodes")) {
      NodeReport nr;
      nr.id = n.at("id").get<NodeId>();
      nr.name = n.at("name").get<std::string>();
      nr.cpu_capacity = n.at("cpu_capacity").get<double>();
      nr.mem_capacity = n.at("mem_capacity").get<double>();
      nr.avg_load = n.at("avg_load").get<double>();
      nr.avg_in_system = n.at("avg_in_system").get<double>();
      nr.peak_cpu_reserved = n.at("peak_cpu_reserved").get<double>();
      nr.peak_mem_reserved = n.at("peak_mem_reserved").get<double>();
      nr.executed = n.at("executed").get<std::uint64_t>();
      nr.dropped = n.at("dropped").get<std::uint64_t>();
      nr.series = n.at("series").get<std::vector<double>>();
      r.nodes.push_back(std::move(nr));
    }
    if (auto it = j.find("journeys"); it != j.end()) {
      for (const auto& jj : *it) {
        RequestJourney jr;
        jr.request_id = jj.at("request_id").get<std::uint64_t>();
        jr.client = jj.at("client").get<NodeId>();
        jr.hops = jj.at("hops").get<std::vector<NodeId>>();
        const auto outcome = jj.at("outcome").get<std::string>();
        jr.outcome = outcome == "executed"  ? Outcome::Executed
                     : outcome == "dropped" ? Outcome::Dropped
                                            : Outcome::Pending;
        jr.at = jj.at("at").get<NodeId>();
        jr.emit_time = jj.at("emit_time").get<double>();
        jr.admit_time = jj.at("admit_time").get<double>();
        jr.complete_time = jj.at("complete_time").get<double>();
        jr.delivered_time = jj.at("delivered_time").get<double>();
        jr.cpu_demand = jj.at("cpu_demand").get<double>();
        r.journeys.push_back(std::move(jr));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed report JSON: ") + e.what());
  }
  return r;
}

inline constexpr const char* kSummaryHeader = "replicate,seed,scenario_digest,tau,phi_ms,psi";

inline std::string summary_csv_row(const MetricsReport& r, int replicate) {
  return std::to_string(replicate) + "," + std::to_string(r.seed) + "," + r.scenario_digest +
         "," + format_double(r.tau) + "," + (r.phi_ms ? format_double(*r.phi_ms) : "") + "," +
         format_double(r.psi);
}

namespace detail {
inline std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}
inline void close_checked(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw std::runtime_error("I/O error writing '" + path.string() + "'");
}
}  // namespace detail

inline void write_summary_csv(const std::filesystem::path& path,
                              std::span<const MetricsReport> reports) {
  auto out = detail::open_for_write(path);
  out << kSummaryHeader << '\n';
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out << summary_csv_row(reports[i], static_cast<int>(i)) << '\n';
  }
  detail::close_checked(out, path);
}

inline void write_node_loads_csv(const std::filesystem::path& path, const MetricsReport& r) {
  auto out = detail::open_for_write(path);
  out << "node_id,avg_load\n";
  for (const auto& n : r.nodes) out << n.name << ',' << format_double(n.avg_load) << '\n';
  detail::close_checked(out, path);
}

inline void write_series_csv(const std::filesystem::path& path, const MetricsReport& r,
                             const NodeReport& n) {
  auto out = detail::open_for_write(path);
  out << "t_ms,load\n";
  for (std::size_t b = 0; b < n.series.size(); ++b) {
    out << format_double(static_cast<double>(b) * r.bin_width * 1e3) << ','
        << format_double(n.series[b]) << '\n';
  }
  detail::close_checked(out, path);
}

// Writes one report into out_dir. series_nodes names routers; "*" means all.
inline std::vector<std::filesystem::path> emit(const MetricsReport& r, const std::string& format,
                                               const std::filesystem::path& out_dir,
                                               std::span<const std::string> series_nodes = {},
                                               int replicate = 0) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + out_dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  if (format == "json") {
    const auto path = out_dir / "summary.json";
    auto out = detail::open_for_write(path);
    out << report_to_json(r).dump(2) << '\n';
    detail::close_checked(out, path);
    written.push_back(path);
  } else if (format == "csv") {
    const auto path = out_dir / "summary.csv";
    auto out = detail::open_for_write(path);
    out << kSummaryHeader << '\n';
    if (!r.scenario_digest.empty() || !r.nodes.empty()) {
      out << summary_csv_row(r, replicate) << '\n';
    }
    detail::close_checked(out, path);
    written.push_back(path);
  } else {
    throw ConfigError("unknown output format '" + format + "'");
  }

  const auto loads = out_dir / "node_loads.csv";
  write_node_loads_csv(loads, r);
  written.push_back(loads);

  bool all = false;
  for (const auto& s : series_nodes) all = all || s == "*";
  for (const auto& n : r.nodes) {
    const bool wanted =
        all || std::find(series_nodes.begin(), series_nodes.end(), n.name) != series_nodes.end();
    if (!wanted) continue;
    const auto path = out_dir / ("series_" + n.name + ".csv");
    write_series_csv(path, r, n);
    written.push_back(path);
  }
  return written;
}

}  // namespace c3po
