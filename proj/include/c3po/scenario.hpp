#pragma once

// Scenario files: JSON documents describing topology, strategy, workload,
// controller and output options. Unknown keys are rejected so typos fail
// validation instead of silently falling back to defaults.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "c3po/engine.hpp"
#include "c3po/errors.hpp"
#include "c3po/metrics.hpp"
#include "c3po/random.hpp"
#include "c3po/topology.hpp"
#include "c3po/topology_io.hpp"
#include "c3po/workload.hpp"

namespace c3po {

using Json = nlohmann::json;

struct NodeCapacityOverride {
  double cpu = 1.0;
  double mem = 1.0;
};

struct TopologySpec {
  std::string generator = "line";  // grid | line | file
  int rows = 10;
  int cols = 10;
  GridCoord client_at{0, 0};
  GridCoord server_at{9, 9};
  int routers = 2;
  std::string file;
  // Uniform router capacities. For files, applied only when set explicitly.
  std::optional<double> cpu;
  std::optional<double> mem;
  double link_delay_ms = 1.0;
  std::map<std::string, NodeCapacityOverride> overrides;
};

struct InitialOverride {
  std::optional<double> lambda;
  std::optional<double> lambda_prev;
  std::optional<double> mu;
  std::optional<double> cpu_mean;
  std::optional<double> mem_mean;
};

struct WorkloadSpec {
  double base_rate = 1000.0;
  double rate_scale = 1.0;
  double horizon_s = 1.0;
  std::vector<JitterSpec> jitters;
  std::map<std::string, double> client_weights;  // default: equal split
  CatalogSpec catalog;
};

struct ControllerSpec {
  std::size_t k = 500;
  double exchange_period_ms = 1.0;
  bool pin_estimates = false;
  InitialOverride initial;
};

struct MetricsSpec {
  double bin_ms = 1.0;
  bool keep_journeys = false;
};

struct OutputSpec {
  std::vector<std::string> series_nodes;  // "*" selects every router
  std::string format = "csv";
};

struct ScenarioConfig {
  std::string name;
  std::uint64_t seed = 1;
  int replicates = 1;
  Strategy strategy = Strategy::Proactive;
  TopologySpec topology;
  WorkloadSpec workload;
  ControllerSpec controller;
  MetricsSpec metrics;
  OutputSpec output;
  std::filesystem::path base_dir;  // resolves relative topology paths
};

namespace detail {

// Reads fields out of a JSON object and complains about any it did not read.
class StrictObject {
 public:
  StrictObject(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }
  ~StrictObject() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : j_.items()) {
      if (seen_.count(key) == 0) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }
  StrictObject(const StrictObject&) = delete;
  StrictObject& operator=(const StrictObject&) = delete;

  const Json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (const Json* v = get(key)) out = as<T>(*v, key);
  }
  template <typename T>
  void read(const std::string& key, std::optional<T>& out) {
    if (const Json* v = get(key)) out = as<T>(*v, key);
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

 private:
  template <typename T>
  T as(const Json& v, const std::string& key) const {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError("expected a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError("expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.get<std::int64_t>() < 0 && !v.is_number_unsigned()) {
            throw ConfigError("expected a nonnegative integer");
          }
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("expected a string");
      }
      return v.get<T>();
    } catch (const ConfigError& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    } catch (const Json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

inline GridCoord read_coord(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() ||
      !j[1].is_number_integer()) {
    throw ConfigError(where + ": expected [row, col]");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

inline TopologySpec read_topology(const Json& j) {
  TopologySpec t;
  StrictObject o(j, "topology");
  o.read("generator", t.generator);
  o.read("rows", t.rows);
  o.read("cols", t.cols);
  if (const Json* c = o.get("client")) t.client_at = read_coord(*c, o.path("client"));
  if (const Json* s = o.get("server")) t.server_at = read_coord(*s, o.path("server"));
  o.read("routers", t.routers);
  o.read("file", t.file);
  o.read("cpu", t.cpu);
  o.read("mem", t.mem);
  o.read("link_delay_ms", t.link_delay_ms);
  if (const Json* ov = o.get("overrides")) {
    if (!ov->is_object()) throw ConfigError("topology.overrides: expected an object");
    for (const auto& [name, val] : ov->items()) {
      NodeCapacityOverride c;
      StrictObject n(val, "topology.overrides." + name);
      n.read("cpu", c.cpu);
      n.read("mem", c.mem);
      t.overrides[name] = c;
    }
  }
  if (t.generator != "grid" && t.generator != "line" && t.generator != "file") {
    throw ConfigError("topology.generator must be grid, line or file");
  }
  return t;
}

inline CatalogSpec read_catalog(const Json& j) {
  CatalogSpec c;
  StrictObject o(j, "workload.catalog");
  o.read("services", c.services);
  o.read("zipf", c.zipf_exponent);
  if (const Json* e = o.get("exec_time_ms")) {
    if (e->is_number()) {
      c.exec_time_min = c.exec_time_max = e->get<double>() * 1e-3;
    } else if (e->is_array() && e->size() == 2 && (*e)[0].is_number() && (*e)[1].is_number()) {
      c.exec_time_min = (*e)[0].get<double>() * 1e-3;
      c.exec_time_max = (*e)[1].get<double>() * 1e-3;
    } else {
      throw ConfigError("workload.catalog.exec_time_ms: expected a number or [min, max]");
    }
  }
  o.read("cpu", c.cpu_demand);
  o.read("mem", c.mem_demand);
  if (const Json* entries = o.get("entries")) {
    if (!entries->is_array()) throw ConfigError("workload.catalog.entries: expected an array");
    for (std::size_t i = 0; i < entries->size(); ++i) {
      ServiceSpec s;
      StrictObject e((*entries)[i], "workload.catalog.entries[" + std::to_string(i) + "]");
      e.read("id", s.id);
      e.read("weight", s.popularity_weight);
      double exec_ms = s.mean_exec_time * 1e3;
      e.read("exec_time_ms", exec_ms);
      s.mean_exec_time = exec_ms * 1e-3;
      e.read("cpu", s.cpu_demand);
      e.read("mem", s.mem_demand);
      c.explicit_services.push_back(s);
    }
  }
  return c;
}

inline WorkloadSpec read_workload(const Json& j) {
  WorkloadSpec w;
  StrictObject o(j, "workload");
  o.read("base_rate", w.base_rate);
  o.read("rate_scale", w.rate_scale);
  o.read("horizon_s", w.horizon_s);
  if (const Json* js = o.get("jitters")) {
    if (!js->is_array()) throw ConfigError("workload.jitters: expected an array");
    for (std::size_t i = 0; i < js->size(); ++i) {
      StrictObject e((*js)[i], "workload.jitters[" + std::to_string(i) + "]");
      double start_ms = 0, duration_ms = 0, mult = 1;
      e.read("start_ms", start_ms);
      e.read("duration_ms", duration_ms);
      e.read("multiplier", mult);
      w.jitters.push_back({start_ms * 1e-3, duration_ms * 1e-3, mult});
    }
  }
  if (const Json* cw = o.get("client_weights")) {
    if (!cw->is_object()) throw ConfigError("workload.client_weights: expected an object");
    for (const auto& [name, v] : cw->items()) {
      if (!v.is_number()) throw ConfigError("workload.client_weights." + name + ": expected a number");
      w.client_weights[name] = v.get<double>();
    }
  }
  if (const Json* c = o.get("catalog")) w.catalog = read_catalog(*c);
  return w;
}

inline ControllerSpec read_controller(const Json& j) {
  ControllerSpec c;
  StrictObject o(j, "controller");
  o.read("k", c.k);
  o.read("exchange_period_ms", c.exchange_period_ms);
  o.read("pin_estimates", c.pin_estimates);
  if (const Json* init = o.get("initial")) {
    StrictObject i(*init, "controller.initial");
    i.read("lambda", c.initial.lambda);
    i.read("lambda_prev", c.initial.lambda_prev);
    i.read("mu", c.initial.mu);
    i.read("cpu_mean", c.initial.cpu_mean);
    i.read("mem_mean", c.initial.mem_mean);
  }
  return c;
}

}  // namespace detail

inline ScenarioConfig scenario_from_json(const Json& j, std::filesystem::path base_dir = {}) {
  ScenarioConfig s;
  s.base_dir = std::move(base_dir);
  detail::StrictObject o(j, "scenario");
  o.read("name", s.name);
  o.read("seed", s.seed);
  o.read("replicates", s.replicates);
  std::string strategy = to_string(s.strategy);
  o.read("strategy", strategy);
  s.strategy = parse_strategy(strategy);
  if (const Json* t = o.get("topology")) s.topology = detail::read_topology(*t);
  if (const Json* w = o.get("workload")) s.workload = detail::read_workload(*w);
  if (const Json* c = o.get("controller")) s.controller = detail::read_controller(*c);
  if (const Json* m = o.get("metrics")) {
    detail::StrictObject mo(*m, "metrics");
    mo.read("bin_ms", s.metrics.bin_ms);
    mo.read("keep_journeys", s.metrics.keep_journeys);
  }
  if (const Json* out = o.get("output")) {
    detail::StrictObject oo(*out, "output");
    oo.read("series_nodes", s.output.series_nodes);
    oo.read("format", s.output.format);
  }
  return s;
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
  Json j;
  try {
    j = Json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return scenario_from_json(j, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// Canonical JSON of every field that shapes a run except seed, replicate
// count and output options.
inline Json scenario_to_json(const ScenarioConfig& s) {
  Json t = {{"generator", s.topology.generator},
            {"link_delay_ms", s.topology.link_delay_ms}};
  if (s.topology.generator == "grid") {
    t["rows"] = s.topology.rows;
    t["cols"] = s.topology.cols;
    t["client"] = {s.topology.client_at.row, s.topology.client_at.col};
    t["server"] = {s.topology.server_at.row, s.topology.server_at.col};
  } else if (s.topology.generator == "line") {
    t["routers"] = s.topology.routers;
  } else {
    t["file"] = s.topology.file;
  }
  if (s.topology.cpu) t["cpu"] = *s.topology.cpu;
  if (s.topology.mem) t["mem"] = *s.topology.mem;
  for (const auto& [name, c] : s.topology.overrides) {
    t["overrides"][name] = {{"cpu", c.cpu}, {"mem", c.mem}};
  }

  Json cat = {{"services", s.workload.catalog.services},
              {"zipf", s.workload.catalog.zipf_exponent},
              {"exec_time_ms", {s.workload.catalog.exec_time_min * 1e3,
                                s.workload.catalog.exec_time_max * 1e3}},
              {"cpu", s.workload.catalog.cpu_demand},
              {"mem", s.workload.catalog.mem_demand}};
  for (const auto& e : s.workload.catalog.explicit_services) {
    cat["entries"].push_back({{"id", e.id},
                              {"weight", e.popularity_weight},
                              {"exec_time_ms", e.mean_exec_time * 1e3},
                              {"cpu", e.cpu_demand},
                              {"mem", e.mem_demand}});
  }
  Json w = {{"base_rate", s.workload.base_rate},
            {"rate_scale", s.workload.rate_scale},
            {"horizon_s", s.workload.horizon_s},
            {"catalog", cat}};
  for (const auto& jt : s.workload.jitters) {
    w["jitters"].push_back({{"start_ms", jt.start * 1e3},
                            {"duration_ms", jt.duration * 1e3},
                            {"multiplier", jt.rate_multiplier}});
  }
  for (const auto& [name, weight] : s.workload.client_weights) {
    w["client_weights"][name] = weight;
  }

  Json c = {{"k", s.controller.k},
            {"exchange_period_ms", s.controller.exchange_period_ms},
            {"pin_estimates", s.controller.pin_estimates}};
  const auto& init = s.controller.initial;
  if (init.lambda) c["initial"]["lambda"] = *init.lambda;
  if (init.lambda_prev) c["initial"]["lambda_prev"] = *init.lambda_prev;
  if (init.mu) c["initial"]["mu"] = *init.mu;
  if (init.cpu_mean) c["initial"]["cpu_mean"] = *init.cpu_mean;
  if (init.mem_mean) c["initial"]["mem_mean"] = *init.mem_mean;

  return {{"name", s.name},
          {"strategy", to_string(s.strategy)},
          {"topology", t},
          {"workload", w},
          {"controller", c},
          {"metrics", {{"bin_ms", s.metrics.bin_ms}, {"keep_journeys", s.metrics.keep_journeys}}}};
}

// FNV-1a of the canonical scenario JSON, as 16 hex digits.
inline std::string scenario_digest(const ScenarioConfig& s) {
  const std::string text = scenario_to_json(s).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

inline Topology build_topology(const ScenarioConfig& s,
                               std::vector<std::string>* warnings = nullptr) {
  const auto& ts = s.topology;
  CapacityProfile profile;
  profile.cpu = ts.cpu.value_or(1.0);
  profile.mem = ts.mem.value_or(1.0);
  profile.link_delay = ts.link_delay_ms * 1e-3;
  if (!(profile.link_delay > 0.0)) throw ConfigError("topology.link_delay_ms must be > 0");
  Topology topo = [&] {
    if (ts.generator == "grid") {
      return make_grid(ts.rows, ts.cols, profile, ts.client_at, ts.server_at);
    }
    if (ts.generator == "line") return make_line(ts.routers, profile);
    if (ts.file.empty()) throw ConfigError("topology.file is required for generator 'file'");
    std::filesystem::path p = ts.file;
    if (p.is_relative()) p = s.base_dir / p;
    Topology t = load_topology(p, warnings);
    if (ts.cpu || ts.mem) {
      for (NodeId r : t.routers()) {
        t.set_capacity(r, ts.cpu.value_or(t.node(r).cpu_capacity),
                       ts.mem.value_or(t.node(r).mem_capacity));
      }
    }
    return t;
  }();
  for (const auto& [name, c] : ts.overrides) {
    auto id = topo.find(name);
    if (!id) throw ConfigError("topology.overrides: unknown node '" + name + "'");
    topo.set_capacity(*id, c.cpu, c.mem);
  }
  return topo;
}

inline std::vector<ClientLoad> client_loads(const ScenarioConfig& s, const Topology& topo) {
  const double total = s.workload.base_rate * s.workload.rate_scale;
  if (total < 0.0) throw ConfigError("workload rate must be >= 0");
  for (const auto& [name, _] : s.workload.client_weights) {
    auto id = topo.find(name);
    if (!id || topo.node(*id).role != NodeRole::Client) {
      throw ConfigError("workload.client_weights: '" + name + "' is not a client");
    }
  }
  std::vector<double> weights;
  for (NodeId c : topo.clients()) {
    auto it = s.workload.client_weights.find(topo.node(c).name);
    const double w = it == s.workload.client_weights.end() ? 1.0 : it->second;
    if (w < 0.0) throw ConfigError("client weights must be >= 0");
    weights.push_back(w);
  }
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (!(sum > 0.0)) throw ConfigError("client weights sum to zero");
  std::vector<ClientLoad> out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out.push_back({topo.clients()[i], total * weights[i] / sum});
  }
  return out;
}

inline EngineConfig engine_config(const ScenarioConfig& s, std::span<const ServiceSpec> catalog) {
  EngineConfig e;
  e.strategy = s.strategy;
  e.horizon = s.workload.horizon_s;
  e.k = s.controller.k;
  e.exchange_period = s.controller.exchange_period_ms * 1e-3;
  e.pin_estimates = s.controller.pin_estimates;
  e.bin_width = s.metrics.bin_ms * 1e-3;
  e.keep_journeys = s.metrics.keep_journeys;
  InitialEstimates init = estimates_from_catalog(catalog);
  const auto& o = s.controller.initial;
  if (o.lambda) init.lambda = *o.lambda;
  if (o.lambda_prev) init.lambda_prev = *o.lambda_prev;
  if (o.mu) init.mu = *o.mu;
  if (o.cpu_mean) init.cpu_mean = *o.cpu_mean;
  if (o.mem_mean) init.mem_mean = *o.mem_mean;
  e.initial = init;
  return e;
}

inline void check_scenario_ranges(const ScenarioConfig& s) {
  if (!(s.workload.horizon_s > 0.0)) throw ConfigError("workload.horizon_s must be > 0");
  if (s.workload.base_rate < 0.0 || s.workload.rate_scale < 0.0) {
    throw ConfigError("workload rates must be >= 0");
  }
  if (s.controller.k < 2) throw ConfigError("controller.k must be >= 2");
  if (!(s.controller.exchange_period_ms > 0.0)) {
    throw ConfigError("controller.exchange_period_ms must be > 0");
  }
  if (!(s.metrics.bin_ms > 0.0)) throw ConfigError("metrics.bin_ms must be > 0");
  if (s.replicates < 1) throw ConfigError("replicates must be >= 1");
  if (s.output.format != "csv" && s.output.format != "json") {
    throw ConfigError("output.format must be csv or json");
  }
  validate_jitters(s.workload.jitters, s.workload.horizon_s);
}

// Everything a run needs, built and validated up front.
struct PreparedRun {
  Topology topology;
  SimulationInput input;
};

inline PreparedRun prepare_run(const ScenarioConfig& s, std::uint64_t seed,
                               std::vector<std::string>* warnings = nullptr) {
  check_scenario_ranges(s);
  PreparedRun run{build_topology(s, warnings), {}};
  for (const auto& name : s.output.series_nodes) {
    if (name == "*") continue;
    auto id = run.topology.find(name);
    if (!id || !run.topology.is_router(*id)) {
      throw ConfigError("output.series_nodes: '" + name + "' is not a router");
    }
  }
  auto& in = run.input;
  in.catalog = make_catalog(s.workload.catalog, seed);
  const auto loads = client_loads(s, run.topology);
  in.requests = generate_requests(loads, s.workload.jitters, s.workload.horizon_s,
                                  in.catalog, seed);
  in.config = engine_config(s, in.catalog);
  in.seed = seed;
  in.scenario_digest = scenario_digest(s);
  return run;
}

inline void validate_scenario(const ScenarioConfig& s,
                              std::vector<std::string>* warnings = nullptr) {
  check_scenario_ranges(s);
  Topology topo = build_topology(s, warnings);
  const Catalog catalog = make_catalog(s.workload.catalog, s.seed);
  (void)client_loads(s, topo);
  (void)engine_config(s, catalog);
  for (const auto& name : s.output.series_nodes) {
    if (name == "*") continue;
    auto id = topo.find(name);
    if (!id || !topo.is_router(*id)) {
      throw ConfigError("output.series_nodes: '" + name + "' is not a router");
    }
  }
}

inline MetricsReport run_scenario(const ScenarioConfig& s, std::uint64_t seed) {
  PreparedRun run = prepare_run(s, seed);
  run.input.topology = &run.topology;
  return simulate(run.input);
}

inline MetricsReport run_scenario(const ScenarioConfig& s) { return run_scenario(s, s.seed); }

// Seed of replicate `index`; independent of how many replicates run.
inline std::uint64_t replicate_seed(std::uint64_t base, int index) {
  return derive_seed(base, Substream::Replicate, static_cast<std::uint64_t>(index));
}

}  // namespace c3po
