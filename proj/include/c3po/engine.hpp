#pragma once

// Discrete-event simulation of service requests travelling through a router
// network under one of three strategies:
//
//   None       execute at the client's edge router if resources allow, else drop.
//   Passive    execute if resources allow, else pass one hop toward the
//              server; the last hop before the server drops.
//   Proactive  the per-node controller executes with probability q and
//              otherwise forwards to the least-loaded unvisited router
//              neighbour; admitted requests are never dropped.
//
// Each router has a single FIFO execution unit. Requests in the system hold
// their CPU/memory reservation from admission until completion. Results
// return along the reverse hop path. Events are ordered by (time, insertion
// sequence), so a run is a pure function of its inputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "c3po/controller.hpp"
#include "c3po/errors.hpp"
#include "c3po/metrics.hpp"
#include "c3po/queueing.hpp"
#include "c3po/random.hpp"
#include "c3po/topology.hpp"
#include "c3po/workload.hpp"

namespace c3po {

enum class Strategy { None, Passive, Proactive };

inline std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::None: return "none";
    case Strategy::Passive: return "passive";
    case Strategy::Proactive: return "proactive";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& s) {
  if (s == "none") return Strategy::None;
  if (s == "passive") return Strategy::Passive;
  if (s == "proactive") return Strategy::Proactive;
  throw ConfigError("unknown strategy '" + s + "' (expected none|passive|proactive)");
}

struct Demand {
  double cpu = 0.0;
  double mem = 0.0;
};

struct NodeRuntime {
  NodeId node = kNoNode;
  Strategy strategy = Strategy::None;
  double cpu_capacity = 1.0;
  double mem_capacity = 1.0;
  double cpu_mean_hint = 0.0;  // c'' used for load_now without a controller
  std::optional<Controller> controller;
  std::deque<std::uint64_t> queue;  // front is in service
  double cpu_reserved = 0.0;
  double mem_reserved = 0.0;
  // Last load reported by each router neighbour, sorted by id.
  std::vector<std::pair<NodeId, double>> neighbor_loads;

  std::size_t in_system() const { return queue.size(); }

  // Number in system times the current mean CPU demand, over capacity.
  double load_now() const {
    const double c = controller ? controller->cpu_mean() : cpu_mean_hint;
    return static_cast<double>(queue.size()) * c / cpu_capacity;
  }

  bool fits(const Demand& d) const {
    return cpu_reserved + d.cpu <= cpu_capacity && mem_reserved + d.mem <= mem_capacity;
  }
};

struct Admit {
  bool operator==(const Admit&) const = default;
};
struct Forward {
  NodeId to = kNoNode;
  bool operator==(const Forward&) const = default;
};
struct Drop {
  bool operator==(const Drop&) const = default;
};
using Disposition = std::variant<Admit, Forward, Drop>;

inline Disposition handle_arrival_none(const NodeRuntime& node, const Demand& d) {
  if (node.fits(d)) return Admit{};
  return Drop{};
}

inline Disposition handle_arrival_passive(const NodeRuntime& node, const Demand& d,
                                          const Topology& topo) {
  if (node.fits(d)) return Admit{};
  const NodeId next = topo.next_hop_to_server(node.node);
  if (next == topo.server()) return Drop{};
  return Forward{next};
}

// Least-loaded router neighbour not yet on the request's path; ties by id.
inline std::optional<NodeId> lightest_unvisited_neighbor(const NodeRuntime& node,
                                                         std::span<const NodeId> visited) {
  std::optional<NodeId> best;
  double best_load = 0.0;
  for (const auto& [id, load] : node.neighbor_loads) {
    if (std::find(visited.begin(), visited.end(), id) != visited.end()) continue;
    if (!best || load < best_load) {
      best = id;
      best_load = load;
    }
  }
  return best;
}

inline Disposition handle_arrival_proactive(NodeRuntime& node,
                                            std::span<const NodeId> visited, double now,
                                            double draw,
                                            ArrivalDecision* decision_out = nullptr) {
  if (!node.controller) {
    throw ContractViolation("proactive node without a controller");
  }
  const ArrivalDecision d = node.controller->on_arrival(now, draw);
  if (decision_out) *decision_out = d;
  if (d.action == Action::Execute) return Admit{};
  if (auto next = lightest_unvisited_neighbor(node, visited)) return Forward{*next};
  return Admit{};
}

struct EngineConfig {
  Strategy strategy = Strategy::Proactive;
  double horizon = 1.0;  // seconds; emissions happen in [0, horizon)
  std::size_t k = 500;
  double exchange_period = 1e-3;  // seconds
  // Controller warm start; defaults come from the catalog.
  std::optional<InitialEstimates> initial;
  bool pin_estimates = false;
  double bin_width = 1e-3;  // seconds
  bool keep_journeys = false;
};

struct SimulationInput {
  const Topology* topology = nullptr;
  Catalog catalog;
  std::vector<RequestEvent> requests;  // sorted by emit time
  EngineConfig config;
  std::uint64_t seed = 0;
  std::string scenario_digest;
};

namespace detail {

enum class EventKind : std::uint8_t {
  ClientEmit,
  NodeArrival,
  ServiceComplete,
  ResultDelivered,
  LoadStateTick,
  LoadStateExchange,
};

struct Event {
  double time = 0.0;
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::ClientEmit;
  NodeId node = kNoNode;
  NodeId from = kNoNode;
  std::uint64_t request = 0;
  double value = 0.0;

  bool operator>(const Event& o) const {
    return time > o.time || (time == o.time && sequence > o.sequence);
  }
};

class Simulation {
 public:
  explicit Simulation(const SimulationInput& input)
      : in_(input), topo_(*input.topology), cfg_(input.config) {
    validate();
    for (std::size_t j = 0; j < in_.catalog.size(); ++j) {
      const auto id = in_.catalog[j].id;
      if (id < 0) throw ConfigError("service ids must be >= 0");
      if (static_cast<std::size_t>(id) >= service_index_.size()) {
        service_index_.resize(static_cast<std::size_t>(id) + 1, -1);
      }
      service_index_[static_cast<std::size_t>(id)] = static_cast<int>(j);
    }
    cpu_mean_ = mean_consumption(in_.catalog).cpu;
    InitialEstimates init = cfg_.initial.value_or(estimates_from_catalog(in_.catalog));

    runtime_.resize(topo_.node_count());
    stats_.resize(topo_.node_count());
    draws_.resize(topo_.node_count());
    const std::size_t bins = bin_count();
    for (NodeId r : topo_.routers()) {
      auto& rt = runtime_[r];
      const auto& n = topo_.node(r);
      rt.node = r;
      rt.strategy = cfg_.strategy;
      rt.cpu_capacity = n.cpu_capacity;
      rt.mem_capacity = n.mem_capacity;
      rt.cpu_mean_hint = cpu_mean_;
      for (NodeId nb : topo_.router_neighbors(r)) rt.neighbor_loads.emplace_back(nb, 0.0);
      if (cfg_.strategy == Strategy::Proactive) {
        ControllerConfig cc;
        cc.k = cfg_.k;
        cc.cpu_capacity = n.cpu_capacity;
        cc.mem_capacity = n.mem_capacity;
        cc.init = init;
        cc.pin_estimates = cfg_.pin_estimates;
        rt.controller.emplace(cc);
        draws_[r].emplace(in_.seed, Substream::ControllerDraw, r);
      }
      stats_[r].bins.assign(bins, 0.0);
    }
    journeys_.resize(in_.requests.size());
  }

  MetricsReport run() {
    if (!in_.requests.empty()) schedule_emit(0);
    if (cfg_.strategy == Strategy::Proactive) {
      for (NodeId r : topo_.routers()) push({0.0, 0, EventKind::LoadStateTick, r});
    }
    while (!events_.empty()) {
      const Event e = events_.top();
      events_.pop();
      now_ = e.time;
      dispatch(e);
    }
    return finish();
  }

 private:
  void validate() const {
    if (in_.topology == nullptr) throw ConfigError("simulation has no topology");
    if (!(cfg_.horizon > 0.0)) throw ConfigError("horizon must be > 0");
    if (!(cfg_.bin_width > 0.0)) throw ConfigError("bin width must be > 0");
    if (!(cfg_.exchange_period > 0.0)) throw ConfigError("exchange period must be > 0");
    if (cfg_.k < 2) throw ConfigError("controller buffer size k must be >= 2");
    if (in_.catalog.empty()) throw ConfigError("catalog is empty");
    for (const auto& s : in_.catalog) validate_service(s);
    double last = 0.0;
    for (const auto& r : in_.requests) {
      if (r.emit_time < last || r.emit_time >= cfg_.horizon) {
        throw ConfigError("request emit times must be sorted and inside the horizon");
      }
      if (topo_.node(r.client).role != NodeRole::Client) {
        throw ConfigError("request emitted by a non-client node");
      }
      if (!(r.exec_time > 0.0)) throw ConfigError("request exec time must be > 0");
      last = r.emit_time;
    }
  }

  std::size_t bin_count() const {
    const double n = std::ceil(cfg_.horizon / cfg_.bin_width - 1e-9);
    return static_cast<std::size_t>(std::max(1.0, n));
  }

  void push(Event e) {
    e.sequence = next_sequence_++;
    events_.push(e);
  }

  const ServiceSpec& service_of(const RequestEvent& r) const {
    const auto id = static_cast<std::size_t>(r.service);
    if (id >= service_index_.size() || service_index_[id] < 0) {
      throw ConfigError("request references unknown service " + std::to_string(r.service));
    }
    return in_.catalog[static_cast<std::size_t>(service_index_[id])];
  }

  double delay(NodeId a, NodeId b) const {
    auto d = topo_.link_delay(a, b);
    if (!d) throw std::logic_error("no link between consecutive hops");
    return *d;
  }

  void schedule_emit(std::size_t idx) {
    push({in_.requests[idx].emit_time, 0, EventKind::ClientEmit, kNoNode, kNoNode, idx});
  }

  void dispatch(const Event& e) {
    switch (e.kind) {
      case EventKind::ClientEmit: on_emit(e); break;
      case EventKind::NodeArrival: on_node_arrival(e); break;
      case EventKind::ServiceComplete: on_service_complete(e); break;
      case EventKind::ResultDelivered: on_result_delivered(e); break;
      case EventKind::LoadStateTick: on_tick(e); break;
      case EventKind::LoadStateExchange: on_exchange(e); break;
    }
  }

  void on_emit(const Event& e) {
    const auto& r = in_.requests[e.request];
    auto& j = journeys_[e.request];
    j.request_id = r.request_id;
    j.client = r.client;
    j.emit_time = r.emit_time;
    j.cpu_demand = service_of(r).cpu_demand;
    const NodeId edge = topo_.edge_router(r.client);
    push({now_ + delay(r.client, edge), 0, EventKind::NodeArrival, edge, kNoNode, e.request});
    if (e.request + 1 < in_.requests.size()) schedule_emit(e.request + 1);
  }

  void on_node_arrival(const Event& e) {
    auto& j = journeys_[e.request];
    const auto& r = in_.requests[e.request];
    const auto& svc = service_of(r);
    const Demand demand{svc.cpu_demand, svc.mem_demand};
    auto& node = runtime_[e.node];
    j.hops.push_back(e.node);

    Disposition d;
    switch (cfg_.strategy) {
      case Strategy::None: d = handle_arrival_none(node, demand); break;
      case Strategy::Passive: d = handle_arrival_passive(node, demand, topo_); break;
      case Strategy::Proactive:
        d = handle_arrival_proactive(node, j.hops, now_, draws_[e.node]->uniform());
        break;
    }

    if (std::holds_alternative<Admit>(d)) {
      admit(node, e.request, demand);
    } else if (auto* f = std::get_if<Forward>(&d)) {
      push({now_ + delay(e.node, f->to), 0, EventKind::NodeArrival, f->to, e.node,
            e.request});
    } else {
      j.outcome = Outcome::Dropped;
      j.at = e.node;
      ++stats_[e.node].dropped;
      ++terminated_;
    }
  }

  void admit(NodeRuntime& node, std::uint64_t request, const Demand& demand) {
    auto& j = journeys_[request];
    j.admit_time = now_;
    j.at = node.node;
    account(node.node);
    node.queue.push_back(request);
    node.cpu_reserved += demand.cpu;
    node.mem_reserved += demand.mem;
    auto& s = stats_[node.node];
    s.peak_cpu = std::max(s.peak_cpu, node.cpu_reserved);
    s.peak_mem = std::max(s.peak_mem, node.mem_reserved);
    if (node.queue.size() == 1) start_service(node);
  }

  void start_service(NodeRuntime& node) {
    const std::uint64_t request = node.queue.front();
    push({now_ + in_.requests[request].exec_time, 0, EventKind::ServiceComplete, node.node,
          kNoNode, request});
  }

  void on_service_complete(const Event& e) {
    auto& node = runtime_[e.node];
    const std::uint64_t request = node.queue.front();
    if (request != e.request) throw std::logic_error("FIFO order violated");
    const auto& r = in_.requests[request];
    const auto& svc = service_of(r);
    account(e.node);
    node.queue.pop_front();
    node.cpu_reserved -= svc.cpu_demand;
    node.mem_reserved -= svc.mem_demand;
    if (node.queue.empty()) {
      node.cpu_reserved = 0.0;  // clear accumulated rounding
      node.mem_reserved = 0.0;
    }
    if (node.controller) node.controller->on_complete(r.exec_time, svc.cpu_demand, svc.mem_demand);
    ++stats_[e.node].executed;

    auto& j = journeys_[request];
    j.complete_time = now_;
    double back = 0.0;
    for (std::size_t h = j.hops.size() - 1; h > 0; --h) back += delay(j.hops[h], j.hops[h - 1]);
    back += delay(j.hops.front(), r.client);
    push({now_ + back, 0, EventKind::ResultDelivered, kNoNode, kNoNode, request});
    if (!node.queue.empty()) start_service(node);
  }

  void on_result_delivered(const Event& e) {
    auto& j = journeys_[e.request];
    j.outcome = Outcome::Executed;
    j.delivered_time = now_;
    ++terminated_;
  }

  void on_tick(const Event& e) {
    if (now_ >= cfg_.horizon && terminated_ == in_.requests.size()) return;
    const auto& node = runtime_[e.node];
    const double load = node.load_now();
    for (const auto& [nb, _] : node.neighbor_loads) {
      push({now_ + delay(e.node, nb), 0, EventKind::LoadStateExchange, nb, e.node, 0, load});
    }
    push({now_ + cfg_.exchange_period, 0, EventKind::LoadStateTick, e.node});
  }

  void on_exchange(const Event& e) {
    auto& loads = runtime_[e.node].neighbor_loads;
    auto it = std::lower_bound(loads.begin(), loads.end(), e.from,
                               [](const auto& p, NodeId id) { return p.first < id; });
    if (it != loads.end() && it->first == e.from) it->second = e.value;
  }

  // Integrates in-system count and CPU load of `id` up to now (capped at the
  // horizon). Call before every change to the node's queue.
  void account(NodeId id) {
    auto& s = stats_[id];
    const auto& node = runtime_[id];
    const double until = std::min(now_, cfg_.horizon);
    if (until > s.last) {
      const double n = static_cast<double>(node.queue.size());
      const double load = node.cpu_reserved / node.cpu_capacity;
      s.in_system_area += n * (until - s.last);
      if (load > 0.0) {
        const double w = cfg_.bin_width;
        double t = s.last;
        auto b = static_cast<std::size_t>(t / w);
        while (t < until && b < s.bins.size()) {
          const double edge = std::min(static_cast<double>(b + 1) * w, until);
          if (edge > t) {
            s.bins[b] += load * (edge - t);
            t = edge;
          }
          ++b;
        }
      }
      s.last = until;
    }
  }

  MetricsReport finish() {
    if (terminated_ != in_.requests.size()) {
      throw std::logic_error("simulation ended with unterminated requests");
    }
    now_ = cfg_.horizon;
    MetricsReport rep;
    rep.seed = in_.seed;
    rep.scenario_digest = in_.scenario_digest;
    rep.strategy = to_string(cfg_.strategy);
    rep.horizon = cfg_.horizon;
    rep.bin_width = cfg_.bin_width;
    rep.emitted = in_.requests.size();
    double latency_sum = 0.0;
    for (const auto& j : journeys_) {
      if (j.outcome == Outcome::Executed) {
        ++rep.executed;
        latency_sum += j.latency();
      } else {
        ++rep.dropped;
      }
    }
    rep.psi = rep.emitted == 0 ? 0.0
                               : static_cast<double>(rep.dropped) /
                                     static_cast<double>(rep.emitted);
    if (rep.executed > 0) {
      rep.phi_ms = latency_sum / static_cast<double>(rep.executed) * 1e3;
    }
    double tau_sum = 0.0;
    for (NodeId r : topo_.routers()) {
      account(r);
      auto& s = stats_[r];
      NodeReport n;
      n.id = r;
      n.name = topo_.node(r).name;
      n.cpu_capacity = runtime_[r].cpu_capacity;
      n.mem_capacity = runtime_[r].mem_capacity;
      double area = 0.0;
      for (std::size_t b = 0; b < s.bins.size(); ++b) {
        area += s.bins[b];
        const double lo = static_cast<double>(b) * cfg_.bin_width;
        const double width = std::min(lo + cfg_.bin_width, cfg_.horizon) - lo;
        s.bins[b] /= width;
      }
      n.avg_load = area / cfg_.horizon;
      n.avg_in_system = s.in_system_area / cfg_.horizon;
      n.peak_cpu_reserved = s.peak_cpu;
      n.peak_mem_reserved = s.peak_mem;
      n.executed = s.executed;
      n.dropped = s.dropped;
      n.series = std::move(s.bins);
      tau_sum += n.avg_load;
      rep.nodes.push_back(std::move(n));
    }
    rep.tau = tau_sum / static_cast<double>(topo_.router_count());
    if (cfg_.keep_journeys) rep.journeys = std::move(journeys_);
    return rep;
  }

  struct NodeStats {
    double last = 0.0;
    double in_system_area = 0.0;
    std::vector<double> bins;
    double peak_cpu = 0.0;
    double peak_mem = 0.0;
    std::uint64_t executed = 0;
    std::uint64_t dropped = 0;
  };

  const SimulationInput& in_;
  const Topology& topo_;
  EngineConfig cfg_;
  std::vector<int> service_index_;
  double cpu_mean_ = 0.0;
  std::vector<NodeRuntime> runtime_;
  std::vector<NodeStats> stats_;
  std::vector<std::optional<RandomStream>> draws_;
  std::vector<RequestJourney> journeys_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t next_sequence_ = 0;
  std::uint64_t terminated_ = 0;
  double now_ = 0.0;
};

}  // namespace detail

inline MetricsReport simulate(const SimulationInput& input) {
  return detail::Simulation(input).run();
}

}  // namespace c3po
