#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "c3po/engine.hpp"
#include "c3po/report_io.hpp"
#include "c3po/scenario.hpp"

namespace c3po {
namespace {

Catalog one_service(double exec, double cpu, double mem) {
  ServiceSpec s;
  s.id = 0;
  s.mean_exec_time = exec;
  s.cpu_demand = cpu;
  s.mem_demand = mem;
  return {s};
}

RequestEvent request(std::uint64_t id, double t, NodeId client, double exec) {
  RequestEvent r;
  r.request_id = id;
  r.emit_time = t;
  r.client = client;
  r.exec_time = exec;
  return r;
}

MetricsReport simulate_with(const Topology& topo, Catalog catalog,
                            std::vector<RequestEvent> reqs, EngineConfig cfg) {
  SimulationInput in;
  in.topology = &topo;
  in.catalog = std::move(catalog);
  in.requests = std::move(reqs);
  in.config = cfg;
  return simulate(in);
}

EngineConfig config(Strategy s, double horizon) {
  EngineConfig c;
  c.strategy = s;
  c.horizon = horizon;
  c.keep_journeys = true;
  return c;
}

TEST(Engine, EmptyWorkload) {
  const auto topo = make_line(2, {});
  for (auto s : {Strategy::None, Strategy::Passive, Strategy::Proactive}) {
    const auto r = simulate_with(topo, one_service(1e-3, 0.1, 0.1), {}, config(s, 0.5));
    EXPECT_EQ(r.emitted, 0u);
    EXPECT_EQ(r.psi, 0.0);
    EXPECT_FALSE(r.phi_ms.has_value());
    EXPECT_EQ(r.tau, 0.0);
  }
}

TEST(Engine, SingleRequestLatencyIsSumOfDelays) {
  const auto topo = make_line(1, {1.0, 1.0, 1e-3});
  const NodeId client = topo.id_of("client");
  for (auto s : {Strategy::None, Strategy::Passive, Strategy::Proactive}) {
    const auto r = simulate_with(topo, one_service(2e-3, 0.1, 0.1),
                                 {request(0, 0.0, client, 2e-3)}, config(s, 0.01));
    ASSERT_TRUE(r.phi_ms.has_value());
    EXPECT_NEAR(*r.phi_ms, 4.0, 1e-9) << to_string(s);
    EXPECT_EQ(r.executed, 1u);
  }
}

TEST(Engine, FifoSingleExecutionUnit) {
  const auto topo = make_line(1, {});
  const NodeId client = topo.id_of("client");
  const auto r = simulate_with(topo, one_service(1e-3, 0.1, 0.1),
                               {request(0, 0.0, client, 1e-3), request(1, 0.0, client, 1e-3)},
                               config(Strategy::None, 0.01));
  ASSERT_EQ(r.journeys.size(), 2u);
  const auto& a = r.journeys[0];
  const auto& b = r.journeys[1];
  EXPECT_NEAR(a.complete_time - a.admit_time, 1e-3, 1e-12);
  EXPECT_NEAR(b.complete_time - a.admit_time, 2e-3, 1e-12);
}

TEST(Engine, LoadAccountingOfOneBusyNode) {
  // One request in system for 10 ms of a 20 ms run at c = c'.
  const auto topo = make_line(1, {});
  const NodeId client = topo.id_of("client");
  auto cfg = config(Strategy::None, 0.02);
  const auto r = simulate_with(topo, one_service(10e-3, 1.0, 0.1),
                               {request(0, 0.0, client, 10e-3)}, cfg);
  const auto& n1 = r.node("n1");
  EXPECT_NEAR(n1.avg_load, 0.5, 1e-9);
  for (std::size_t b = 0; b < n1.series.size(); ++b) {
    const double want = (b >= 1 && b < 11) ? 1.0 : 0.0;
    EXPECT_NEAR(n1.series[b], want, 1e-9) << b;
  }
}

NodeRuntime runtime(NodeId id, double cpu_reserved, double mem_reserved = 0.0) {
  NodeRuntime n;
  n.node = id;
  n.cpu_capacity = 1.0;
  n.mem_capacity = 1.0;
  n.cpu_reserved = cpu_reserved;
  n.mem_reserved = mem_reserved;
  return n;
}

TEST(HandleArrival, None) {
  EXPECT_EQ(handle_arrival_none(runtime(0, 0.0), {0.5, 0.5}), Disposition{Admit{}});
  EXPECT_EQ(handle_arrival_none(runtime(0, 1.0), {0.1, 0.1}), Disposition{Drop{}});
  EXPECT_EQ(handle_arrival_none(runtime(0, 0.0), {1.5, 0.1}), Disposition{Drop{}});
  EXPECT_EQ(handle_arrival_none(runtime(0, 0.0, 0.95), {0.1, 0.1}), Disposition{Drop{}});
}

TEST(HandleArrival, Passive) {
  const auto topo = make_line(2, {});
  const NodeId n1 = topo.id_of("n1"), n2 = topo.id_of("n2");
  EXPECT_EQ(handle_arrival_passive(runtime(n1, 0.0), {0.5, 0.5}, topo), Disposition{Admit{}});
  EXPECT_EQ(handle_arrival_passive(runtime(n1, 1.0), {0.5, 0.5}, topo), Disposition{Forward{n2}});
  EXPECT_EQ(handle_arrival_passive(runtime(n2, 1.0), {0.5, 0.5}, topo), Disposition{Drop{}});
}

NodeRuntime proactive_runtime(NodeId id, double q_lambda) {
  NodeRuntime n = runtime(id, 5.0);  // far over capacity
  ControllerConfig cc;
  cc.k = 8;
  cc.init.lambda = q_lambda;
  cc.init.mu = 1.0;
  cc.init.cpu_mean = 0.0;
  cc.pin_estimates = true;
  n.controller.emplace(cc);
  return n;
}

TEST(HandleArrival, ProactiveExecuteIgnoresInstantaneousLoad) {
  auto n = proactive_runtime(0, 0.5);  // q = 1
  const std::vector<NodeId> visited{0};
  EXPECT_EQ(handle_arrival_proactive(n, visited, 0.0, 0.99), Disposition{Admit{}});
}

TEST(HandleArrival, ProactiveForwardsToLightestUnvisited) {
  auto n = proactive_runtime(0, 1e9);  // q ~ 0
  n.neighbor_loads = {{1, 0.9}, {2, 0.2}, {3, 0.5}};
  std::vector<NodeId> visited{0};
  EXPECT_EQ(handle_arrival_proactive(n, visited, 0.0, 0.5), Disposition{Forward{2}});
  visited.push_back(2);
  EXPECT_EQ(handle_arrival_proactive(n, visited, 0.1, 0.5), Disposition{Forward{3}});
  visited = {0, 1, 2, 3};
  EXPECT_EQ(handle_arrival_proactive(n, visited, 0.2, 0.5), Disposition{Admit{}});
}

TEST(HandleArrival, ProactiveTiesGoToSmallestId) {
  auto n = proactive_runtime(0, 1e9);
  n.neighbor_loads = {{4, 0.3}, {7, 0.3}};
  EXPECT_EQ(handle_arrival_proactive(n, std::vector<NodeId>{0}, 0.0, 0.5), Disposition{Forward{4}});
}

ScenarioConfig grid_scenario(Strategy s, double rate, std::uint64_t seed) {
  ScenarioConfig c;
  c.seed = seed;
  c.strategy = s;
  c.topology.generator = "grid";
  c.topology.rows = 5;
  c.topology.cols = 5;
  c.topology.server_at = {4, 4};
  c.workload.base_rate = rate;
  c.workload.horizon_s = 2.0;
  c.workload.catalog.services = 20;
  c.workload.catalog.exec_time_min = 5e-3;
  c.workload.catalog.exec_time_max = 15e-3;
  c.workload.catalog.cpu_demand = 0.3;
  c.workload.catalog.mem_demand = 0.15;
  c.controller.k = 64;
  c.metrics.bin_ms = 10;
  c.metrics.keep_journeys = true;
  return c;
}

struct Case {
  Strategy strategy;
  double rate;
};

void PrintTo(const Case& c, std::ostream* os) { *os << to_string(c.strategy) << '@' << c.rate; }

class EngineProperty : public ::testing::TestWithParam<Case> {};

TEST_P(EngineProperty, ConservationSafetyAndForwarding) {
  const auto [strategy, rate] = GetParam();
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto sc = grid_scenario(strategy, rate, seed);
    const auto topo = build_topology(sc);
    const auto r = run_scenario(sc, seed);
    ASSERT_GT(r.emitted, 0u);
    EXPECT_EQ(r.executed + r.dropped, r.emitted);
    std::uint64_t per_node_exec = 0, per_node_drop = 0;
    for (const auto& n : r.nodes) {
      per_node_exec += n.executed;
      per_node_drop += n.dropped;
      if (strategy != Strategy::Proactive) {
        EXPECT_LE(n.peak_cpu_reserved, n.cpu_capacity) << n.name;
        EXPECT_LE(n.peak_mem_reserved, n.mem_capacity) << n.name;
      }
    }
    EXPECT_EQ(per_node_exec, r.executed);
    EXPECT_EQ(per_node_drop, r.dropped);
    if (strategy == Strategy::Proactive) {
      EXPECT_EQ(r.dropped, 0u);
    }

    const NodeId edge = topo.edge_router(topo.clients()[0]);
    const Path shortest = topo.path_to_server(edge);
    std::uint64_t executed = 0;
    double latency = 0.0;
    for (const auto& j : r.journeys) {
      ASSERT_NE(j.outcome, Outcome::Pending);
      ASSERT_FALSE(j.hops.empty());
      EXPECT_EQ(j.hops.front(), edge);
      EXPECT_EQ(j.hops.back(), j.at);
      if (j.outcome == Outcome::Executed) {
        ++executed;
        latency += j.latency();
        EXPECT_GE(j.admit_time, j.emit_time);
        EXPECT_GT(j.complete_time, j.admit_time);
        EXPECT_GT(j.delivered_time, j.complete_time);
      }
      if (strategy == Strategy::Proactive) {
        std::set<NodeId> seen(j.hops.begin(), j.hops.end());
        EXPECT_EQ(seen.size(), j.hops.size());
      } else {
        ASSERT_LE(j.hops.size(), shortest.size() - 1);
        for (std::size_t h = 0; h < j.hops.size(); ++h) EXPECT_EQ(j.hops[h], shortest[h]);
      }
      if (strategy == Strategy::None) {
        EXPECT_EQ(j.hops.size(), 1u);
      }
    }
    EXPECT_EQ(executed, r.executed);
    EXPECT_EQ(r.executed + r.dropped, r.emitted);
    EXPECT_NEAR(r.psi, static_cast<double>(r.dropped) / static_cast<double>(r.emitted), 1e-15);
    if (executed > 0) {
      EXPECT_NEAR(*r.phi_ms, latency / static_cast<double>(executed) * 1e3, 1e-9);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(
    StrategiesAndLoads, EngineProperty,
    ::testing::Values(Case{Strategy::None, 100}, Case{Strategy::None, 600},
                      Case{Strategy::Passive, 100}, Case{Strategy::Passive, 600},
                      Case{Strategy::Proactive, 100}, Case{Strategy::Proactive, 600}),
    [](const auto& info) {
      return to_string(info.param.strategy) + "_" + std::to_string(static_cast<int>(info.param.rate));
    });

TEST(EngineProperty, OverloadedBaselinesDrop) {
  EXPECT_GT(run_scenario(grid_scenario(Strategy::None, 600, 1)).dropped, 0u);
  EXPECT_GT(run_scenario(grid_scenario(Strategy::Passive, 600, 1)).dropped, 0u);
}

TEST(EngineProperty, StrategiesSeeIdenticalEmissionTrace) {
  const auto a = prepare_run(grid_scenario(Strategy::None, 400, 9), 9);
  const auto b = prepare_run(grid_scenario(Strategy::Proactive, 400, 9), 9);
  ASSERT_EQ(a.input.requests.size(), b.input.requests.size());
  for (std::size_t i = 0; i < a.input.requests.size(); ++i) {
    const auto& x = a.input.requests[i];
    const auto& y = b.input.requests[i];
    ASSERT_EQ(x.emit_time, y.emit_time);
    ASSERT_EQ(x.client, y.client);
    ASSERT_EQ(x.service, y.service);
    ASSERT_EQ(x.exec_time, y.exec_time);
  }
}

TEST(EngineProperty, SameSeedSameReport) {
  for (auto s : {Strategy::None, Strategy::Passive, Strategy::Proactive}) {
    const auto sc = grid_scenario(s, 500, 4);
    EXPECT_EQ(report_to_json(run_scenario(sc)).dump(), report_to_json(run_scenario(sc)).dump());
  }
}

ScenarioConfig single_node(double lambda, double mu, double horizon) {
  ScenarioConfig c;
  c.seed = 17;
  c.strategy = Strategy::Proactive;
  c.topology.routers = 1;
  c.topology.cpu = 1e6;
  c.topology.mem = 1e6;
  c.workload.base_rate = lambda;
  c.workload.horizon_s = horizon;
  c.workload.catalog.services = 1;
  c.workload.catalog.exec_time_min = c.workload.catalog.exec_time_max = 1.0 / mu;
  c.controller.pin_estimates = true;
  c.controller.initial.lambda = lambda;
  c.controller.initial.mu = mu;
  c.metrics.bin_ms = 1000;
  return c;
}

TEST(EngineOracle, MM1HalfLoad) {
  const auto r = run_scenario(single_node(500, 1000, 420));
  EXPECT_GT(r.emitted, 200000u);
  EXPECT_NEAR(r.nodes[0].avg_in_system, expected_queue_length(0.5), 0.1);
}

TEST(EngineOracle, PinnedControllerThinsStream) {
  // Two routers; n1 executes with a fixed q and forwards the rest to n2,
  // which has nowhere else to go and admits.
  ScenarioConfig c;
  c.seed = 23;
  c.strategy = Strategy::Proactive;
  c.topology.routers = 2;
  c.workload.base_rate = 2000;
  c.workload.horizon_s = 20;
  c.workload.catalog.services = 1;
  c.workload.catalog.exec_time_min = c.workload.catalog.exec_time_max = 1e-3;
  c.workload.catalog.cpu_demand = 1.0;
  c.workload.catalog.mem_demand = 0.0;
  c.controller.pin_estimates = true;
  c.controller.initial.lambda = 2000;
  c.controller.initial.mu = 1000;
  c.controller.initial.cpu_mean = 1.0;
  c.controller.initial.mem_mean = 0.0;
  c.metrics.bin_ms = 1000;
  const double q = execution_probability({2000, 1000, 1.0, 1.0, 1.0, 0.0});
  ASSERT_DOUBLE_EQ(q, 0.25);
  const auto r = run_scenario(c);
  const double n = static_cast<double>(r.emitted);
  const double at_n1 = static_cast<double>(r.node("n1").executed);
  EXPECT_NEAR(at_n1, q * n, 3.0 * std::sqrt(n * q * (1 - q)));
  EXPECT_EQ(r.node("n2").executed, r.emitted - r.node("n1").executed);
  // Thinned Poisson stream at n1: rho = q * lambda / mu = 0.5.
  EXPECT_NEAR(r.node("n1").avg_in_system, 1.0, 0.1);
}

TEST(Engine, RejectsInvalidInput) {
  const auto topo = make_line(1, {});
  const NodeId client = topo.id_of("client");
  EXPECT_THROW(simulate_with(topo, one_service(1e-3, 0, 0), {request(0, 2.0, client, 1e-3)},
                             config(Strategy::None, 1.0)),
               ConfigError);
  EXPECT_THROW(simulate_with(topo, {}, {}, config(Strategy::None, 1.0)), ConfigError);
  EXPECT_THROW(simulate_with(topo, one_service(1e-3, 0, 0),
                             {request(0, 0.0, topo.id_of("n1"), 1e-3)}, config(Strategy::None, 1.0)),
               ConfigError);
  auto bad = config(Strategy::Proactive, 1.0);
  bad.k = 1;
  EXPECT_THROW(simulate_with(topo, one_service(1e-3, 0, 0), {}, bad), ConfigError);
}

}  // namespace
}  // namespace c3po
