// c3po: run scenarios, validate scenario files, generate topologies.
//
// Exit codes: 0 ok, 1 runtime error, 2 usage or validation error.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "c3po/c3po.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct RunArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  int replicates = 0;  // 0: use the scenario's value
  std::string out = "out";
  std::string format;
  std::string strategy;
  unsigned jobs = 0;
};

struct TopoArgs {
  std::string kind;
  int rows = 10;
  int cols = 10;
  std::vector<int> client{0, 0};
  std::vector<int> server;
  int routers = 2;
  double cpu = 1.0;
  double mem = 1.0;
  double delay_ms = 1.0;
  std::string output;
};

void print_summary(const c3po::MetricsReport& r, int replicate) {
  char phi[32] = "n/a";
  if (r.phi_ms) std::snprintf(phi, sizeof(phi), "%.3f", *r.phi_ms);
  std::printf("replicate %d seed %llu  tau %.6f  phi_ms %s  psi %.6f  (%llu emitted, %llu dropped)\n",
              replicate, static_cast<unsigned long long>(r.seed), r.tau, phi, r.psi,
              static_cast<unsigned long long>(r.emitted),
              static_cast<unsigned long long>(r.dropped));
}

std::string replicate_dir(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "replicate_%03d", i);
  return buf;
}

int cmd_run(const RunArgs& a) {
  c3po::ScenarioConfig s = c3po::load_scenario(a.scenario);
  if (!a.format.empty()) s.output.format = a.format;
  if (!a.strategy.empty()) s.strategy = c3po::parse_strategy(a.strategy);
  if (a.seed) s.seed = *a.seed;
  const int replicates = a.replicates > 0 ? a.replicates : s.replicates;
  if (replicates < 1) throw c3po::ConfigError("replicates must be >= 1");

  std::vector<std::string> warnings;
  c3po::validate_scenario(s, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(replicates));
  for (int i = 0; i < replicates; ++i) {
    seeds[static_cast<std::size_t>(i)] =
        replicates == 1 ? s.seed : c3po::replicate_seed(s.seed, i);
  }

  // Workers each own whole runs; results are merged in replicate order.
  std::vector<c3po::MetricsReport> reports(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  unsigned jobs = a.jobs ? a.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(seeds.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < jobs; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
          try {
            reports[i] = c3po::run_scenario(s, seeds[i]);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const fs::path out = a.out;
  if (replicates == 1) {
    c3po::emit(reports[0], s.output.format, out, s.output.series_nodes, 0);
    print_summary(reports[0], 0);
  } else {
    for (int i = 0; i < replicates; ++i) {
      const auto& r = reports[static_cast<std::size_t>(i)];
      c3po::emit(r, s.output.format, out / replicate_dir(i), s.output.series_nodes, i);
    }
    fs::create_directories(out);
    c3po::write_summary_csv(out / "summary.csv", reports);
    if (s.output.format == "json") {
      nlohmann::json all = nlohmann::json::array();
      for (const auto& r : reports) all.push_back(c3po::report_to_json(r));
      std::ofstream f(out / "summary.json", std::ios::binary | std::ios::trunc);
      f << all.dump(2) << '\n';
      if (!f) throw std::runtime_error("I/O error writing '" + (out / "summary.json").string() + "'");
    }
    for (int i = 0; i < replicates; ++i) print_summary(reports[static_cast<std::size_t>(i)], i);
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  const c3po::ScenarioConfig s = c3po::load_scenario(path);
  std::vector<std::string> warnings;
  c3po::validate_scenario(s, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  std::cout << path << ": ok (digest " << c3po::scenario_digest(s) << ")\n";
  return 0;
}

c3po::GridCoord coord(const std::vector<int>& v, const char* what) {
  if (v.size() != 2) throw c3po::ConfigError(std::string(what) + " needs two integers: row col");
  return {v[0], v[1]};
}

int cmd_topo_gen(const TopoArgs& a) {
  c3po::CapacityProfile profile{a.cpu, a.mem, a.delay_ms * 1e-3};
  c3po::Topology t = [&] {
    if (a.kind == "grid") {
      const c3po::GridCoord server =
          a.server.empty() ? c3po::GridCoord{a.rows - 1, a.cols - 1} : coord(a.server, "--server");
      return c3po::make_grid(a.rows, a.cols, profile, coord(a.client, "--client"), server);
    }
    return c3po::make_line(a.routers, profile);
  }();
  if (a.output.empty() || a.output == "-") {
    c3po::write_topology(std::cout, t);
  } else {
    std::ofstream f(a.output, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + a.output + "'");
    c3po::write_topology(f, t);
    if (!f) throw std::runtime_error("I/O error writing '" + a.output + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator for in-network computation congestion control"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write reports");
  run_cmd->add_option("--scenario", run.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run.seed, "Base seed (overrides the scenario)");
  run_cmd->add_option("--replicates", run.replicates, "Independent runs with derived seeds")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", run.out, "Output directory")->capture_default_str();
  run_cmd->add_option("--format", run.format, "Summary format")->check(CLI::IsMember({"csv", "json"}));
  run_cmd->add_option("--strategy", run.strategy, "Override the scenario strategy")
      ->check(CLI::IsMember({"none", "passive", "proactive"}));
  run_cmd->add_option("--jobs", run.jobs, "Worker threads for replicates (default: all cores)");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file without running it");
  validate_cmd->add_option("--scenario", validate_path, "Scenario file")->required()->check(CLI::ExistingFile);

  TopoArgs topo;
  auto* topo_cmd = app.add_subcommand("topo", "Topology utilities");
  topo_cmd->require_subcommand(1);
  auto* gen_cmd = topo_cmd->add_subcommand("gen", "Write a generated topology file");
  gen_cmd->add_option("kind", topo.kind, "grid or line")->required()->check(CLI::IsMember({"grid", "line"}));
  gen_cmd->add_option("--rows", topo.rows, "Grid rows")->capture_default_str();
  gen_cmd->add_option("--cols", topo.cols, "Grid columns")->capture_default_str();
  gen_cmd->add_option("--client", topo.client, "Grid client attachment: row col")->expected(2);
  gen_cmd->add_option("--server", topo.server, "Grid server attachment: row col (default: far corner)")
      ->expected(2);
  gen_cmd->add_option("--routers", topo.routers, "Line length")->capture_default_str();
  gen_cmd->add_option("--cpu", topo.cpu, "Router CPU capacity")->capture_default_str();
  gen_cmd->add_option("--mem", topo.mem, "Router memory capacity")->capture_default_str();
  gen_cmd->add_option("--delay-ms", topo.delay_ms, "Link delay in ms")->capture_default_str();
  gen_cmd->add_option("-o,--output", topo.output, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*validate_cmd) return cmd_validate(validate_path);
    if (*gen_cmd) return cmd_topo_gen(topo);
  } catch (const c3po::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const c3po::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
