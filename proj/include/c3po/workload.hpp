#pragma once

// Seeded request streams: Poisson arrivals (optionally with rate jitters),
// popularity-sampled services and exponential execution times.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "c3po/errors.hpp"
#include "c3po/queueing.hpp"
#include "c3po/random.hpp"
#include "c3po/topology.hpp"

namespace c3po {

struct JitterSpec {
  double start = 0.0;     // seconds
  double duration = 0.0;  // seconds
  double rate_multiplier = 1.0;

  double end() const { return start + duration; }
};

struct RequestEvent {
  std::uint64_t request_id = 0;
  double emit_time = 0.0;
  NodeId client = kNoNode;
  ServiceId service = 0;
  double exec_time = 0.0;  // drawn up front so every strategy sees the same work
};

namespace detail {
inline double next_after_gap(double t, double gap) {
  const double next = t + gap;
  return next > t ? next : std::nextafter(t, INFINITY);
}
}  // namespace detail

inline std::vector<double> poisson_stream(double rate, double horizon,
                                          std::uint64_t seed) {
  if (rate < 0.0) throw ConfigError("arrival rate must be >= 0");
  if (!(horizon > 0.0)) throw ConfigError("horizon must be > 0");
  std::vector<double> out;
  if (rate == 0.0) return out;
  out.reserve(static_cast<std::size_t>(rate * horizon * 1.05) + 16);
  RandomStream rng(seed);
  double t = 0.0;
  while (true) {
    t = detail::next_after_gap(t, -std::log(rng.open_uniform()) / rate);
    if (t >= horizon) break;
    out.push_back(t);
  }
  return out;
}

inline void validate_jitters(std::span<const JitterSpec> jitters, double horizon) {
  std::vector<JitterSpec> sorted(jitters.begin(), jitters.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const JitterSpec& a, const JitterSpec& b) { return a.start < b.start; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& j = sorted[i];
    if (!(j.duration > 0.0)) throw ConfigError("jitter duration must be > 0");
    if (j.rate_multiplier < 0.0) throw ConfigError("jitter rate multiplier must be >= 0");
    if (j.start < 0.0 || j.end() > horizon) {
      throw ConfigError("jitter window [" + std::to_string(j.start) + ", " +
                        std::to_string(j.end()) + ") lies outside the horizon");
    }
    if (i > 0 && j.start < sorted[i - 1].end()) {
      throw ConfigError("jitter windows overlap at t=" + std::to_string(j.start));
    }
  }
}

inline double rate_at(double base_rate, std::span<const JitterSpec> jitters, double t) {
  for (const auto& j : jitters) {
    if (t >= j.start && t < j.end()) return base_rate * j.rate_multiplier;
  }
  return base_rate;
}

// Piecewise-constant-rate Poisson process obtained by thinning a stream at
// the maximum rate, so a single seed drives the whole trace.
inline std::vector<double> with_jitters(double base_rate,
                                        std::span<const JitterSpec> jitters,
                                        double horizon, std::uint64_t seed) {
  validate_jitters(jitters, horizon);
  if (jitters.empty()) return poisson_stream(base_rate, horizon, seed);
  if (base_rate < 0.0) throw ConfigError("arrival rate must be >= 0");

  double peak = 1.0;
  for (const auto& j : jitters) peak = std::max(peak, j.rate_multiplier);
  const double max_rate = base_rate * peak;
  std::vector<double> out;
  if (max_rate == 0.0) return out;

  RandomStream rng(seed);
  double t = 0.0;
  while (true) {
    t = detail::next_after_gap(t, -std::log(rng.open_uniform()) / max_rate);
    if (t >= horizon) break;
    const double accept = rate_at(base_rate, jitters, t) / max_rate;
    if (rng.uniform() < accept) out.push_back(t);
  }
  return out;
}

// Inverse-CDF sampling over normalised popularity.
class ServiceSampler {
 public:
  explicit ServiceSampler(std::span<const ServiceSpec> catalog) {
    const auto p = normalized_popularity(catalog);
    double acc = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      acc += p[j];
      cdf_.push_back(acc);
      ids_.push_back(catalog[j].id);
    }
    // Rounding may leave the last entry a hair under 1.
    cdf_.back() = 1.0;
  }

  ServiceId sample(double draw) const {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), draw);
    if (it == cdf_.end()) --it;
    return ids_[static_cast<std::size_t>(it - cdf_.begin())];
  }

  std::size_t index_of_draw(double draw) const {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), draw);
    if (it == cdf_.end()) --it;
    return static_cast<std::size_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
  std::vector<ServiceId> ids_;
};

inline ServiceId sample_service(std::span<const ServiceSpec> catalog, double draw) {
  return ServiceSampler(catalog).sample(draw);
}

// Inversion of the exponential CDF: -mean * ln(draw).
inline double exponential_exec_time(double mean, double draw) {
  return -mean * std::log(draw);
}

// Default catalog: Zipf popularity, per-service mean execution time drawn
// uniformly from a range once per scenario, constant CPU/memory demand.
struct CatalogSpec {
  int services = 100;
  double zipf_exponent = 0.8;
  double exec_time_min = 5e-3;  // seconds
  double exec_time_max = 5e-3;
  double cpu_demand = 0.25;
  double mem_demand = 0.1;
  Catalog explicit_services;  // used verbatim when nonempty
};

inline Catalog make_catalog(const CatalogSpec& spec, std::uint64_t seed) {
  if (!spec.explicit_services.empty()) {
    for (const auto& s : spec.explicit_services) validate_service(s);
    normalized_popularity(spec.explicit_services);
    return spec.explicit_services;
  }
  if (spec.services < 1) throw ConfigError("catalog needs at least one service");
  if (!(spec.exec_time_min > 0.0) || spec.exec_time_max < spec.exec_time_min) {
    throw ConfigError("catalog execution time range must satisfy 0 < min <= max");
  }
  if (spec.zipf_exponent < 0.0) throw ConfigError("zipf exponent must be >= 0");
  RandomStream rng(seed, Substream::Catalog);
  Catalog catalog;
  for (int j = 0; j < spec.services; ++j) {
    ServiceSpec s;
    s.id = j;
    s.popularity_weight = 1.0 / std::pow(static_cast<double>(j + 1), spec.zipf_exponent);
    s.mean_exec_time = spec.exec_time_min +
                       (spec.exec_time_max - spec.exec_time_min) * rng.uniform();
    s.cpu_demand = spec.cpu_demand;
    s.mem_demand = spec.mem_demand;
    validate_service(s);
    catalog.push_back(s);
  }
  return catalog;
}

struct ClientLoad {
  NodeId client = kNoNode;
  double base_rate = 0.0;
};

// Merged emission trace of all clients, ordered by (emit_time, client), with
// request ids assigned in that order. Each client uses its own arrival
// substream; service choice and execution time come from per-request draws.
inline std::vector<RequestEvent> generate_requests(
    std::span<const ClientLoad> clients, std::span<const JitterSpec> jitters,
    double horizon, std::span<const ServiceSpec> catalog, std::uint64_t seed) {
  const ServiceSampler sampler(catalog);
  std::vector<RequestEvent> all;
  for (std::size_t c = 0; c < clients.size(); ++c) {
    const auto times = with_jitters(clients[c].base_rate, jitters, horizon,
                                    derive_seed(seed, Substream::Arrivals, c));
    for (double t : times) {
      RequestEvent r;
      r.emit_time = t;
      r.client = clients[c].client;
      all.push_back(r);
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const RequestEvent& a, const RequestEvent& b) {
    return a.emit_time < b.emit_time ||
           (a.emit_time == b.emit_time && a.client < b.client);
  });
  RandomStream choice(seed, Substream::ServiceChoice);
  RandomStream exec(seed, Substream::ExecTime);
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto& r = all[i];
    r.request_id = i;
    const std::size_t j = sampler.index_of_draw(choice.uniform());
    r.service = catalog[j].id;
    r.exec_time = exponential_exec_time(catalog[j].mean_exec_time, exec.open_uniform());
  }
  return all;
}

}  // namespace c3po
