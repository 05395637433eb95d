#pragma once

// Analytic workload model for a service router: aggregate birth/death rates,
// M/M/1 utilisation and stationary queue length, popularity-weighted resource
// consumption, and the probability with which a node should execute an
// arriving request so its induced load stays within capacity.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "c3po/errors.hpp"

namespace c3po {

using ServiceId = int;

struct ServiceSpec {
  ServiceId id = 0;
  double popularity_weight = 1.0;
  double mean_exec_time = 1.0;  // seconds
  double cpu_demand = 0.0;
  double mem_demand = 0.0;
  std::optional<double> arrival_rate;  // requests/second
};

using Catalog = std::vector<ServiceSpec>;

struct Rates {
  double lambda = 0.0;
  double mu = 0.0;
};

struct ResourceMeans {
  double cpu = 0.0;
  double mem = 0.0;
};

// Everything the execution-probability rule needs to know about one node.
struct WorkloadEstimate {
  double lambda = 0.0;
  double mu = 0.0;
  double cpu_capacity = 1.0;
  double cpu_mean = 0.0;
  double mem_capacity = 1.0;
  double mem_mean = 0.0;
};

inline void validate_service(const ServiceSpec& s) {
  if (!(s.mean_exec_time > 0.0)) {
    throw DomainError("service " + std::to_string(s.id) +
                      ": mean_exec_time must be > 0");
  }
  if (s.cpu_demand < 0.0 || s.mem_demand < 0.0) {
    throw DomainError("service " + std::to_string(s.id) +
                      ": resource demands must be >= 0");
  }
  if (s.popularity_weight < 0.0) {
    throw DomainError("service " + std::to_string(s.id) +
                      ": popularity_weight must be >= 0");
  }
  if (s.arrival_rate && *s.arrival_rate < 0.0) {
    throw DomainError("service " + std::to_string(s.id) +
                      ": arrival_rate must be >= 0");
  }
}

inline double total_weight(std::span<const ServiceSpec> catalog) {
  double sum = 0.0;
  for (const auto& s : catalog) sum += s.popularity_weight;
  return sum;
}

// Normalised popularities p_j; they sum to one.
inline std::vector<double> normalized_popularity(
    std::span<const ServiceSpec> catalog) {
  if (catalog.empty()) throw DomainError("empty catalog");
  const double total = total_weight(catalog);
  if (!(total > 0.0)) throw DomainError("catalog popularity weights are all zero");
  std::vector<double> p;
  p.reserve(catalog.size());
  for (const auto& s : catalog) p.push_back(s.popularity_weight / total);
  return p;
}

// Fills in lambda_j = p_j * lambda for every service.
inline Catalog with_arrival_rates(Catalog catalog, double total_lambda) {
  if (total_lambda < 0.0) throw DomainError("total arrival rate must be >= 0");
  const auto p = normalized_popularity(catalog);
  for (std::size_t j = 0; j < catalog.size(); ++j) {
    catalog[j].arrival_rate = p[j] * total_lambda;
  }
  return catalog;
}

// (sum of lambda_j, sum of 1/t_j). Every service must carry an arrival rate.
inline Rates aggregate_rates(std::span<const ServiceSpec> catalog) {
  if (catalog.empty()) throw DomainError("empty catalog");
  Rates r;
  for (const auto& s : catalog) {
    validate_service(s);
    if (!s.arrival_rate) {
      throw DomainError("service " + std::to_string(s.id) +
                        " has no arrival rate");
    }
    r.lambda += *s.arrival_rate;
    r.mu += 1.0 / s.mean_exec_time;
  }
  return r;
}

inline double utilization(double lambda, double mu) {
  if (!(mu > 0.0)) throw DomainError("service rate mu must be > 0");
  if (lambda < 0.0) throw DomainError("arrival rate lambda must be >= 0");
  return lambda / mu;
}

// Mean number in system of a stable M/M/1 queue.
inline double expected_queue_length(double rho) {
  if (rho < 0.0) throw DomainError("utilisation must be >= 0");
  if (!(rho < 1.0)) {
    throw UnstableSystemError("utilisation " + std::to_string(rho) +
                              " >= 1: queue grows without bound");
  }
  return rho / (1.0 - rho);
}

// Popularity-weighted mean CPU and memory demand (c'', m'').
inline ResourceMeans mean_consumption(std::span<const ServiceSpec> catalog) {
  const auto p = normalized_popularity(catalog);
  ResourceMeans m;
  for (std::size_t j = 0; j < catalog.size(); ++j) {
    validate_service(catalog[j]);
    m.cpu += p[j] * catalog[j].cpu_demand;
    m.mem += p[j] * catalog[j].mem_demand;
  }
  return m;
}

// Popularity-weighted mean execution time.
inline double mean_exec_time(std::span<const ServiceSpec> catalog) {
  const auto p = normalized_popularity(catalog);
  double t = 0.0;
  for (std::size_t j = 0; j < catalog.size(); ++j) {
    validate_service(catalog[j]);
    t += p[j] * catalog[j].mean_exec_time;
  }
  return t;
}

// Fraction of a resource's capacity that keeps l * mean below capacity once
// the utilisation is thinned: capacity / (capacity + mean). A resource that
// nothing consumes gives 1.
inline double capacity_ratio(double capacity, double mean) {
  return capacity / (capacity + mean);
}

// q = min(min(c'/(c'+c''), m'/(m'+m'')) * mu/lambda, 1). The tighter of the
// two resources decides. No arrivals means accept everything.
inline double execution_probability(const WorkloadEstimate& est) {
  if (!(est.cpu_capacity > 0.0) || !(est.mem_capacity > 0.0)) {
    throw DomainError("capacities must be > 0");
  }
  if (!(est.mu > 0.0)) throw DomainError("service rate mu must be > 0");
  if (est.lambda < 0.0) throw DomainError("arrival rate lambda must be >= 0");
  if (est.cpu_mean < 0.0 || est.mem_mean < 0.0) {
    throw DomainError("mean consumptions must be >= 0");
  }
  if (est.lambda == 0.0) return 1.0;
  const double bottleneck =
      std::min(capacity_ratio(est.cpu_capacity, est.cpu_mean),
               capacity_ratio(est.mem_capacity, est.mem_mean));
  return std::min(bottleneck * est.mu / est.lambda, 1.0);
}

}  // namespace c3po
