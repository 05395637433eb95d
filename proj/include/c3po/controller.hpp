#pragma once

// Per-node proactive congestion controller. Keeps the k most recent arrival
// timestamps, execution times and CPU/memory consumptions, estimates the
// arrival rate in O(1) per request, and decides per arrival whether to execute
// locally (with probability q) or forward.
//
// Arrivals and completions advance separate indices, so each buffer family
// wraps on its own cadence. lambda_prev and {mu, c'', m''} are only refreshed
// on a wrap, each with an equal-weight exponential mean of history and the
// latest window.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "c3po/circular_buffer.hpp"
#include "c3po/errors.hpp"
#include "c3po/queueing.hpp"

namespace c3po {

struct InitialEstimates {
  double lambda = 0.0;       // reported until two arrivals have been seen
  double lambda_prev = 0.0;  // lambda'; 0 makes the first window conservative-eligible
  double mu = 1.0;
  double cpu_mean = 0.0;
  double mem_mean = 0.0;
};

struct ControllerConfig {
  std::size_t k = 500;
  double cpu_capacity = 1.0;
  double mem_capacity = 1.0;
  InitialEstimates init;
  // Freeze every estimate at `init` and never boost lambda. Used to drive a
  // node with a fixed q.
  bool pin_estimates = false;
};

// Warm start from catalog ground truth: mu = 1 / mean exec time, c'' and m''
// the popularity-weighted means, lambda' = 0.
inline InitialEstimates estimates_from_catalog(std::span<const ServiceSpec> catalog) {
  InitialEstimates init;
  init.mu = 1.0 / mean_exec_time(catalog);
  const auto means = mean_consumption(catalog);
  init.cpu_mean = means.cpu;
  init.mem_mean = means.mem;
  return init;
}

enum class Action { Execute, Forward };

struct ArrivalDecision {
  Action action = Action::Execute;
  double q_used = 1.0;
  bool conservative = false;
  double lambda = 0.0;  // unboosted estimate for this arrival
};

class Controller {
 public:
  explicit Controller(const ControllerConfig& config)
      : config_(config),
        arrivals_(checked_k(config.k)),
        exec_times_(config.k),
        cpu_used_(config.k),
        mem_used_(config.k),
        lambda_(config.init.lambda),
        lambda_prev_(config.init.lambda_prev),
        mu_(config.init.mu),
        cpu_mean_(config.init.cpu_mean),
        mem_mean_(config.init.mem_mean) {
    if (!(config.cpu_capacity > 0.0) || !(config.mem_capacity > 0.0)) {
      throw ConfigError("controller capacities must be > 0");
    }
    if (!(config.init.mu > 0.0)) throw ConfigError("initial mu must be > 0");
    if (config.init.lambda < 0.0 || config.init.lambda_prev < 0.0 ||
        config.init.cpu_mean < 0.0 || config.init.mem_mean < 0.0) {
      throw ConfigError("initial estimates must be >= 0");
    }
  }

  // Records `now` into the arrival ring and returns the mean arrival rate over
  // the buffered timestamps. The interval sum is updated in O(1): drop the
  // oldest interval, add the newest.
  double mean_rate_incremental(double now) {
    if (seen_ > 0 && now < arrivals_[arrivals_.newest_index()]) {
      throw ContractViolation("arrival timestamp " + std::to_string(now) +
                              " precedes previous arrival");
    }
    const std::size_t k = arrivals_.capacity();
    const std::size_t i = arrivals_.write_index();
    if (arrivals_.filled()) {
      const double y = arrivals_[(i + 1) % k] - arrivals_[i];
      const double z = now - arrivals_[(i + k - 1) % k];
      interval_sum_ = interval_sum_ - y + z;
    } else if (seen_ > 0) {
      interval_sum_ += now - arrivals_[(i + k - 1) % k];
    }
    const bool wrapped = arrivals_.push(now);
    ++seen_;
    if (wrapped) {
      // Telescoped sum; stops rounding drift from accumulating across windows.
      interval_sum_ = arrivals_[arrivals_.newest_index()] -
                      arrivals_[arrivals_.oldest_index()];
    }

    const std::size_t stored = arrivals_.size();
    if (stored >= 2 && interval_sum_ > 0.0) {
      lambda_ = static_cast<double>(stored - 1) / interval_sum_;
    }
    // Fewer than two timestamps, or all equal: keep the previous estimate.
    return lambda_;
  }

  ArrivalDecision on_arrival(double now, double uniform_draw) {
    if (!(uniform_draw >= 0.0 && uniform_draw < 1.0)) {
      throw ContractViolation("uniform draw must lie in [0, 1)");
    }
    const double measured = mean_rate_incremental(now);
    ArrivalDecision d;
    if (config_.pin_estimates) {
      d.lambda = config_.init.lambda;
      d.q_used = execution_probability(estimate_with(d.lambda));
    } else {
      d.lambda = measured;
      const double delta = std::max(0.0, measured - lambda_prev_);
      d.conservative = delta > 0.0;
      d.q_used = execution_probability(estimate_with(measured + delta));
    }
    d.action = uniform_draw < d.q_used ? Action::Execute : Action::Forward;
    if (arrivals_.write_index() == 0 && !config_.pin_estimates) {
      lambda_prev_ = 0.5 * (lambda_prev_ + d.lambda);
    }
    return d;
  }

  void on_complete(double exec_time, double cpu_used, double mem_used) {
    if (!(exec_time > 0.0)) {
      throw ContractViolation("execution time must be > 0");
    }
    if (cpu_used < 0.0 || mem_used < 0.0) {
      throw ContractViolation("resource consumption must be >= 0");
    }
    exec_times_.push(exec_time);
    cpu_used_.push(cpu_used);
    const bool wrapped = mem_used_.push(mem_used);
    if (wrapped && !config_.pin_estimates) {
      mu_ = 0.5 * (mu_ + 1.0 / exec_times_.mean());
      cpu_mean_ = 0.5 * (cpu_mean_ + cpu_used_.mean());
      mem_mean_ = 0.5 * (mem_mean_ + mem_used_.mean());
    }
  }

  // Current estimates, with the last measured (unboosted) arrival rate.
  WorkloadEstimate estimate() const { return estimate_with(lambda_); }

  std::size_t k() const { return arrivals_.capacity(); }
  std::size_t arrival_index() const { return arrivals_.write_index(); }
  std::size_t completion_index() const { return exec_times_.write_index(); }
  double lambda() const { return lambda_; }
  double lambda_prev() const { return lambda_prev_; }
  double mu() const { return mu_; }
  double cpu_mean() const { return cpu_mean_; }
  double mem_mean() const { return mem_mean_; }
  double interval_sum() const { return interval_sum_; }
  double cpu_capacity() const { return config_.cpu_capacity; }
  double mem_capacity() const { return config_.mem_capacity; }
  const CircularBuffer<double>& arrival_buffer() const { return arrivals_; }
  const ControllerConfig& config() const { return config_; }

 private:
  static std::size_t checked_k(std::size_t k) {
    if (k < 2) {
      throw ConfigError("controller buffer size k must be >= 2 (got " +
                        std::to_string(k) + ")");
    }
    return k;
  }

  WorkloadEstimate estimate_with(double lambda) const {
    if (config_.pin_estimates) {
      return {lambda, config_.init.mu, config_.cpu_capacity,
              config_.init.cpu_mean, config_.mem_capacity,
              config_.init.mem_mean};
    }
    return {lambda, mu_, config_.cpu_capacity, cpu_mean_,
            config_.mem_capacity, mem_mean_};
  }

  ControllerConfig config_;
  CircularBuffer<double> arrivals_;
  CircularBuffer<double> exec_times_;
  CircularBuffer<double> cpu_used_;
  CircularBuffer<double> mem_used_;
  std::size_t seen_ = 0;
  double interval_sum_ = 0.0;
  double lambda_;
  double lambda_prev_;
  double mu_;
  double cpu_mean_;
  double mem_mean_;
};

}  // namespace c3po
