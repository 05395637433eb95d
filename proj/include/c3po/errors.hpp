#pragma once

#include <stdexcept>
#include <string>

namespace c3po {

// Invalid numeric input to an analytic function (empty catalog, nonpositive
// rate or capacity, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Queueing formula evaluated at or beyond rho = 1.
class UnstableSystemError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Bad scenario, topology or generator parameters. Reported before any
// simulation work starts.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Caller broke a documented precondition (non-monotone clock, unknown node).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace c3po
