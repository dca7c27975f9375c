#pragma once

#include <stdexcept>
#include <string>

namespace epschar {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters (p not an odd prime, p < r, non-regular A, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An argument violates an operation's precondition (shape mismatch,
/// element outside a subgroup, sample outside its stratum, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A full enumeration would exceed the configured size budget.
class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, unsigned long long required)
      : Error(what + " (required " + std::to_string(required) + ")"),
        required_(required) {}
  unsigned long long required() const { return required_; }

 private:
  unsigned long long required_;
};

}  // namespace epschar
