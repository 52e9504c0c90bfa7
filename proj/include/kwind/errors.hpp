#pragma once

#include <stdexcept>
#include <string>

namespace kwind {

/// Invalid argument or configuration (CLI exit code 1).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation would exceed the configured memory budget.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, double required_mb, double budget_mb)
      : std::runtime_error(what), required_mb_(required_mb), budget_mb_(budget_mb) {}
  double required_mb() const { return required_mb_; }
  double budget_mb() const { return budget_mb_; }

 private:
  double required_mb_;
  double budget_mb_;
};

/// Quadrature or other numerical procedure failed to meet its tolerance.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double estimate = 0.0, double error_bound = 0.0)
      : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound) {}
  double estimate() const { return estimate_; }
  double error_bound() const { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

/// Input outside the domain where a formula or root bracket is valid.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Object is missing state required by an operation (e.g. discarded Krylov basis).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The thermal seed has (numerically) zero norm.
class DegenerateSeedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kwind
