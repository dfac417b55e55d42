#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bseries {

// Input outside the domain of an operation (e.g. bminus of the empty forest).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Requested grade exceeds the configured maximum order.
struct CapacityError : std::length_error {
  using std::length_error::length_error;
};

struct ParseError : std::invalid_argument {
  ParseError(const std::string& what, std::size_t pos)
      : std::invalid_argument(what + " at position " + std::to_string(pos)), position(pos) {}
  std::size_t position;
};

// Fixed-point iteration failed to converge.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& what, double res)
      : std::runtime_error(what + " (residual " + std::to_string(res) + ")"), residual(res) {}
  double residual;
};

}  // namespace bseries
