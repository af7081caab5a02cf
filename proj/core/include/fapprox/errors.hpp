#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fapprox {

/// Thrown when an exhaustive computation would exceed its configured budget
/// (index-set caps, lower-set enumeration limits, quadrature node caps).
class budget_error : public std::runtime_error {
public:
  explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when an iterative solver produces non-finite iterates.
class divergence_error : public std::runtime_error {
public:
  divergence_error(const std::string& what, std::int64_t iterations)
      : std::runtime_error(what + " (iteration " + std::to_string(iterations) + ")"),
        iterations(iterations) {}

  std::int64_t iterations;
};

}  // namespace fapprox
