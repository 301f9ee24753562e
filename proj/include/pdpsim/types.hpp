#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pdpsim {

using Real = double;

using VecXd = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using MatXd = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using VecXi = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

using Count = std::int64_t;

/// Error in model text, rate-expression text, or CLI configuration.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string msg, std::size_t position)
      : std::runtime_error(std::move(msg)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;  // 1-based character or line position
};

/// Structural problem with a model: duplicate names, unbound identifiers,
/// invariant violations, regime incompatibility.
class ModelError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numeric domain error during evaluation (division by zero, 0^negative, ...).
class DomainError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Runtime failure inside a simulation kernel (negative propensity,
/// negative count, non-finite state). Guard trips are flags, not errors.
class SimulationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pdpsim
