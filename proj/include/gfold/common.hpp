#pragma once

#include <Eigen/Dense>

#include <numbers>
#include <stdexcept>
#include <string>

namespace gfold {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr double sqrt2 = std::numbers::sqrt2;

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Grid too coarse, index out of the truncation, and similar resolution issues.
struct ResolutionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct BracketError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require_shape(Index got, Index want, const char* what) {
  if (got != want)
    throw ShapeError(std::string(what) + ": expected length " + std::to_string(want) +
                     ", got " + std::to_string(got));
}

}  // namespace gfold
