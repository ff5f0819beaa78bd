#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace ccyopt {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntVector = Eigen::VectorXi;
using IntMatrix = Eigen::MatrixXi;

// Raised when an input configuration is invalid (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a simulator produces unusable output (CLI exit code 3).
struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ccyopt
