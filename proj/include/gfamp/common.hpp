#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace gfamp {

using cxd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using IVec = Eigen::VectorXi;

// Invalid configuration or spec document (CLI exit code 1).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Incompatible array dimensions passed to a model/algorithm operation.
struct DimensionError : std::invalid_argument {
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// Non-finite value produced inside an iterative solve (CLI exit code 2).
// `entry` names the offending quantity and index, e.g. "X_hat(37,2)".
struct NumericalAbort : std::runtime_error {
  NumericalAbort(int iteration_, const std::string& entry_)
      : std::runtime_error("non-finite value at iteration " + std::to_string(iteration_) +
                           ", entry " + entry_),
        iteration(iteration_),
        entry(entry_) {}
  int iteration;
  std::string entry;
};

}  // namespace gfamp
