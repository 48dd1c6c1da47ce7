#pragma once

#include <stdexcept>

namespace sbridge {

// Input asks for a regime this build intentionally does not cover
// (e.g. differing control and noise channels in the Gaussian solver).
class UnsupportedConfigurationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Iterative solver exhausted its budget; message carries the residual.
class SolverConvergenceError : public std::runtime_error {
  public:
    SolverConvergenceError(const std::string& message, double residual)
        : std::runtime_error(message), residual_(residual) {}
    double residual() const { return residual_; }

  private:
    double residual_;
};

}  // namespace sbridge
