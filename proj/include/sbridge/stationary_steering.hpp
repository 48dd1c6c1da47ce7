#pragma once

// Stationary covariance maintenance: decide whether a target covariance can
// be held by state feedback u = -K x, and if so compute the minimum-power
// gain. With X = Sigma K^T the closed-loop Lyapunov constraint
//
//   (A - B K) Sigma + Sigma (A - B K)^T + B1 B1^T = 0
//
// becomes linear in X: B X^T + X B^T = A Sigma + Sigma A^T + B1 B1^T, and
// the expected power trace(K Sigma K^T) = trace(X^T Sigma^{-1} X) is a
// strictly convex quadratic, so the optimum is a single KKT linear solve.

#include <Eigen/Dense>

#include "sbridge/errors.hpp"

namespace sbridge {

struct StationaryProblem {
    StationaryProblem(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd b1,
                      Eigen::MatrixXd sigma);

    Eigen::MatrixXd A, B, B1;
    Eigen::MatrixXd sigma;  // symmetric positive definite target
};

struct FeasibilityReport {
    bool feasible = false;
    Eigen::MatrixXd X;        // least-squares certificate (n x m)
    double residual = 0.0;    // ||A Sigma + Sigma A^T + B1 B1^T - B X^T - X B^T||_F
    double threshold = 0.0;   // relative acceptance threshold used
};

struct StationaryGain {
    Eigen::MatrixXd K;     // m x n feedback gain
    double power = 0.0;    // trace(K Sigma K^T)
    double lyapunov_residual = 0.0;
    bool degenerate = false;  // KKT system was rank-deficient (multiplier side)
    int kkt_rank = 0;
    Eigen::VectorXd closed_loop_eig_real;
    bool stable = false;  // all closed-loop eigenvalues in the open left half plane
};

class InfeasibleStationaryError : public std::runtime_error {
  public:
    InfeasibleStationaryError(const std::string& msg, FeasibilityReport report)
        : std::runtime_error(msg), report_(std::move(report)) {}
    const FeasibilityReport& report() const { return report_; }

  private:
    FeasibilityReport report_;
};

FeasibilityReport check_feasibility(const StationaryProblem& prob);

// Throws InfeasibleStationaryError when check_feasibility rejects the target.
StationaryGain optimal_stationary_gain(const StationaryProblem& prob);

// Solves A X + X A^T + Q = 0 for symmetric Q via the Kronecker linear
// system; requires the spectrum of A to avoid mirrored pairs.
Eigen::MatrixXd solve_continuous_lyapunov(const Eigen::MatrixXd& A,
                                          const Eigen::MatrixXd& Q);

}  // namespace sbridge
