#pragma once

// Finite-horizon minimum-energy steering of a linear stochastic system
// between Gaussian marginals, for control and noise entering through the
// same channel (B = B1). Two matrix Riccati flows
//
//   Pi' = -A^T Pi - Pi A + Pi B B^T Pi
//   H'  = -A^T H  - H A  - H B B^T H
//
// are coupled through Pi(0) + H(0) = Sigma0^{-1} and
// Pi(tf) + H(tf) = Sigma1^{-1}, solved by a damped boundary iteration.
// The optimal control is u(t, x) = -B^T Pi(t) x (plus a decoupled
// feedforward term when the endpoint means differ).

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "sbridge/errors.hpp"

namespace sbridge {

struct LinearSystem {
    LinearSystem(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd b1, double t_f);

    Eigen::MatrixXd A;   // n x n drift
    Eigen::MatrixXd B;   // n x m control channel
    Eigen::MatrixXd B1;  // n x m1 noise channel
    double t_f;

    std::size_t state_dim() const { return static_cast<std::size_t>(A.rows()); }
    bool same_channels() const;  // B == B1 entrywise
};

struct GaussianState {
    GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;  // symmetric positive definite
};

struct RiccatiSchedule {
    std::vector<double> times;
    std::vector<Eigen::MatrixXd> pi;     // Pi(t_k), symmetric
    std::vector<Eigen::MatrixXd> h;      // H(t_k), symmetric
    std::vector<Eigen::MatrixXd> sigma;  // closed-loop covariance path
    std::vector<Eigen::VectorXd> mean;   // closed-loop mean path
    std::vector<Eigen::VectorXd> u_ff;   // feedforward input, zero for zero means
    Eigen::MatrixXd input_matrix;        // B of the solved system

    double boundary_residual0 = 0.0;  // ||Pi(0)+H(0)-Sigma0^{-1}||_F
    double boundary_residual1 = 0.0;  // ||Pi(tf)+H(tf)-Sigma1^{-1}||_F
    int outer_iterations = 0;

    // Feedback gain K(t_k) = B^T Pi(t_k); control law u = u_ff - K (x - mean).
    Eigen::MatrixXd gain(std::size_t k) const { return input_matrix.transpose() * pi[k]; }
};

// Rank of (B, AB, ..., A^{n-1}B) by singular values with threshold
// n * eps * sigma_max.
int controllability_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// Throws UnsupportedConfigurationError when B != B1, std::invalid_argument
// when (A, B) is not controllable, SolverConvergenceError when the boundary
// iteration stalls.
RiccatiSchedule solve_gauss_bridge(const LinearSystem& sys, const GaussianState& start,
                                   const GaussianState& end, int n_grid, double tol);

// Integrates Sigma' = (A - B B^T Pi) Sigma + Sigma (.)^T + B1 B1^T from
// start.cov along the schedule grid (jointly with the Pi flow, so the
// stages stay consistent).
std::vector<Eigen::MatrixXd> covariance_path(const RiccatiSchedule& schedule,
                                             const LinearSystem& sys,
                                             const GaussianState& start);

// Trapezoidal integral of E|u|^2 = |u_ff|^2 + trace(K Sigma K^T) over the
// schedule grid.
double control_energy(const RiccatiSchedule& schedule,
                      const std::vector<Eigen::MatrixXd>& sigma_path);

}  // namespace sbridge
