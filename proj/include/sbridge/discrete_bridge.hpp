#pragma once

// Discrete Schrödinger system solved by the four-map Fortet-Sinkhorn cycle
//
//   phihat(T) = pi^T phihat(0)
//   phi(T)    = pT / phihat(T)
//   phi(0)    = pi phi(T)
//   phihat(0) = p0 / phi(0)
//
// with componentwise divisions, stopped on the Hilbert distance between
// successive phihat(0) iterates. Cone-metric theory gives a per-cycle
// contraction certificate of birkhoff_ratio(pi)^2 for strictly positive
// priors.

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "sbridge/errors.hpp"
#include "sbridge/markov_prior.hpp"

namespace sbridge {

// Raised when prescribed marginal mass cannot flow through the prior
// (division by a zero component whose marginal entry is nonzero, or an
// inconsistent zero pattern detected up front).
class InfeasibleBridgeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct DiscreteBridgeProblem {
    // step_kernels may be empty; when present their composition must equal
    // prior (checked by interpolate at 1e-10).
    DiscreteBridgeProblem(TransitionKernel prior, Marginal p0, Marginal pT,
                          std::vector<TransitionKernel> step_kernels = {});

    TransitionKernel prior;
    Marginal p0;
    Marginal pT;
    std::vector<TransitionKernel> step_kernels;
};

enum class SolveMode {
    Auto,      // log-space iff any prior or step-kernel entry < 1e-300
    Linear,    // potentials stored linearly, kernel-accelerated
    LogSpace,  // potentials stored as logs, log-sum-exp propagation
};

struct SolveOptions {
    double tol = 1e-10;
    int max_cycles = 10000;
    SolveMode mode = SolveMode::Auto;
    // Defaults to p0 restricted to its support.
    std::optional<std::vector<double>> init_phihat0;
};

struct ConvergenceRecord {
    int cycle;
    double dh_change;          // Hilbert distance between successive phihat(0)
    double marginal_residual;  // max_j |phi(T)_j phihat(T)_j - pT_j|
};

struct BridgeSolution {
    // Gauge: sum of phihat0 equals 1. Entries outside the marginal supports
    // are exactly zero (linear) / -inf (log).
    std::vector<double> phi0, phiT, phihat0, phihatT;
    std::vector<double> log_phi0, log_phiT, log_phihat0, log_phihatT;
    bool used_log_space = false;
    bool converged = false;
    int iterations = 0;
    double final_dh = 0.0;
    std::vector<ConvergenceRecord> convergence_log;
};

struct FortetCycleResult {
    std::vector<double> phihatT, phiT, phi0, phihat0_next;
};

// One four-map cycle on linear potentials. phihat0 must be strictly positive
// on supp(p0) and zero outside it.
FortetCycleResult fortet_cycle(std::span<const double> phihat0,
                               const DiscreteBridgeProblem& problem);

BridgeSolution solve(const DiscreteBridgeProblem& problem, const SolveOptions& opts = {});

struct Coupling {
    std::size_t rows = 0, cols = 0;
    std::vector<double> q;  // row-major joint probabilities
    double at(std::size_t i, std::size_t j) const { return q[i * cols + j]; }
    std::vector<double> row_sums() const;
    std::vector<double> col_sums() const;
};

// q_ij = phihat0_i * pi_ij * phiT_j.
Coupling bridge_coupling(const BridgeSolution& sol, const DiscreteBridgeProblem& problem);

// Entropic interpolation rho(t_k) = phi(t_k) phihat(t_k) (renormalized) on
// the step-kernel time knots, endpoints included.
std::vector<Marginal> interpolate(const BridgeSolution& sol,
                                  const DiscreteBridgeProblem& problem);

// KL divergence of the bridge coupling from the prior coupling
// p0_i * pi_ij, with 0 log 0 = 0.
double relative_entropy(const BridgeSolution& sol, const DiscreteBridgeProblem& problem);

}  // namespace sbridge
