#pragma once

// Euler-Maruyama simulation of controlled linear and nonlinear-oscillator
// SDEs with a counter-based RNG, streaming moment accumulation and k-sigma
// tube extraction.
//
// Reproducibility contract: every normal draw is produced by one
// Philox4x32-10 block keyed by (seed) with counter (path_lo, path_hi, step,
// block), mapped to two uniforms u = ((x >> 11) + 0.5) * 2^-53 (x the 64-bit
// word of two lanes) and turned into a pair of normals by Box-Muller
//   z0 = sqrt(-2 ln u1) cos(2 pi u2),  z1 = sqrt(-2 ln u1) sin(2 pi u2).
// Initial-state draws use step = 0xffffffff. Streams therefore do not depend
// on scheduling or partitioning, and identical (problem, seed, n_steps,
// n_paths) yield bit-identical ensembles.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sbridge/gaussian_bridge.hpp"

namespace sbridge {

namespace rng {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

struct NormalPair {
    double z0, z1;
};

inline constexpr std::uint32_t kInitDrawStep = 0xffffffffu;

// Box-Muller pair from the block keyed as documented above.
NormalPair normal_pair(std::uint64_t seed, std::uint64_t path, std::uint32_t step,
                       std::uint32_t block);

}  // namespace rng

// Affine feedback u(t, x) = c(t) - K(t) x, with K and c interpolated
// linearly between knots (constant outside the knot range).
class LinearPolicy {
  public:
    static LinearPolicy zero(std::size_t inputs, std::size_t states);
    static LinearPolicy constant_gain(Eigen::MatrixXd gain);
    // Tracking policy u = u_ff - K (x - mean) from a solved schedule, with
    // every term scaled by gain_scale (channel rescaling).
    static LinearPolicy from_schedule(const RiccatiSchedule& schedule,
                                      double gain_scale = 1.0);

    void eval(double t, Eigen::MatrixXd& gain, Eigen::VectorXd& offset) const;
    std::size_t inputs() const { return gains_.front().rows(); }
    std::size_t states() const { return gains_.front().cols(); }
    const std::string& descriptor() const { return descriptor_; }

  private:
    std::vector<double> knots_;
    std::vector<Eigen::MatrixXd> gains_;    // K(t_k)
    std::vector<Eigen::VectorXd> offsets_;  // c(t_k) = u_ff + K mean
    std::string descriptor_;
};

struct InitialLaw {
    static InitialLaw gaussian(const GaussianState& state);
    static InitialLaw point(Eigen::VectorXd x);

    Eigen::VectorXd mean;
    Eigen::MatrixXd chol;  // lower Cholesky factor; zero for a point mass
    bool deterministic = false;
};

struct SimOptions {
    std::size_t n_paths = 1;
    std::size_t n_steps = 1;
    std::uint64_t seed = 0;
    double t0 = 0.0;
    double t1 = 1.0;
    bool store_paths = false;   // keep full SoA snapshots
    bool track_energy = false;  // accumulate per-path int |u|^2 dt
};

struct PathEnsemble {
    std::vector<double> times;
    std::size_t n_paths = 0;
    std::size_t dim = 0;
    std::uint64_t seed = 0;
    std::string policy_descriptor;

    // SoA snapshots [time][comp][path]; empty unless store_paths.
    std::vector<double> stored;
    // Terminal slice [comp][path]; always present.
    std::vector<double> terminal;
    // Streaming sums per knot: sum_x[time*dim + c], sum_xx[time*dim*dim + c*dim + d].
    std::vector<double> sum_x;
    std::vector<double> sum_xx;
    // Per-path control energy (empty unless track_energy).
    std::vector<double> energy;

    bool has_paths() const { return !stored.empty(); }
    double path_value(std::size_t t, std::size_t comp, std::size_t path) const {
        return stored[(t * dim + comp) * n_paths + path];
    }
    double terminal_value(std::size_t comp, std::size_t path) const {
        return terminal[comp * n_paths + path];
    }
};

struct TimeMoments {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;  // unbiased
};

struct TubeStats {
    std::vector<double> times;
    std::vector<std::vector<double>> mean;    // [time][comp]
    std::vector<std::vector<double>> stddev;  // componentwise, unbiased
    std::vector<std::vector<double>> lo;      // mean - k stddev
    std::vector<std::vector<double>> hi;      // mean + k stddev
    double k_sigma = 0.0;
};

// Closed-loop linear dynamics dx = (A x + B u) dt + B1 dW under the policy.
// The per-path update runs through the data-parallel kernels, so the
// ensemble is identical across kernel backends.
PathEnsemble simulate(const LinearSystem& sys, const LinearPolicy& policy,
                      const InitialLaw& x0, const SimOptions& opts);

// Arbitrary drift with constant diffusion; drift may throw, which aborts the
// run annotated with (t, path).
struct GenericSde {
    std::size_t dim = 0;
    std::function<void(double t, std::span<const double> x, std::span<double> drift)> drift;
    Eigen::MatrixXd diffusion;
};

PathEnsemble simulate(const GenericSde& sde, const InitialLaw& x0, const SimOptions& opts);

TimeMoments empirical_moments(const PathEnsemble& ens, std::size_t time_index);
TubeStats tube_stats(const PathEnsemble& ens, double k);

}  // namespace sbridge
