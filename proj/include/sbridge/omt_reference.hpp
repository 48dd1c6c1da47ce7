#pragma once

// Exact optimal-transport oracles: 1D monotone rearrangement, Gaussian
// closed forms, displacement interpolation, Wasserstein-2 distances, a
// Hamilton-Jacobi residual check for the closed-form quadratic potential,
// and the zero-noise study comparing entropic against displacement
// interpolation.

#include <cstddef>
#include <vector>

#include "sbridge/errors.hpp"
#include "sbridge/markov_prior.hpp"

namespace sbridge {

double normal_cdf(double x);
// Accurate to a few ulps (rational approximation plus a Halley refinement).
double inverse_normal_cdf(double u);

struct Gaussian1D {
    Gaussian1D(double mean, double stddev);
    double mean;
    double stddev;  // > 0
    double pdf(double x) const;
    double quantile(double u) const { return mean + stddev * inverse_normal_cdf(u); }
};

// Monotone grid of probabilities u_1..u_M in (0,1) with quantile values.
struct Quantile1D {
    Quantile1D(std::vector<double> probabilities, std::vector<double> values);
    std::vector<double> prob;
    std::vector<double> value;
};

// Quantiles of a Gaussian on the regular grid u_k = (k + 1/2) / m.
Quantile1D gaussian_quantiles(const Gaussian1D& g, std::size_t m);

// T = F1^{-1} o F0 sampled at rho0's quantile values; requires matching
// probability grids.
std::vector<double> monotone_map_1d(const Quantile1D& rho0, const Quantile1D& rho1);

// McCann interpolation: quantiles (1-t) F0^{-1} + t F1^{-1}; for Gaussians,
// mean (1-t) mu0 + t mu1 and stddev (1-t) s0 + t s1. t in [0, 1].
Gaussian1D displacement_interpolation(const Gaussian1D& a, const Gaussian1D& b, double t);
Quantile1D displacement_interpolation(const Quantile1D& a, const Quantile1D& b, double t);

// Unsquared W2. Gaussians: sqrt((mu0-mu1)^2 + (s0-s1)^2); quantile form: L2
// norm of the quantile difference under the probability-grid quadrature.
double wasserstein2(const Gaussian1D& a, const Gaussian1D& b);
double wasserstein2(const Quantile1D& a, const Quantile1D& b);

// Exact W2 between two discrete distributions on the same grid (merged-CDF
// quantile coupling; no quadrature error).
double wasserstein2_grid(const Marginal& a, const Marginal& b, const Grid1D& grid);

// Exact W2 between a discrete grid distribution and a Gaussian, integrating
// the quantile gap piecewise with Gaussian partial moments.
double wasserstein2_grid_gaussian(const Marginal& a, const Grid1D& grid,
                                  const Gaussian1D& g);

// Gaussian displacement path with its quadratic potential psi(x,t) =
// a(t) x^2/2 + b(t) x + c(t), all coefficients in closed form. The
// quantile-backed variant supports interpolation but no potential.
class DisplacementPath {
  public:
    static DisplacementPath between(const Gaussian1D& rho0, const Gaussian1D& rho1);
    static DisplacementPath between(const Quantile1D& rho0, const Quantile1D& rho1);

    bool is_gaussian() const { return gaussian_; }
    Gaussian1D gaussian_at(double t) const;
    Quantile1D quantile_at(double t) const;

    // Quadratic-potential accessors; throw UnsupportedConfigurationError for
    // quantile-backed paths.
    double psi(double x, double t) const;
    double psi_x(double x, double t) const;
    double psi_t(double x, double t) const;
    double velocity(double x, double t) const { return psi_x(x, t); }
    double density(double x, double t) const;

    // Adds delta to the quadratic coefficient; a correct HJ check must flag it.
    void perturb_quadratic(double delta) { perturbation_ += delta; }

  private:
    DisplacementPath() = default;
    void require_gaussian() const;

    bool gaussian_ = false;
    double mu0_ = 0, mu1_ = 0, s0_ = 1, s1_ = 1;
    double perturbation_ = 0.0;
    std::vector<double> qprob_, qv0_, qv1_;
};

struct HjReport {
    double max_hj_residual = 0.0;          // analytic d/dt psi + |grad psi|^2/2
    double max_continuity_residual = 0.0;  // centered-difference mass balance
};

// Evaluates both residuals on the grid x times lattice. Times must keep the
// centered stencil inside (0, 1).
HjReport hj_residual(const DisplacementPath& path, const Grid1D& grid,
                     const std::vector<double>& times);

struct ZeroNoiseRow {
    double epsilon;
    double w2_mid;              // W2(entropic mid-marginal, displacement mid-marginal)
    int bridge_cycles;
    double contraction_bound;   // birkhoff_ratio(prior)^2
    double discretization_floor;
};

struct ZeroNoiseOptions {
    double tol = 1e-10;
    int max_cycles = 200000;
    bool warm_start = true;  // reuse the previous epsilon's potentials
};

// For each epsilon: heat-kernel chain prior, Schrödinger bridge, entropic
// interpolation to t = 1/2, compared against the displacement interpolant
// discretized on the same grid. Epsilons must be strictly decreasing;
// n_time_steps must be even so t = 1/2 is a knot; the grid must clear the
// 6 sqrt(eps_max dt) margin beyond the 3-sigma support of both marginals.
std::vector<ZeroNoiseRow> zero_noise_study(const Gaussian1D& rho0, const Gaussian1D& rho1,
                                           const Grid1D& grid,
                                           const std::vector<double>& epsilons,
                                           int n_time_steps,
                                           const ZeroNoiseOptions& opts = {});

}  // namespace sbridge
