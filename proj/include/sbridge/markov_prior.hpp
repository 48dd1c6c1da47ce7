#pragma once

// Prior transition kernels on a 1D grid: discretized heat kernels with noise
// intensity epsilon, composition into multi-step priors, and marginal
// propagation. All kernels are dense and row-stochastic.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sbridge {

// Uniform cell grid on [lower, upper]; states live at the n cell midpoints.
struct Grid1D {
    Grid1D(double lower, double upper, std::size_t n_points);

    double lower;
    double upper;
    std::size_t n_points;

    double spacing() const { return (upper - lower) / static_cast<double>(n_points); }
    double point(std::size_t i) const {
        return lower + (static_cast<double>(i) + 0.5) * spacing();
    }
};

// Row-stochastic nonnegative matrix; row = source state, column = target.
class TransitionKernel {
  public:
    TransitionKernel(std::size_t rows, std::size_t cols, std::vector<double> row_major,
                     double step_duration);

    static TransitionKernel identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double step_duration() const { return step_duration_; }
    double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }
    const std::vector<double>& data() const { return data_; }
    double min_entry() const;

  private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
    double step_duration_;
};

// Probability vector over grid/chain states.
class Marginal {
  public:
    explicit Marginal(std::vector<double> p);

    std::size_t size() const { return p_.size(); }
    double at(std::size_t i) const { return p_[i]; }
    const std::vector<double>& probabilities() const { return p_; }

  private:
    std::vector<double> p_;
};

// K_ij proportional to exp(-(x_i - x_j)^2 / (2 epsilon dt)), rows normalized.
// Boundary treatment is truncate-and-renormalize. Throws std::domain_error
// when epsilon*dt is so small that every off-diagonal entry underflows (the
// kernel would degenerate to the identity); callers should switch the bridge
// solver to its log-space path instead of shrinking epsilon further.
TransitionKernel build_heat_kernel(const Grid1D& grid, double epsilon, double dt);

// Matrix product of the kernels in order; step durations add.
TransitionKernel compose(std::span<const TransitionKernel> kernels);

// Row-vector push-forward p * K.
Marginal propagate(const Marginal& p, const TransitionKernel& kernel);

// Midpoint-rule discretization with renormalization.
Marginal discretize_density(const Grid1D& grid, const std::function<double(double)>& pdf);
Marginal discretize_gaussian(const Grid1D& grid, double mean, double stddev);

}  // namespace sbridge
