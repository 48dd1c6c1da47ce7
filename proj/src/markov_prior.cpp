#include "sbridge/markov_prior.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sbridge/kernels.hpp"

namespace sbridge {

namespace {
constexpr double kRowSumTol = 1e-12;
}

Grid1D::Grid1D(double lo, double hi, std::size_t n) : lower(lo), upper(hi), n_points(n) {
    if (!(upper > lower)) throw std::invalid_argument("Grid1D: upper must exceed lower");
    if (n_points < 2) throw std::invalid_argument("Grid1D: need at least 2 points");
}

TransitionKernel::TransitionKernel(std::size_t rows, std::size_t cols,
                                   std::vector<double> row_major, double step_duration)
    : rows_(rows), cols_(cols), data_(std::move(row_major)), step_duration_(step_duration) {
    if (rows_ == 0 || cols_ == 0 || data_.size() != rows_ * cols_)
        throw std::invalid_argument("TransitionKernel: bad shape");
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) {
            const double e = data_[i * cols_ + j];
            if (!std::isfinite(e) || e < 0.0)
                throw std::domain_error("TransitionKernel: entries must be finite and >= 0");
            s += e;
        }
        if (std::abs(s - 1.0) > kRowSumTol)
            throw std::domain_error("TransitionKernel: row " + std::to_string(i) +
                                    " sums to " + std::to_string(s) + ", not 1");
    }
}

TransitionKernel TransitionKernel::identity(std::size_t n) {
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 1.0;
    return TransitionKernel(n, n, std::move(d), 0.0);
}

double TransitionKernel::min_entry() const {
    return kernels::minmax(data_.data(), data_.size()).min;
}

Marginal::Marginal(std::vector<double> p) : p_(std::move(p)) {
    if (p_.empty()) throw std::invalid_argument("Marginal: empty");
    double s = 0.0;
    for (double e : p_) {
        if (!std::isfinite(e) || e < 0.0)
            throw std::domain_error("Marginal: entries must be finite and >= 0");
        s += e;
    }
    if (std::abs(s - 1.0) > kRowSumTol)
        throw std::domain_error("Marginal: mass " + std::to_string(s) + ", not 1");
}

TransitionKernel build_heat_kernel(const Grid1D& grid, double epsilon, double dt) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw std::invalid_argument("build_heat_kernel: epsilon must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("build_heat_kernel: dt must be positive");

    const std::size_t n = grid.n_points;
    const double h = grid.spacing();
    const double inv_var = 1.0 / (2.0 * epsilon * dt);

    // Uniform spacing: the unnormalized entry depends on |i - j| only.
    std::vector<double> profile(n);
    for (std::size_t d = 0; d < n; ++d) {
        const double dx = static_cast<double>(d) * h;
        profile[d] = std::exp(-dx * dx * inv_var);
    }
    if (n > 1 && profile[1] == 0.0)
        throw std::domain_error(
            "build_heat_kernel: epsilon*dt underflows every off-diagonal entry on "
            "this grid; use the log-space bridge path instead");

    std::vector<double> k(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t d = i > j ? i - j : j - i;
            k[i * n + j] = profile[d];
            s += profile[d];
        }
        kernels::scale(k.data() + i * n, 1.0 / s, k.data() + i * n, n);
    }
    return TransitionKernel(n, n, std::move(k), dt);
}

TransitionKernel compose(std::span<const TransitionKernel> ks) {
    if (ks.empty()) throw std::invalid_argument("compose: empty kernel list");
    std::size_t rows = ks.front().rows();
    std::vector<double> acc(ks.front().data());
    std::size_t acc_cols = ks.front().cols();
    double duration = ks.front().step_duration();

    for (std::size_t t = 1; t < ks.size(); ++t) {
        const TransitionKernel& k = ks[t];
        if (k.rows() != acc_cols)
            throw std::invalid_argument("compose: dimension mismatch at kernel " +
                                        std::to_string(t));
        std::vector<double> next(rows * k.cols(), 0.0);
        for (std::size_t i = 0; i < rows; ++i) {
            double* out_row = next.data() + i * k.cols();
            const double* acc_row = acc.data() + i * acc_cols;
            for (std::size_t j = 0; j < acc_cols; ++j)
                kernels::axpy(acc_row[j], k.row(j), out_row, k.cols());
        }
        acc = std::move(next);
        acc_cols = k.cols();
        duration += k.step_duration();
    }
    return TransitionKernel(rows, acc_cols, std::move(acc), duration);
}

Marginal propagate(const Marginal& p, const TransitionKernel& kernel) {
    if (p.size() != kernel.rows())
        throw std::invalid_argument("propagate: dimension mismatch");
    std::vector<double> out(kernel.cols());
    kernels::matvec_t(kernel.data().data(), kernel.rows(), kernel.cols(),
                      p.probabilities().data(), out.data());
    return Marginal(std::move(out));
}

Marginal discretize_density(const Grid1D& grid, const std::function<double(double)>& pdf) {
    std::vector<double> p(grid.n_points);
    for (std::size_t i = 0; i < grid.n_points; ++i) p[i] = pdf(grid.point(i));
    const double s = kernels::sum(p.data(), p.size());
    if (!(s > 0.0)) throw std::domain_error("discretize_density: density vanishes on grid");
    kernels::scale(p.data(), 1.0 / s, p.data(), p.size());
    return Marginal(std::move(p));
}

Marginal discretize_gaussian(const Grid1D& grid, double mean, double stddev) {
    if (!(stddev > 0.0)) throw std::invalid_argument("discretize_gaussian: stddev must be positive");
    const double inv2 = 1.0 / (2.0 * stddev * stddev);
    return discretize_density(grid, [&](double x) {
        const double d = x - mean;
        return std::exp(-d * d * inv2);
    });
}

}  // namespace sbridge
