#include "sbridge/cone_metric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sbridge/kernels.hpp"

namespace sbridge {

namespace {

void require_positive(std::span<const double> v, const char* what) {
    if (v.empty()) throw std::invalid_argument(std::string(what) + ": empty vector");
    for (double e : v) {
        if (!(e > 0.0) || !std::isfinite(e))
            throw std::domain_error(std::string(what) +
                                    ": entries must be strictly positive and finite");
    }
}

// x_i*y_j - x_j*y_i with one compensated rounding (Kahan's determinant trick);
// relative error stays O(eps) even when the two products nearly cancel.
double cross_det(double xi, double yj, double xj, double yi) {
    const double w = xj * yi;
    const double e = std::fma(xj, yi, -w);
    return std::fma(xi, yj, -w) - e;
}

}  // namespace

PositiveVector::PositiveVector(std::vector<double> entries) : entries_(std::move(entries)) {
    require_positive(entries_, "PositiveVector");
}

PositiveMatrix::PositiveMatrix(std::size_t rows, std::size_t cols,
                               std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
    if (rows_ == 0 || cols_ == 0 || data_.size() != rows_ * cols_)
        throw std::invalid_argument("PositiveMatrix: bad shape");
    strictly_positive_ = true;
    for (double e : data_) {
        if (!std::isfinite(e) || e < 0.0)
            throw std::domain_error("PositiveMatrix: entries must be finite and >= 0");
        if (e == 0.0) strictly_positive_ = false;
    }
}

std::vector<double> PositiveMatrix::apply(std::span<const double> x) const {
    if (x.size() != cols_) throw std::invalid_argument("PositiveMatrix::apply: dimension mismatch");
    std::vector<double> y(rows_);
    kernels::matvec(data_.data(), rows_, cols_, x.data(), y.data());
    return y;
}

double hilbert_distance(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw std::invalid_argument("hilbert_distance: dimension mismatch");
    require_positive(x, "hilbert_distance");
    require_positive(y, "hilbert_distance");

    const std::size_t n = x.size();
    double lmax = -std::numeric_limits<double>::infinity();
    double lmin = std::numeric_limits<double>::infinity();
    std::size_t jmax = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double l = std::log(x[i]) - std::log(y[i]);
        if (l > lmax) {
            lmax = l;
            jmax = i;
        }
        lmin = std::min(lmin, l);
    }
    double d = lmax - lmin;
    if (d == 0.0 || d >= 0.25) return d;

    // Nearly proportional: each log above carries ~1e-16 absolute noise, which
    // swamps d when d is near the solver tolerance. Re-express every ratio
    // against the component with the largest ratio; the cross determinant is
    // exact up to O(eps) relative, so the refined d is accurate to O(eps*d).
    // Guard the products against overflow using the logs already computed.
    const double lx_ref = std::log(x[jmax]);
    const double ly_ref = std::log(y[jmax]);
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(std::log(x[i]) + ly_ref) > 700.0 ||
            std::abs(std::log(y[i]) + lx_ref) > 700.0)
            return d;
    }
    double tmin = 0.0;
    double tmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double det = cross_det(x[i], y[jmax], x[jmax], y[i]);
        const double t = std::log1p(det / (x[jmax] * y[i]));
        tmin = std::min(tmin, t);
        tmax = std::max(tmax, t);
    }
    return tmax - tmin;
}

double hilbert_distance(const PositiveVector& x, const PositiveVector& y) {
    return hilbert_distance(std::span<const double>(x.entries()),
                            std::span<const double>(y.entries()));
}

double projective_diameter(const PositiveMatrix& e) {
    const std::size_t rows = e.rows();
    const std::size_t cols = e.cols();

    // Column zero-pattern bookkeeping; a zero column means the map is not
    // positive on the cone interior.
    for (std::size_t j = 0; j < cols; ++j) {
        bool all_zero = true;
        for (std::size_t i = 0; i < rows; ++i)
            if (e.at(i, j) != 0.0) {
                all_zero = false;
                break;
            }
        if (all_zero) throw std::domain_error("projective_diameter: zero column");
    }

    // Log entries once; -inf marks zeros.
    std::vector<double> lg(rows * cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            lg[i * cols + j] = e.at(i, j) > 0.0
                                   ? std::log(e.at(i, j))
                                   : -std::numeric_limits<double>::infinity();

    double diameter = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
        for (std::size_t k = j + 1; k < cols; ++k) {
            double dmax = -std::numeric_limits<double>::infinity();
            double dmin = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < rows; ++i) {
                const double a = lg[i * cols + j];
                const double b = lg[i * cols + k];
                const bool za = std::isinf(a);
                const bool zb = std::isinf(b);
                if (za && zb) continue;  // shared zero: both columns on the same face
                if (za || zb) return kInfiniteDiameter;
                const double diff = a - b;
                dmax = std::max(dmax, diff);
                dmin = std::min(dmin, diff);
            }
            if (dmax > dmin) diameter = std::max(diameter, dmax - dmin);
        }
    }
    return diameter;
}

double birkhoff_ratio(const PositiveMatrix& e) {
    const double diameter = projective_diameter(e);
    if (diameter == kInfiniteDiameter) return 1.0;
    return std::tanh(0.25 * diameter);
}

}  // namespace sbridge
