#pragma once

// Hilbert projective metric on the interior of the nonnegative orthant,
// projective diameter of nonnegative matrices and the Birkhoff contraction
// ratio tanh(diameter/4).

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace sbridge {

// Cone-boundary cases have unbounded diameter; they are legitimate inputs,
// so the value is a first-class result, not an error.
inline constexpr double kInfiniteDiameter = std::numeric_limits<double>::infinity();

// Strictly positive finite vector, dimension >= 1.
class PositiveVector {
  public:
    explicit PositiveVector(std::vector<double> entries);

    const std::vector<double>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

  private:
    std::vector<double> entries_;
};

// Nonnegative matrix; tracks whether every entry is strictly positive.
class PositiveMatrix {
  public:
    PositiveMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool strictly_positive() const { return strictly_positive_; }
    double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }
    const std::vector<double>& data() const { return data_; }

    // (Ex)_i = sum_j E_ij x_j
    std::vector<double> apply(std::span<const double> x) const;

  private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
    bool strictly_positive_;
};

// d_H(x, y) = log(max_i x_i/y_i / min_i x_i/y_i). Both arguments must be
// strictly positive and of equal dimension. Computed from log-ratios so that
// entries spanning hundreds of orders of magnitude do not overflow; nearly
// proportional vectors get a compensated refinement so that distances near
// the convergence tolerance keep full relative accuracy.
double hilbert_distance(std::span<const double> x, std::span<const double> y);
double hilbert_distance(const PositiveVector& x, const PositiveVector& y);

// Projective diameter sup d_H(Ex, Ey) of a nonnegative matrix with no zero
// column, via the exact column-pair cross-ratio formula. Returns
// kInfiniteDiameter when the image touches the cone boundary.
double projective_diameter(const PositiveMatrix& e);

// tanh(projective_diameter/4); equals 1 for infinite diameter.
double birkhoff_ratio(const PositiveMatrix& e);

}  // namespace sbridge
