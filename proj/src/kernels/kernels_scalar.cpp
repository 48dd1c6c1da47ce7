// Scalar reference kernels. These define the semantics the SIMD variants are
// tested against.

#include "kernel_table.hpp"

namespace sbridge::kernels::detail {
namespace {

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void div_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] / b[i];
}

void scale_scalar(const double* a, double c, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * c;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void shift_scalar(double c, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += c;
}

double sum_scalar(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

MinMax minmax_scalar(const double* a, std::size_t n) {
    MinMax r{a[0], a[0]};
    for (std::size_t i = 1; i < n; ++i) {
        if (a[i] < r.min) r.min = a[i];
        if (a[i] > r.max) r.max = a[i];
    }
    return r;
}

MinMax ratio_range_scalar(const double* num, const double* den, std::size_t n) {
    double q = num[0] / den[0];
    MinMax r{q, q};
    for (std::size_t i = 1; i < n; ++i) {
        q = num[i] / den[i];
        if (q < r.min) r.min = q;
        if (q > r.max) r.max = q;
    }
    return r;
}

void matvec_scalar(const double* m, std::size_t rows, std::size_t cols,
                   const double* x, double* y) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = m + i * cols;
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

void matvec_t_scalar(const double* m, std::size_t rows, std::size_t cols,
                     const double* x, double* y) {
    for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = m + i * cols;
        const double xi = x[i];
        for (std::size_t j = 0; j < cols; ++j) y[j] += xi * row[j];
    }
}

const KernelTable kScalarTable = {
    mul_scalar,   div_scalar, scale_scalar,       axpy_scalar,
    shift_scalar, sum_scalar, dot_scalar,         minmax_scalar,
    ratio_range_scalar,       matvec_scalar,      matvec_t_scalar,
};

}  // namespace

const KernelTable* scalar_table() { return &kScalarTable; }

}  // namespace sbridge::kernels::detail
