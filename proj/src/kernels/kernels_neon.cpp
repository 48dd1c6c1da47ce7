// NEON kernel variants (2 doubles per lane). Mirrors the AVX2 file; only
// built on aarch64, where float64x2 arithmetic is baseline.

#include "kernel_table.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace sbridge::kernels::detail {
namespace {

void mul_neon(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void div_neon(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vdivq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    for (; i < n; ++i) out[i] = a[i] / b[i];
}

void scale_neon(const double* a, double c, double* out, std::size_t n) {
    float64x2_t vc = vdupq_n_f64(c);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vc));
    for (; i < n; ++i) out[i] = a[i] * c;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
    float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t prod = vmulq_f64(va, vld1q_f64(x + i));
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void shift_neon(double c, double* y, std::size_t n) {
    float64x2_t vc = vdupq_n_f64(c);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vc));
    for (; i < n; ++i) y[i] += c;
}

double sum_neon(const double* a, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(a + i));
    double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i) s += a[i];
    return s;
}

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

MinMax minmax_neon(const double* a, std::size_t n) {
    MinMax r{a[0], a[0]};
    std::size_t i = 1;
    if (n >= 3) {
        float64x2_t vmin = vld1q_f64(a);
        float64x2_t vmax = vmin;
        for (i = 2; i + 2 <= n; i += 2) {
            float64x2_t v = vld1q_f64(a + i);
            vmin = vminq_f64(vmin, v);
            vmax = vmaxq_f64(vmax, v);
        }
        r.min = vminvq_f64(vmin);
        r.max = vmaxvq_f64(vmax);
    }
    for (; i < n; ++i) {
        if (a[i] < r.min) r.min = a[i];
        if (a[i] > r.max) r.max = a[i];
    }
    return r;
}

MinMax ratio_range_neon(const double* num, const double* den, std::size_t n) {
    double q0 = num[0] / den[0];
    MinMax r{q0, q0};
    std::size_t i = 1;
    if (n >= 3) {
        float64x2_t vmin = vdivq_f64(vld1q_f64(num), vld1q_f64(den));
        float64x2_t vmax = vmin;
        for (i = 2; i + 2 <= n; i += 2) {
            float64x2_t q = vdivq_f64(vld1q_f64(num + i), vld1q_f64(den + i));
            vmin = vminq_f64(vmin, q);
            vmax = vmaxq_f64(vmax, q);
        }
        r.min = vminvq_f64(vmin);
        r.max = vmaxvq_f64(vmax);
    }
    for (; i < n; ++i) {
        double q = num[i] / den[i];
        if (q < r.min) r.min = q;
        if (q > r.max) r.max = q;
    }
    return r;
}

void matvec_neon(const double* m, std::size_t rows, std::size_t cols,
                 const double* x, double* y) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = m + i * cols;
        float64x2_t acc = vdupq_n_f64(0.0);
        std::size_t j = 0;
        for (; j + 2 <= cols; j += 2)
            acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(row + j), vld1q_f64(x + j)));
        double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
        for (; j < cols; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

void matvec_t_neon(const double* m, std::size_t rows, std::size_t cols,
                   const double* x, double* y) {
    for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
    for (std::size_t i = 0; i < rows; ++i) axpy_neon(x[i], m + i * cols, y, cols);
}

const KernelTable kNeonTable = {
    mul_neon,   div_neon, scale_neon,       axpy_neon,
    shift_neon, sum_neon, dot_neon,         minmax_neon,
    ratio_range_neon,     matvec_neon,      matvec_t_neon,
};

}  // namespace

const KernelTable* neon_table() { return &kNeonTable; }

}  // namespace sbridge::kernels::detail

#else

namespace sbridge::kernels::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace sbridge::kernels::detail

#endif
