// AVX2 kernel variants (4 doubles per lane group). No FMA anywhere: the
// elementwise kernels must round exactly like the scalar reference.

#include "kernel_table.hpp"

#if defined(__x86_64__) && defined(__AVX2__)

#include <immintrin.h>

namespace sbridge::kernels::detail {
namespace {

void mul_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        __m256d vb = _mm256_loadu_pd(b + i);
        _mm256_storeu_pd(out + i, _mm256_mul_pd(va, vb));
    }
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void div_avx2(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        __m256d vb = _mm256_loadu_pd(b + i);
        _mm256_storeu_pd(out + i, _mm256_div_pd(va, vb));
    }
    for (; i < n; ++i) out[i] = a[i] / b[i];
}

void scale_avx2(const double* a, double c, double* out, std::size_t n) {
    __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        _mm256_storeu_pd(out + i, _mm256_mul_pd(va, vc));
    }
    for (; i < n; ++i) out[i] = a[i] * c;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void shift_avx2(double c, double* y, std::size_t n) {
    __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vy, vc));
    }
    for (; i < n; ++i) y[i] += c;
}

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double sum_avx2(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i];
    return s;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        __m256d vb = _mm256_loadu_pd(b + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

MinMax minmax_avx2(const double* a, std::size_t n) {
    if (n < 4) {
        MinMax r{a[0], a[0]};
        for (std::size_t i = 1; i < n; ++i) {
            if (a[i] < r.min) r.min = a[i];
            if (a[i] > r.max) r.max = a[i];
        }
        return r;
    }
    __m256d vmin = _mm256_loadu_pd(a);
    __m256d vmax = vmin;
    std::size_t i = 4;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(a + i);
        vmin = _mm256_min_pd(vmin, v);
        vmax = _mm256_max_pd(vmax, v);
    }
    alignas(32) double lo[4], hi[4];
    _mm256_store_pd(lo, vmin);
    _mm256_store_pd(hi, vmax);
    MinMax r{lo[0], hi[0]};
    for (int k = 1; k < 4; ++k) {
        if (lo[k] < r.min) r.min = lo[k];
        if (hi[k] > r.max) r.max = hi[k];
    }
    for (; i < n; ++i) {
        if (a[i] < r.min) r.min = a[i];
        if (a[i] > r.max) r.max = a[i];
    }
    return r;
}

MinMax ratio_range_avx2(const double* num, const double* den, std::size_t n) {
    if (n < 4) {
        double q = num[0] / den[0];
        MinMax r{q, q};
        for (std::size_t i = 1; i < n; ++i) {
            q = num[i] / den[i];
            if (q < r.min) r.min = q;
            if (q > r.max) r.max = q;
        }
        return r;
    }
    __m256d q0 = _mm256_div_pd(_mm256_loadu_pd(num), _mm256_loadu_pd(den));
    __m256d vmin = q0;
    __m256d vmax = q0;
    std::size_t i = 4;
    for (; i + 4 <= n; i += 4) {
        __m256d q = _mm256_div_pd(_mm256_loadu_pd(num + i), _mm256_loadu_pd(den + i));
        vmin = _mm256_min_pd(vmin, q);
        vmax = _mm256_max_pd(vmax, q);
    }
    alignas(32) double lo[4], hi[4];
    _mm256_store_pd(lo, vmin);
    _mm256_store_pd(hi, vmax);
    MinMax r{lo[0], hi[0]};
    for (int k = 1; k < 4; ++k) {
        if (lo[k] < r.min) r.min = lo[k];
        if (hi[k] > r.max) r.max = hi[k];
    }
    for (; i < n; ++i) {
        double q = num[i] / den[i];
        if (q < r.min) r.min = q;
        if (q > r.max) r.max = q;
    }
    return r;
}

void matvec_avx2(const double* m, std::size_t rows, std::size_t cols,
                 const double* x, double* y) {
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = m + i * cols;
        __m256d acc = _mm256_setzero_pd();
        std::size_t j = 0;
        for (; j + 4 <= cols; j += 4) {
            __m256d vr = _mm256_loadu_pd(row + j);
            __m256d vx = _mm256_loadu_pd(x + j);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(vr, vx));
        }
        double s = hsum(acc);
        for (; j < cols; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

void matvec_t_avx2(const double* m, std::size_t rows, std::size_t cols,
                   const double* x, double* y) {
    for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
    for (std::size_t i = 0; i < rows; ++i) axpy_avx2(x[i], m + i * cols, y, cols);
}

const KernelTable kAvx2Table = {
    mul_avx2,   div_avx2, scale_avx2,       axpy_avx2,
    shift_avx2, sum_avx2, dot_avx2,         minmax_avx2,
    ratio_range_avx2,     matvec_avx2,      matvec_t_avx2,
};

}  // namespace

const KernelTable* avx2_table() {
    return __builtin_cpu_supports("avx2") ? &kAvx2Table : nullptr;
}

}  // namespace sbridge::kernels::detail

#else

namespace sbridge::kernels::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace sbridge::kernels::detail

#endif
