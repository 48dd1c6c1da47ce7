#pragma once

// Data-parallel double-precision kernels with runtime backend selection.
//
// Every backend implements the same contract. Elementwise operations (mul,
// div, scale, axpy, shift) and matvec_t round identically on all backends:
// they perform the same IEEE operations per element, and the project is
// compiled with -ffp-contract=off. Reductions (sum, dot, matvec) may differ
// across backends in the last few ulps because SIMD lanes reorder the
// accumulation; within one backend they are deterministic.

#include <cstddef>
#include <string_view>

namespace sbridge::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct MinMax {
    double min;
    double max;
};

// Backend currently routing all kernel calls.
Backend active_backend();
bool available(Backend b);
std::string_view name(Backend b);

// Switches the active backend. Throws std::invalid_argument when the
// requested backend is not available on this CPU. Not safe to call while
// kernels are executing on other threads; select once at startup.
void use(Backend b);

// Best available backend on this machine (honours the SBRIDGE_KERNELS
// environment variable: "scalar", "avx2", "neon" or "auto").
Backend auto_select();

// Accepts "auto" or a backend name.
Backend parse_backend(std::string_view spec);

// out[i] = a[i] * b[i]
void mul(const double* a, const double* b, double* out, std::size_t n);
// out[i] = a[i] / b[i]
void div(const double* a, const double* b, double* out, std::size_t n);
// out[i] = a[i] * c
void scale(const double* a, double c, double* out, std::size_t n);
// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, std::size_t n);
// y[i] += c
void shift(double c, double* y, std::size_t n);

double sum(const double* a, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);

// Componentwise extrema; n >= 1.
MinMax minmax(const double* a, std::size_t n);
// Extrema of num[i] / den[i]; n >= 1. Division is performed elementwise, so
// the result is identical across backends.
MinMax ratio_range(const double* num, const double* den, std::size_t n);

// y = M x for row-major M (rows x cols). Reduction per row.
void matvec(const double* m, std::size_t rows, std::size_t cols,
            const double* x, double* y);
// y = M^T x for row-major M (rows x cols): y[j] = sum_i M[i][j] x[i].
// Accumulates row by row; bit-identical across backends.
void matvec_t(const double* m, std::size_t rows, std::size_t cols,
              const double* x, double* y);

}  // namespace sbridge::kernels
