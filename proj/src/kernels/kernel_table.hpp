#pragma once

#include <cstddef>

#include "sbridge/kernels.hpp"

namespace sbridge::kernels::detail {

struct KernelTable {
    void (*mul)(const double*, const double*, double*, std::size_t);
    void (*div)(const double*, const double*, double*, std::size_t);
    void (*scale)(const double*, double, double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*shift)(double, double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    MinMax (*minmax)(const double*, std::size_t);
    MinMax (*ratio_range)(const double*, const double*, std::size_t);
    void (*matvec)(const double*, std::size_t, std::size_t, const double*, double*);
    void (*matvec_t)(const double*, std::size_t, std::size_t, const double*, double*);
};

const KernelTable* scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in or CPU lacks AVX2
const KernelTable* neon_table();  // nullptr off aarch64

}  // namespace sbridge::kernels::detail
