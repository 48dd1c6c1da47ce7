#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernel_table.hpp"
#include "sbridge/kernels.hpp"

namespace sbridge::kernels {

namespace {

using detail::KernelTable;

const KernelTable* table_for(Backend b) {
    switch (b) {
        case Backend::Scalar: return detail::scalar_table();
        case Backend::Avx2: return detail::avx2_table();
        case Backend::Neon: return detail::neon_table();
    }
    return nullptr;
}

struct Dispatch {
    Backend backend;
    const KernelTable* table;
};

Dispatch& dispatch() {
    static Dispatch d = [] {
        Backend b = auto_select();
        return Dispatch{b, table_for(b)};
    }();
    return d;
}

}  // namespace

Backend active_backend() { return dispatch().backend; }

bool available(Backend b) { return table_for(b) != nullptr; }

std::string_view name(Backend b) {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
    }
    return "unknown";
}

void use(Backend b) {
    const KernelTable* t = table_for(b);
    if (t == nullptr)
        throw std::invalid_argument("kernel backend not available: " +
                                    std::string(name(b)));
    dispatch() = {b, t};
}

Backend parse_backend(std::string_view spec) {
    if (spec == "auto" || spec.empty()) return auto_select();
    if (spec == "scalar") return Backend::Scalar;
    if (spec == "avx2") return Backend::Avx2;
    if (spec == "neon") return Backend::Neon;
    throw std::invalid_argument("unknown kernel backend: " + std::string(spec));
}

Backend auto_select() {
    if (const char* env = std::getenv("SBRIDGE_KERNELS");
        env != nullptr && std::string_view(env) != "auto" &&
        std::string_view(env)[0] != '\0') {
        Backend b = parse_backend(env);
        if (!available(b))
            throw std::invalid_argument("SBRIDGE_KERNELS requests unavailable backend");
        return b;
    }
    if (available(Backend::Avx2)) return Backend::Avx2;
    if (available(Backend::Neon)) return Backend::Neon;
    return Backend::Scalar;
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
    dispatch().table->mul(a, b, out, n);
}
void div(const double* a, const double* b, double* out, std::size_t n) {
    dispatch().table->div(a, b, out, n);
}
void scale(const double* a, double c, double* out, std::size_t n) {
    dispatch().table->scale(a, c, out, n);
}
void axpy(double a, const double* x, double* y, std::size_t n) {
    dispatch().table->axpy(a, x, y, n);
}
void shift(double c, double* y, std::size_t n) { dispatch().table->shift(c, y, n); }
double sum(const double* a, std::size_t n) { return dispatch().table->sum(a, n); }
double dot(const double* a, const double* b, std::size_t n) {
    return dispatch().table->dot(a, b, n);
}
MinMax minmax(const double* a, std::size_t n) { return dispatch().table->minmax(a, n); }
MinMax ratio_range(const double* num, const double* den, std::size_t n) {
    return dispatch().table->ratio_range(num, den, n);
}
void matvec(const double* m, std::size_t rows, std::size_t cols, const double* x,
            double* y) {
    dispatch().table->matvec(m, rows, cols, x, y);
}
void matvec_t(const double* m, std::size_t rows, std::size_t cols, const double* x,
              double* y) {
    dispatch().table->matvec_t(m, rows, cols, x, y);
}

}  // namespace sbridge::kernels
