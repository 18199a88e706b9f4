#include "lancekit/errors.hpp"
#include "lancekit/simd/dot.hpp"

#include <string>

namespace lancekit::simd {

namespace {

using DotFn = double (*)(const double*, const double*, std::size_t);

DotFn kernel_for(Isa isa) {
    switch (isa) {
#if defined(__x86_64__) || defined(__i386__)
        case Isa::Avx2:
            return detail::dot_avx2;
#endif
#if defined(__aarch64__)
        case Isa::Neon:
            return detail::dot_neon;
#endif
        default:
            return detail::dot_scalar;
    }
}

void run_rows(DotFn fn, const double* matrix, std::size_t rows, std::size_t dim, const double* probe,
              double* out) {
    for (std::size_t r = 0; r < rows; ++r) out[r] = fn(matrix + r * dim, probe, dim);
}

}  // namespace

std::string_view to_string(Isa isa) {
    switch (isa) {
        case Isa::Scalar:
            return "scalar";
        case Isa::Avx2:
            return "avx2";
        case Isa::Neon:
            return "neon";
    }
    return "unknown";
}

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::Scalar:
            return true;
        case Isa::Avx2:
#if defined(__x86_64__) || defined(__i386__)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Isa::Neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Isa active_isa() {
    static const Isa isa = [] {
        if (isa_available(Isa::Avx2)) return Isa::Avx2;
        if (isa_available(Isa::Neon)) return Isa::Neon;
        return Isa::Scalar;
    }();
    return isa;
}

void dot_rows(const double* matrix, std::size_t rows, std::size_t dim, const double* probe, double* out) {
    static const DotFn fn = kernel_for(active_isa());
    run_rows(fn, matrix, rows, dim, probe, out);
}

void dot_rows_with(Isa isa, const double* matrix, std::size_t rows, std::size_t dim, const double* probe,
                   double* out) {
    if (!isa_available(isa)) throw Error("kernel not available on this machine: " + std::string(to_string(isa)));
    run_rows(kernel_for(isa), matrix, rows, dim, probe, out);
}

double dot(const double* a, const double* b, std::size_t n) {
    static const DotFn fn = kernel_for(active_isa());
    return fn(a, b, n);
}

}  // namespace lancekit::simd
