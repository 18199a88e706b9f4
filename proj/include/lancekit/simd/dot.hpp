#pragma once

#include <cstddef>
#include <string_view>

namespace lancekit::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

/// Whether this build contains a kernel for `isa` and the running CPU supports it.
bool isa_available(Isa isa);

/// Best available instruction set, detected once per process.
Isa active_isa();

/// out[r] = dot(matrix row r, probe) for a row-major `rows x dim` matrix.
///
/// Every variant accumulates in the same order: eight lane sums where element
/// i lands in lane i % 8, reduced as ((l0+l4)+(l2+l6)) + ((l1+l5)+(l3+l7)).
/// Results are therefore bit-identical across variants.
void dot_rows(const double* matrix, std::size_t rows, std::size_t dim, const double* probe, double* out);

/// Same as `dot_rows` with an explicit variant. Throws lancekit::Error when
/// `isa` is not available.
void dot_rows_with(Isa isa, const double* matrix, std::size_t rows, std::size_t dim, const double* probe,
                   double* out);

double dot(const double* a, const double* b, std::size_t n);

namespace detail {
double dot_scalar(const double* a, const double* b, std::size_t n);
double dot_avx2(const double* a, const double* b, std::size_t n);
double dot_neon(const double* a, const double* b, std::size_t n);

inline double reduce_lanes(const double* lane) {
    return ((lane[0] + lane[4]) + (lane[2] + lane[6])) + ((lane[1] + lane[5]) + (lane[3] + lane[7]));
}
}  // namespace detail

}  // namespace lancekit::simd
