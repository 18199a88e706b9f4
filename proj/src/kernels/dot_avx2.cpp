#include "lancekit/simd/dot.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

namespace lancekit::simd::detail {

// Separate multiply and add: a fused multiply-add would round differently
// from the scalar kernel.
__attribute__((target("avx2"))) double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d low = _mm256_setzero_pd();
    __m256d high = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        __m256d p1 = _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        low = _mm256_add_pd(low, p0);
        high = _mm256_add_pd(high, p1);
    }
    alignas(32) double lane[8];
    _mm256_store_pd(lane, low);
    _mm256_store_pd(lane + 4, high);
    for (; i < n; ++i) {
        double product = a[i] * b[i];
        lane[i % 8] = lane[i % 8] + product;
    }
    return reduce_lanes(lane);
}

}  // namespace lancekit::simd::detail
#endif
