#include "lancekit/simd/dot.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

namespace lancekit::simd::detail {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc[4] = {vdupq_n_f64(0.0), vdupq_n_f64(0.0), vdupq_n_f64(0.0), vdupq_n_f64(0.0)};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        for (int r = 0; r < 4; ++r) {
            float64x2_t product = vmulq_f64(vld1q_f64(a + i + 2 * r), vld1q_f64(b + i + 2 * r));
            acc[r] = vaddq_f64(acc[r], product);
        }
    }
    double lane[8];
    for (int r = 0; r < 4; ++r) vst1q_f64(lane + 2 * r, acc[r]);
    for (; i < n; ++i) {
        double product = a[i] * b[i];
        lane[i % 8] = lane[i % 8] + product;
    }
    return reduce_lanes(lane);
}

}  // namespace lancekit::simd::detail
#endif
