#include "lancekit/simd/dot.hpp"

namespace lancekit::simd::detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double lane[8] = {};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        for (std::size_t j = 0; j < 8; ++j) {
            double product = a[i + j] * b[i + j];
            lane[j] = lane[j] + product;
        }
    }
    for (; i < n; ++i) {
        double product = a[i] * b[i];
        lane[i % 8] = lane[i % 8] + product;
    }
    return reduce_lanes(lane);
}

}  // namespace lancekit::simd::detail
