#include "lancekit/errors.hpp"
#include "lancekit/simd/dot.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

using namespace lancekit::simd;

namespace {

std::vector<Isa> available() {
    std::vector<Isa> out;
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
        if (isa_available(isa)) out.push_back(isa);
    }
    return out;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("scalar kernel is always present and the active one is available") {
    CHECK(isa_available(Isa::Scalar));
    CHECK(isa_available(active_isa()));
    MESSAGE("active kernel: " << to_string(active_isa()));
}

TEST_CASE("every kernel matches scalar bit for bit") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> value(0.0, 1.0);
    for (std::size_t dim : {0u, 1u, 3u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 255u, 256u, 257u, 1000u}) {
        const std::size_t rows = 13;
        std::vector<double> matrix(rows * dim);
        std::vector<double> probe(dim);
        for (double& x : matrix) x = value(rng);
        for (double& x : probe) x = value(rng);
        std::vector<double> reference(rows);
        dot_rows_with(Isa::Scalar, matrix.data(), rows, dim, probe.data(), reference.data());
        for (Isa isa : available()) {
            std::vector<double> got(rows);
            dot_rows_with(isa, matrix.data(), rows, dim, probe.data(), got.data());
            for (std::size_t r = 0; r < rows; ++r) {
                CHECK_MESSAGE(same_bits(got[r], reference[r]), to_string(isa) << " dim=" << dim << " row=" << r);
            }
        }
        std::vector<double> dispatched(rows);
        dot_rows(matrix.data(), rows, dim, probe.data(), dispatched.data());
        for (std::size_t r = 0; r < rows; ++r) CHECK(same_bits(dispatched[r], reference[r]));
    }
}

TEST_CASE("scalar kernel agrees with a long double dot product") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng() % 300;
        std::vector<double> a(n);
        std::vector<double> b(n);
        long double exact = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = value(rng);
            b[i] = value(rng);
            exact += static_cast<long double>(a[i]) * b[i];
        }
        CHECK(std::fabs(detail::dot_scalar(a.data(), b.data(), n) - static_cast<double>(exact)) < 1e-12);
    }
}

TEST_CASE("lane reduction order") {
    const double lanes[8] = {1e16, 1.0, -1e16, 1.0, 1.0, 0.0, 0.0, 0.0};
    CHECK(detail::reduce_lanes(lanes) == ((1e16 + 1.0) + (-1e16 + 0.0)) + ((1.0 + 0.0) + (1.0 + 0.0)));
}

TEST_CASE("unavailable kernels are refused") {
    for (Isa isa : {Isa::Avx2, Isa::Neon}) {
        if (isa_available(isa)) continue;
        double a = 1.0;
        double out = 0.0;
        CHECK_THROWS_AS(dot_rows_with(isa, &a, 1, 1, &a, &out), lancekit::Error);
    }
}
