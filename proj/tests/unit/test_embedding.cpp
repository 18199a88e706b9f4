#include "oracle.hpp"

#include "lancekit/embedding.hpp"
#include "lancekit/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace lancekit;

namespace {

std::string random_name(std::mt19937_64& rng) {
    static const std::vector<std::string> parts = {"get", "set", "Payment", "process", "_", "2", "tokenize", "HTTP",
                                                   "Server", "x", "\xc3\xa9t\xc3\xa9", ".", "Review", "count", "Words"};
    std::string out = "w";
    for (std::size_t i = 1 + rng() % 5; i > 0; --i) out += parts[rng() % parts.size()];
    return out;
}

double norm(const EmbeddingVector& v) { return l2_norm(v); }

}  // namespace

TEST_CASE("subtokens split on separators, digits and camel boundaries") {
    CHECK(subtokens("sentiment_analysis") == std::vector<std::string>{"sentiment", "analysis"});
    CHECK(subtokens("PaymentProcessor") == std::vector<std::string>{"payment", "processor"});
    CHECK(subtokens("text_processing.tokenize") == std::vector<std::string>{"text", "processing", "tokenize"});
    CHECK(subtokens("utf8Decode") == std::vector<std::string>{"utf", "decode"});
    CHECK(subtokens("HTTPServer") == std::vector<std::string>{"httpserver"});
    CHECK(subtokens("Payment Processor") == subtokens("PaymentProcessor"));
}

TEST_CASE("features are subtokens plus trigrams") {
    CHECK(hash_features("abcd") == std::vector<std::string>{"abcd", "abc", "bcd"});
    CHECK(hash_features("ab") == std::vector<std::string>{"ab"});
    CHECK(hash_features("\xc3\xa9t\xc3\xa9") == std::vector<std::string>{"\xc3\xa9t\xc3\xa9", "\xc3\xa9t\xc3\xa9"});
}

TEST_CASE("fnv-1a reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("hash embedding is unit length and matches the reference") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 300; ++i) {
        const std::string name = random_name(rng);
        const EmbeddingVector v = embed_hash(name);
        const std::vector<long double> ref = oracle::embed(name);
        REQUIRE(v.size() == kHashDimension);
        REQUIRE(ref.size() == kHashDimension);
        CHECK(std::fabs(norm(v) - 1.0) < kUnitTolerance);
        for (std::size_t d = 0; d < v.size(); ++d) CHECK(std::fabs(v[d] - static_cast<double>(ref[d])) < 1e-12);
    }
}

TEST_CASE("embedding is pure") {
    std::mt19937_64 rng(9);
    HashEmbedder embedder;
    for (int i = 0; i < 1000; ++i) {
        const std::string name = random_name(rng);
        CHECK(embedder.embed(name) == embedder.embed(name));
    }
}

TEST_CASE("shared subtoken raises similarity") {
    const double near = cosine(embed_hash("sentiment"), embed_hash("sentiment_analysis"));
    const double far = cosine(embed_hash("sentiment"), embed_hash("tokenize"));
    CHECK(near > far);
    const long double ref_near = oracle::cosine(oracle::embed("sentiment"), oracle::embed("sentiment_analysis"));
    const long double ref_far = oracle::cosine(oracle::embed("sentiment"), oracle::embed("tokenize"));
    CHECK(ref_near > ref_far);
    CHECK(std::fabs(near - static_cast<double>(ref_near)) < 1e-12);
}

TEST_CASE("empty text is rejected") {
    CHECK_THROWS_AS(embed_hash(""), EmptyTextError);
    CHECK_THROWS_AS(embed_hash("_ 42 ."), EmptyTextError);
}

TEST_CASE("vector helpers") {
    CHECK_THROWS_AS(normalized(std::vector<double>(4, 0.0)), InvalidVectorError);
    CHECK_THROWS_AS(normalized(std::vector<double>{1.0, NAN}), InvalidVectorError);
    const EmbeddingVector unit = normalized(std::vector<double>{3.0, 4.0});
    CHECK(unit[0] == doctest::Approx(0.6));
    CHECK(unit[1] == doctest::Approx(0.8));
    CHECK_THROWS_AS(cosine(std::vector<double>{1.0}, std::vector<double>{1.0, 0.0}), DimensionMismatchError);
    CHECK(cosine(std::vector<double>{2.0, 0.0}, std::vector<double>{0.5, 0.0}) == doctest::Approx(1.0));
}

TEST_CASE("scaling the accumulator leaves cosine unchanged") {
    const auto acc_a = hash_accumulator("process_payment");
    const auto acc_b = hash_accumulator("payment");
    std::vector<double> a(acc_a.begin(), acc_a.end());
    std::vector<double> b(acc_b.begin(), acc_b.end());
    const double base = cosine(a, b);
    for (double scale : {0.5, 3.0, 1e6}) {
        std::vector<double> scaled = a;
        for (double& x : scaled) x *= scale;
        CHECK(cosine(scaled, b) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("cancelling features fall back to unsigned counts") {
    for (const char* name : {"wJo", "wIv", "wSP", "w25iv"}) {
        const EmbeddingVector v = embed_hash(name);
        CHECK(std::fabs(norm(v) - 1.0) < kUnitTolerance);
        for (double x : v) CHECK(x >= 0.0);
        const std::vector<long double> ref = oracle::embed(name);
        REQUIRE(ref.size() == kHashDimension);
        for (std::size_t d = 0; d < v.size(); ++d) CHECK(std::fabs(v[d] - static_cast<double>(ref[d])) < 1e-12);
    }
}
