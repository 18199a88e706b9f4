#include "fixtures.hpp"
#include "oracle.hpp"

#include "lancekit/errors.hpp"
#include "lancekit/vector_index.hpp"

#include <doctest.h>

#include <random>

using namespace lancekit;

namespace {

std::string random_name(std::mt19937_64& rng) {
    static const std::vector<std::string> parts = {"get", "set", "payment", "process", "refund", "text", "count",
                                                   "word", "review", "book", "room", "user", "email", "is", "valid"};
    std::string out = parts[rng() % parts.size()];
    for (std::size_t i = rng() % 3; i > 0; --i) out += "_" + parts[rng() % parts.size()];
    return out + std::to_string(rng() % 50);
}

/// Embedder that refuses one text.
class PickyEmbedder final : public Embedder {
public:
    std::string id() const override { return "picky"; }
    std::size_t dimension() const override { return kHashDimension; }
    EmbeddingVector embed(std::string_view text) override {
        if (text.find("refund") != std::string_view::npos) throw ServiceError("refused");
        return embed_hash(text);
    }
};

RepoIndex tiny_index() {
    RepoIndex index;
    ApiFunction fn;
    fn.name = "run";
    fn.owner = "tool";
    fn.file = "tool.py";
    fn.span = {0, 10};
    index.functions.push_back(fn);
    EntityRecord module;
    module.name = "tool";
    module.kind = EntityKind::Module;
    module.file = "tool.py";
    module.methods = {0};
    index.entities.push_back(module);
    return index;
}

}  // namespace

TEST_CASE("one function and one entity give two entries") {
    const VectorIndex vindex = build_vector_index(tiny_index(), fixtures::hash_embedder());
    CHECK(vindex.size() == 2);
    CHECK(vindex.count(PayloadKind::Function) == 1);
    CHECK(vindex.count(PayloadKind::Entity) == 1);
    CHECK(vindex.find("tool.run", PayloadKind::Function).has_value());
    CHECK(vindex.find("tool", PayloadKind::Entity).has_value());
    CHECK(vindex.embedder_id() == "hash-fnv1a-d256");
}

TEST_CASE("fixture keys") {
    const VectorIndex& vindex = fixtures::python_vectors();
    CHECK(vindex.find("text_processing.sentiment_analysis", PayloadKind::Function).has_value());
    CHECK(vindex.find("payment_processor", PayloadKind::Entity).has_value());
    CHECK(vindex.count(PayloadKind::Function) == fixtures::python_index().functions.size());
    CHECK(vindex.count(PayloadKind::Entity) == fixtures::python_index().entities.size());
}

TEST_CASE("overloads get numbered keys in declaration order") {
    const VectorIndex& vindex = fixtures::java_vectors();
    const std::string base = "com.hotel.text.TextProcessing.translate";
    CHECK(vindex.find(base + "#1", PayloadKind::Function).has_value());
    CHECK(vindex.find(base + "#2", PayloadKind::Function).has_value());
    CHECK_FALSE(vindex.find(base, PayloadKind::Function).has_value());
    const auto keys = function_keys(fixtures::java_index());
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (keys[i].starts_with(base + "#")) positions.push_back(i);
    }
    REQUIRE(positions.size() == 2);
    CHECK(keys[positions[0]] == base + "#1");
    const auto& first = fixtures::java_index().functions[positions[0]];
    const auto& second = fixtures::java_index().functions[positions[1]];
    CHECK(first.span.start < second.span.start);
}

TEST_CASE("stored vector is its own best match") {
    const VectorIndex& vindex = fixtures::python_vectors();
    for (std::size_t i = 0; i < vindex.size(); ++i) {
        const std::vector<double> probe(vindex.vector(i).begin(), vindex.vector(i).end());
        const auto top = vindex.query_topk(probe, 1, vindex.entries()[i].kind);
        REQUIRE(top.size() == 1);
        CHECK(top[0].similarity == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("k beyond the size returns every entry") {
    const VectorIndex& vindex = fixtures::python_vectors();
    CHECK(vindex.query_topk(embed_hash("payment"), 10000).size() == vindex.size());
    CHECK(vindex.query_topk(embed_hash("payment"), 10000, PayloadKind::Entity).size() ==
          vindex.count(PayloadKind::Entity));
}

TEST_CASE("process payment ranks process_payment first") {
    const VectorIndex& vindex = fixtures::python_vectors();
    const auto top = vindex.query_topk(embed_hash("process payment"), 3, PayloadKind::Function);
    REQUIRE(top.size() == 3);
    CHECK(top[0].key == "payment_processor.process_payment");

    std::vector<std::pair<std::string, std::string>> items;
    for (const IndexEntry& e : vindex.entries()) {
        if (e.kind == PayloadKind::Function) items.emplace_back(e.key, e.key);
    }
    const auto expected = oracle::rank("process payment", items);
    for (std::size_t i = 0; i < 3; ++i) CHECK(top[i].key == expected[i].key);
}

TEST_CASE("query errors") {
    const VectorIndex& vindex = fixtures::python_vectors();
    CHECK_THROWS_AS(vindex.query_topk(std::vector<double>(3, 0.5), 1), DimensionMismatchError);
    CHECK_THROWS_AS(vindex.query_topk(embed_hash("x"), 0), Error);
}

TEST_CASE("insert checks") {
    VectorIndex vindex("test", 2);
    vindex.add("a", PayloadKind::Function, 0, std::vector<double>{1.0, 0.0});
    CHECK_THROWS_AS(vindex.add("a", PayloadKind::Function, 0, std::vector<double>{0.0, 1.0}), Error);
    vindex.add("a", PayloadKind::Entity, 0, std::vector<double>{0.0, 1.0});
    CHECK_THROWS_AS(vindex.add("b", PayloadKind::Function, 0, std::vector<double>{1.0}), DimensionMismatchError);
    CHECK_THROWS_AS(vindex.add("b", PayloadKind::Function, 0, std::vector<double>{0.0, 0.0}), InvalidVectorError);
    CHECK_THROWS_AS(vindex.add("b", PayloadKind::Function, 0, std::vector<double>{1.0, 1.0}), InvalidVectorError);
}

TEST_CASE("ties break on key") {
    VectorIndex vindex("test", 2);
    vindex.add("b", PayloadKind::Function, 0, std::vector<double>{1.0, 0.0});
    vindex.add("a", PayloadKind::Function, 1, std::vector<double>{1.0, 0.0});
    vindex.add("c", PayloadKind::Function, 2, std::vector<double>{0.0, 1.0});
    const auto top = vindex.query_topk(std::vector<double>{1.0, 0.0}, 3);
    CHECK(top[0].key == "a");
    CHECK(top[1].key == "b");
    CHECK(top[2].key == "c");
}

TEST_CASE("top-k equals brute force on random indexes") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + rng() % 1000;
        VectorIndex vindex("hash", kHashDimension);
        std::vector<std::pair<std::string, std::vector<long double>>> reference;
        std::set<std::string> used;
        for (std::size_t i = 0; i < n; ++i) {
            std::string key = random_name(rng);
            if (!used.insert(key).second) continue;
            vindex.add(key, PayloadKind::Function, i, embed_hash(key));
            reference.emplace_back(key, oracle::embed(key));
        }
        const std::string probe = random_name(rng);
        const std::size_t k = 1 + rng() % (reference.size() + 5);
        const auto got = vindex.query_topk(embed_hash(probe), k);
        const auto expected = oracle::rank_vectors(oracle::embed(probe), reference);
        REQUIRE(got.size() == std::min(k, reference.size()));
        for (std::size_t i = 0; i < got.size(); ++i) {
            REQUIRE_MESSAGE(got[i].key == expected[i].key, "trial " << trial << " rank " << i);
            CHECK(got[i].similarity >= -1.0);
            CHECK(got[i].similarity <= 1.0);
            if (i > 0) CHECK(got[i - 1].similarity >= got[i].similarity);
        }
    }
}

TEST_CASE("sidecar round-trip and corruption") {
    fixtures::TempDir dir;
    const auto path = dir.path() / "index.vec";
    fixtures::python_vectors().save(path);
    CHECK(VectorIndex::load(path) == fixtures::python_vectors());
    fixtures::write(dir.path() / "bad.vec", "LKVX garbage");
    CHECK_THROWS_AS(VectorIndex::load(dir.path() / "bad.vec"), Error);
    std::string bytes = fixtures::read(path);
    fixtures::write(dir.path() / "short.vec", bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(VectorIndex::load(dir.path() / "short.vec"), Error);
    CHECK_THROWS_AS(VectorIndex::load(dir.path() / "missing.vec"), IoError);
}

TEST_CASE("embedder failures name the key and keep their type") {
    PickyEmbedder picky;
    try {
        build_vector_index(fixtures::python_index(), picky);
        FAIL("expected ServiceError");
    } catch (const ServiceError& e) {
        CHECK(std::string(e.what()).find("refund_payment") != std::string::npos);
    }
    CHECK_THROWS_AS(build_vector_index(RepoIndex{}, fixtures::hash_embedder()), EmptyRepoError);
}

TEST_CASE("signature embedding is opt-in") {
    const ApiFunction& fn = *fixtures::python_index().functions_named("payment_processor.process_payment").front();
    CHECK(embedding_text(fn, false) == "payment_processor.process_payment");
    CHECK(embedding_text(fn, true) != embedding_text(fn, false));
}
