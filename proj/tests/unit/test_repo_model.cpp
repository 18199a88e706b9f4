#include "fixtures.hpp"

#include "lancekit/errors.hpp"
#include "lancekit/repo_model.hpp"

#include <doctest.h>
#include <json.hpp>

#include <random>

using namespace lancekit;

namespace {

std::vector<nlohmann::json> records_of(const std::string& text) {
    std::vector<nlohmann::json> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(nlohmann::json::parse(line));
    return out;
}

ApiFunction make_function(std::string name, std::size_t start) {
    ApiFunction fn;
    fn.name = std::move(name);
    fn.file = "m.py";
    fn.owner = "m";
    fn.span = {start, start + 10};
    return fn;
}

std::string random_word(std::mt19937_64& rng) {
    static const std::vector<std::string> units = {"a", "b", "q", "z", "_", "X", "7", "\"", "\\", "\n", "\t",
                                                   "\xc3\xa9", "\xe2\x82\xac", " "};
    std::uniform_int_distribution<std::size_t> len(1, 12);
    std::uniform_int_distribution<std::size_t> pick(0, units.size() - 1);
    std::string out;
    for (std::size_t i = len(rng); i > 0; --i) out += units[pick(rng)];
    return out;
}

std::optional<std::string> maybe(std::mt19937_64& rng) {
    if (rng() % 2) return std::nullopt;
    return random_word(rng);
}

RepoIndex random_index(std::mt19937_64& rng) {
    RepoIndex index;
    index.repo_root = "/repo/" + random_word(rng);
    index.language = rng() % 2 ? Language::Python : Language::Java;
    index.created_at = "2024-05-01T10:00:00Z";
    const std::size_t files = 1 + rng() % 3;
    for (std::size_t f = 0; f < files; ++f) {
        const std::string file = "dir/f" + std::to_string(f) + ".py";
        std::vector<std::size_t> starts;
        const std::size_t count = rng() % 5;
        for (std::size_t i = 0; i < count; ++i) {
            ApiFunction fn;
            fn.name = random_word(rng);
            fn.visibility = static_cast<Visibility>(rng() % 5);
            for (std::size_t p = rng() % 4; p > 0; --p) fn.parameters.push_back({random_word(rng), maybe(rng), maybe(rng)});
            fn.comment = maybe(rng);
            fn.return_type = maybe(rng);
            fn.owner = maybe(rng);
            fn.file = file;
            fn.span = {i * 100, i * 100 + 1 + rng() % 99};
            starts.push_back(fn.span.start);
            index.functions.push_back(std::move(fn));
        }
        if (rng() % 2) {
            EntityRecord e;
            e.name = "e" + std::to_string(f);
            e.kind = rng() % 2 ? EntityKind::Class : EntityKind::Module;
            if (e.kind == EntityKind::Class) e.supertypes = {random_word(rng)};
            e.comment = maybe(rng);
            e.file = file;
            e.methods = starts;
            index.entities.push_back(std::move(e));
        }
        for (std::size_t b = rng() % 3; b > 0; --b) {
            ImportBinding binding;
            binding.kind = static_cast<ImportKind>(rng() % 3);
            binding.local_name = binding.kind == ImportKind::Wildcard ? "" : random_word(rng);
            binding.target = random_word(rng);
            binding.file = file;
            binding.relative = rng() % 2;
            binding.external = rng() % 2;
            index.imports_by_file[file].push_back(std::move(binding));
        }
    }
    if (rng() % 3 == 0) index.skipped_files = {"broken.py: parse error"};
    return index;
}

}  // namespace

TEST_CASE("one function gives a header and one function record") {
    RepoIndex index;
    index.repo_root = "/r";
    index.created_at = "t";
    index.functions.push_back(make_function("f", 0));
    const auto records = records_of(serialize_index(index));
    REQUIRE(records.size() == 2);
    CHECK(records[0]["kind"] == "header");
    CHECK(records[0]["schema_version"] == 1);
    CHECK(records[1]["kind"] == "function");
    for (const char* field : {"kind", "name", "visibility", "params", "comment", "return_type", "owner", "file",
                              "span_start", "span_end"}) {
        CHECK_MESSAGE(records[1].contains(field), field);
    }
}

TEST_CASE("empty index serializes to the header alone") {
    RepoIndex index;
    const auto records = records_of(serialize_index(index));
    REQUIRE(records.size() == 1);
    for (const char* field : {"repo_root", "language", "schema_version", "created_at"}) CHECK(records[0].contains(field));
}

TEST_CASE("text_processing fixture saves twelve function records") {
    const auto records = records_of(serialize_index(fixtures::python_index()));
    std::size_t owned = 0;
    for (const auto& r : records) {
        if (r["kind"] == "function" && r["owner"] == "text_processing") ++owned;
    }
    CHECK(owned == 12);
}

TEST_CASE("fixture indexes round-trip through a file") {
    fixtures::TempDir dir;
    for (const RepoIndex* index : {&fixtures::python_index(), &fixtures::java_index()}) {
        const auto path = dir.path() / "index.jsonl";
        save_index(*index, path);
        CHECK(load_index(path) == *index);
    }
}

TEST_CASE("randomized indexes round-trip") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 300; ++i) {
        const RepoIndex index = random_index(rng);
        REQUIRE(parse_index(serialize_index(index)) == index);
    }
}

TEST_CASE("truncated index names the line") {
    const std::string text = serialize_index(fixtures::python_index());
    const std::string cut = text.substr(0, text.find('\n', text.size() / 2) + 1);
    try {
        parse_index(cut);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        const std::size_t lines = static_cast<std::size_t>(std::count(cut.begin(), cut.end(), '\n'));
        CHECK(e.line() == lines + 1);
    }

    const std::string torn = text.substr(0, text.find('\n', text.size() / 2) - 5);
    CHECK_THROWS_AS(parse_index(torn), SchemaError);
}

TEST_CASE("newer schema versions are rejected") {
    RepoIndex index;
    std::string text = serialize_index(index);
    const std::string from = "\"schema_version\":1";
    REQUIRE(text.find(from) != std::string::npos);
    text.replace(text.find(from), from.size(), "\"schema_version\":2");
    try {
        parse_index(text);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.line() == 1);
    }
}

TEST_CASE("malformed records report their line") {
    std::string text = serialize_index(fixtures::python_index());
    const std::size_t second = text.find('\n') + 1;
    text.insert(second, "{not json}\n");
    try {
        parse_index(text);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("missing index file is an IoError") {
    CHECK_THROWS_AS(load_index("/nonexistent/index.jsonl"), IoError);
    CHECK_THROWS_AS(save_index(RepoIndex{}, "/nonexistent/dir/index.jsonl"), IoError);
}

TEST_CASE("validate flags dangling method references and duplicate spans") {
    RepoIndex index;
    index.functions.push_back(make_function("a", 0));
    index.functions.push_back(make_function("b", 0));
    EntityRecord e;
    e.name = "m";
    e.kind = EntityKind::Module;
    e.file = "m.py";
    e.methods = {0, 500};
    index.entities.push_back(e);
    const auto problems = validate(index);
    CHECK(problems.size() >= 2);
    CHECK(validate(fixtures::python_index()).empty());
    CHECK(validate(fixtures::java_index()).empty());
}

TEST_CASE("line and column derive from byte offsets") {
    CHECK(line_column("ab\ncd", 0) == std::pair<std::size_t, std::size_t>{1, 1});
    CHECK(line_column("ab\ncd", 4) == std::pair<std::size_t, std::size_t>{2, 2});
}
