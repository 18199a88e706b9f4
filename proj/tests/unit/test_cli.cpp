#include "fixtures.hpp"

#include "cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sstream>

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    Outcome o;
    o.code = lancekit::cli::run(args, out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

std::size_t count_lines(const std::string& text) { return std::count(text.begin(), text.end(), '\n'); }

/// Temporary directory holding indexes of both fixture repositories.
struct Indexed {
    fixtures::TempDir dir;
    std::string python = (dir.path() / "py.json").string();
    std::string java = (dir.path() / "java.json").string();
    Indexed() {
        REQUIRE(run({"index", fixtures::python_repo().string(), "--out", python, "--lang", "python"}).code == 0);
        REQUIRE(run({"index", fixtures::java_repo().string(), "--out", java, "--lang", "java"}).code == 0);
    }
};

Indexed& indexed() {
    static Indexed shared;
    return shared;
}

}  // namespace

TEST_CASE("help exits zero") {
    const Outcome help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("index") != std::string::npos);
    CHECK(run({"index", "--help"}).code == 0);
    CHECK(run({}).code == lancekit::cli::kExitData);
    CHECK(run({"bogus"}).code == lancekit::cli::kExitData);
}

TEST_CASE("index reports counts") {
    fixtures::TempDir dir;
    const std::string out = (dir.path() / "py.json").string();
    const Outcome o = run({"index", fixtures::python_repo().string(), "--out", out, "--lang", "python"});
    REQUIRE(o.code == 0);
    CHECK(o.out.find("functions: 34\n") != std::string::npos);
    CHECK(o.out.find("entities: 13\n") != std::string::npos);
    CHECK(o.out.find("  text_processing: 12 functions\n") != std::string::npos);
    CHECK(std::filesystem::exists(out));
    CHECK(std::filesystem::exists(out + ".vec"));

    CHECK(run({"index", fixtures::python_repo().string(), "--out", out, "--lang", "go"}).code == 2);
    CHECK(run({"index", (dir.path() / "nowhere").string(), "--out", out, "--lang", "python"}).code == 2);
    CHECK(run({"index", fixtures::python_repo().string(), "--lang", "python"}).code == 2);
}

TEST_CASE("token completion") {
    const Outcome o = run({"complete", "token", "--index", indexed().python, "--file", fixtures::kPythonMain,
                           "--cursor", "20:28"});
    REQUIRE(o.code == 0);
    CHECK(o.out == "tp.sentiment_analysis(text)\n");

    const Outcome explain = run({"complete", "token", "--index", indexed().python, "--file", fixtures::kPythonMain,
                                 "--cursor", "20:28", "--explain", "--k", "4"});
    REQUIRE(explain.code == 0);
    CHECK(explain.out.find("module: text_processing\n") != std::string::npos);
    const std::size_t header = explain.out.find("rank\tscore\tkey\tsignature\n");
    REQUIRE(header != std::string::npos);
    // Header, four rows, then the completion itself.
    CHECK(count_lines(explain.out.substr(header)) == 6);
    CHECK(explain.out.find("1\t", header) != std::string::npos);

    const Outcome full = run({"complete", "token", "--index", indexed().python, "--file", fixtures::kPythonMain,
                              "--cursor", "20:28", "--explain", "--k", "50"});
    // The module has twelve functions, so k beyond that shows all of them.
    CHECK(count_lines(full.out.substr(full.out.find("rank\t"))) == 14);
}

TEST_CASE("token completion errors") {
    const std::string index = indexed().python;
    CHECK(run({"complete", "token", "--index", index, "--file", fixtures::kPythonMain, "--cursor", "1:1"}).code == 2);
    CHECK(run({"complete", "token", "--index", index, "--file", fixtures::kPythonMain, "--cursor", "999999"}).code ==
          2);
    CHECK(run({"complete", "token", "--index", index, "--file", "missing.py", "--cursor", "0"}).code == 2);
    CHECK(run({"complete", "token", "--index", index + ".nope", "--file", fixtures::kPythonMain, "--cursor", "0"})
              .code == 2);
    CHECK(run({"complete", "token", "--index", index, "--file", fixtures::kPythonMain, "--cursor", "20:28", "--llm",
               "remote", "--cache-dir", (indexed().dir.path() / "c").string()})
              .code == 3);
}

TEST_CASE("query completion") {
    const Outcome bare = run({"complete", "query", "--index", indexed().python, "--query",
                              "how to process payment with PaymentProcessor?"});
    REQUIRE(bare.code == 0);
    CHECK(bare.out == "payment_processor.process_payment(name, payment)\n");
    const Outcome in_file = run({"complete", "query", "--index", indexed().python, "--query",
                                 "how to process payment with PaymentProcessor?", "--file", fixtures::kPythonMain,
                                 "--cursor", "41:13"});
    REQUIRE(in_file.code == 0);
    CHECK(in_file.out == "pp.process_payment(name, payment)\n");
    CHECK(run({"complete", "query", "--index", indexed().python, "--query", "?? 42"}).code == 2);
    CHECK(run({"complete", "query", "--index", indexed().python, "--query", "pay", "--cursor", "3"}).code == 2);
}

TEST_CASE("eval writes a report and honors the mode filter") {
    fixtures::TempDir dir;
    const std::string report = (dir.path() / "report.json").string();
    const std::string csv = (dir.path() / "report.csv").string();
    const Outcome all = run({"eval", "--index", indexed().python, "--tasks",
                             fixtures::tasks("python_hotel.jsonl").string(), "--report", report, "--csv", csv,
                             "--generated-at", "2000-01-01T00:00:00Z"});
    REQUIRE(all.code == 0);
    CHECK(all.out.starts_with("tasks: 6\ncall=100.0% args="));
    const auto doc = nlohmann::json::parse(fixtures::read(report));
    CHECK(doc["tasks"].size() == 6);
    CHECK(doc["generated_at"] == "2000-01-01T00:00:00Z");
    CHECK(count_lines(fixtures::read(csv)) == 7);

    const Outcome token = run({"eval", "--tasks", fixtures::tasks("python_hotel.jsonl").string(), "--report", report,
                               "--mode", "token"});
    REQUIRE(token.code == 0);
    CHECK(token.out.starts_with("tasks: 4\n"));
    CHECK(run({"eval", "--tasks", fixtures::tasks("python_hotel.jsonl").string(), "--report", report, "--mode",
               "sideways"})
              .code == 2);
}

TEST_CASE("eval rejects malformed task files with the line") {
    fixtures::TempDir dir;
    const std::string tasks = fixtures::read(fixtures::tasks("python_hotel.jsonl"));
    const std::string broken = tasks.substr(0, tasks.find('\n') + 1) + "{\"id\": \"half\"\n";
    const auto path = dir.path() / "broken.jsonl";
    fixtures::write(path, broken);
    const Outcome o = run({"eval", "--tasks", path.string(), "--report", (dir.path() / "r.json").string()});
    CHECK(o.code == 2);
    CHECK(o.err.find("line 2") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir.path() / "r.json"));
}

TEST_CASE("inspect lists entities and functions") {
    const Outcome summary = run({"inspect", "--index", indexed().java});
    REQUIRE(summary.code == 0);
    CHECK(summary.out.find("language: java\n") != std::string::npos);
    CHECK(summary.out.find("functions: 17\n") != std::string::npos);
    const Outcome entity = run({"inspect", "--index", indexed().python, "--entity", "text_processing"});
    REQUIRE(entity.code == 0);
    CHECK(count_lines(entity.out) >= 12);
    CHECK(run({"inspect", "--index", indexed().python, "--entity", "nope"}).code == 2);
}

TEST_CASE("config files supply defaults and flags win") {
    fixtures::TempDir dir;
    const auto config = dir.path() / "lancekit.toml";
    fixtures::write(config, "[complete.token]\nk = 2\n");
    const Outcome o = run({"--config", config.string(), "complete", "token", "--index", indexed().python, "--file",
                           fixtures::kPythonMain, "--cursor", "20:28", "--explain"});
    REQUIRE(o.code == 0);
    CHECK(count_lines(o.out.substr(o.out.find("rank\t"))) == 4);
    const Outcome flag = run({"--config", config.string(), "complete", "token", "--index", indexed().python, "--file",
                              fixtures::kPythonMain, "--cursor", "20:28", "--explain", "--k", "3"});
    CHECK(count_lines(flag.out.substr(flag.out.find("rank\t"))) == 5);
}
