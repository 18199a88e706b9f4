#include "fixtures.hpp"
#include "scripted_transport.hpp"

#include "lancekit/errors.hpp"
#include "lancekit/eval_harness.hpp"

#include <doctest.h>
#include <json.hpp>

#include <random>

using namespace lancekit;

namespace {

std::string python_main() { return fixtures::read(fixtures::python_repo() / fixtures::kPythonMain); }

EvalTask python_task(std::string expected, std::vector<std::string> args = {}) {
    EvalTask task;
    task.id = "t";
    task.repo_path = fixtures::python_repo();
    task.context_file = fixtures::kPythonMain;
    task.cursor = 0;
    task.expected_call = std::move(expected);
    task.expected_args = std::move(args);
    return task;
}

std::string task_line(const std::string& extra) {
    return R"({"id": "x", "repo_ref": "../python_hotel", "language": "python", "context_file": "a.py", )"
           R"("expected_call": "m.f", "expected_args": [])" + extra + "}";
}

/// Removes fields that depend on wall-clock time or cache state.
nlohmann::json without_timing(const std::string& report) {
    nlohmann::json doc = nlohmann::json::parse(report);
    doc.erase("generated_at");
    doc["aggregates"].erase("inference_time_ms");
    for (auto& row : doc["table"]) row.erase("inference_time_ms");
    for (auto& task : doc["tasks"]) {
        task.erase("latency_ms");
        task.erase("cached");
    }
    return doc;
}

}  // namespace

TEST_CASE("predicted calls are parsed from model text") {
    PredictedCall a = parse_predicted_call("tp.sentiment_analysis(review_text)", Language::Python);
    CHECK(a.callee == "tp.sentiment_analysis");
    CHECK(a.arguments == std::vector<std::string>{"review_text"});
    PredictedCall b = parse_predicted_call("pp.process_payment(payment)", Language::Python);
    CHECK(b.callee == "pp.process_payment");
    CHECK(b.arguments == std::vector<std::string>{"payment"});
    PredictedCall c = parse_predicted_call("f(g(a, b), c)", Language::Python);
    CHECK(c.callee == "f");
    CHECK(c.arguments == std::vector<std::string>{"g(a, b)", "c"});
    PredictedCall d = parse_predicted_call("```python\nx = dbh.save(\"a, b\", [1, 2])\n```", Language::Python);
    CHECK(d.callee == "dbh.save");
    CHECK(d.arguments == std::vector<std::string>{"\"a, b\"", "[1, 2]"});
    CHECK(parse_predicted_call("if ok(x):", Language::Python).callee == "ok");
    CHECK(parse_predicted_call("g()", Language::Java).arguments.empty());
    CHECK(parse_predicted_call("new Payment(1).charge()", Language::Java).callee == "Payment");
    CHECK_THROWS_AS(parse_predicted_call("no call here", Language::Python), NoCallFoundError);
    CHECK_THROWS_AS(parse_predicted_call("", Language::Python), NoCallFoundError);
    CHECK_THROWS_AS(parse_predicted_call("f(a, b", Language::Python), NoCallFoundError);
}

TEST_CASE("call scoring resolves aliases") {
    const RepoIndex& index = fixtures::python_index();
    const std::string content = python_main();
    const EvalTask sentiment = python_task("text_processing.sentiment_analysis");
    CHECK(score_call("tp.sentiment_analysis", sentiment, index, content));
    CHECK(score_call("text_processing.sentiment_analysis", sentiment, index, content));
    CHECK_FALSE(score_call("tp.analyze", sentiment, index, content));
    CHECK_FALSE(score_call("sentiment_analysis", sentiment, index, content));
    CHECK(qualify_callee("tp.sentiment_analysis", index, fixtures::kPythonMain, content) ==
          "text_processing.sentiment_analysis");
    CHECK(qualify_callee("unknown.f", index, fixtures::kPythonMain, content) == "unknown.f");
}

TEST_CASE("failure pairs from a course catalogue") {
    RepoIndex index;
    index.language = Language::Python;
    for (const char* name : {"is_course_active", "is_course_available", "display_items", "get_all_items"}) {
        ApiFunction fn;
        fn.name = name;
        fn.owner = "catalog";
        fn.file = "catalog.py";
        index.functions.push_back(fn);
    }
    EvalTask task;
    task.expected_call = "catalog.is_course_available";
    CHECK_FALSE(score_call("catalog.is_course_active", task, index));
    CHECK(score_call("catalog.is_course_available", task, index));
    task.expected_call = "catalog.get_all_items";
    CHECK_FALSE(score_call("catalog.display_items", task, index));
}

TEST_CASE("argument scoring") {
    EvalTask task = python_task("payment_processor.process_payment", {"name", "payment"});
    CHECK_FALSE(score_arguments({"payment"}, task));
    CHECK(score_arguments({"name", "payment"}, task));
    CHECK(score_arguments({" name ", "(payment)"}, task));
    CHECK_FALSE(score_arguments({"payment", "name"}, task));

    EvalTask email = python_task("validation.is_valid_email", {"user_details.email"});
    email.accepted_arg_variants = {{"user_details['email']"}};
    CHECK(score_arguments({"user_details['email']"}, email));
    CHECK(score_arguments({"user_details.email"}, email));
    CHECK_FALSE(score_arguments({"user_details"}, email));

    CHECK(normalize_argument("  a  +\n b ") == "a + b");
    CHECK(normalize_argument("((x))") == "x");
    CHECK(normalize_argument("(a)(b)") == "(a)(b)");
    CHECK(normalize_argument("f(x)") == "f(x)");
}

TEST_CASE("percentages round to one decimal") {
    CHECK(percentage(0, 0) == 0.0);
    CHECK(percentage(1, 3) == doctest::Approx(33.3));
    CHECK(percentage(2, 3) == doctest::Approx(66.7));
    CHECK(percentage(4, 4) == 100.0);
    CHECK(percentage(1, 8) == doctest::Approx(12.5));
}

TEST_CASE("argument accuracy never exceeds call accuracy") {
    std::mt19937 rng(7);
    for (int round = 0; round < 1000; ++round) {
        std::vector<TaskRecord> records(1 + rng() % 40);
        for (std::size_t i = 0; i < records.size(); ++i) {
            records[i].id = "t" + std::to_string(rng() % 1000) + "-" + std::to_string(i);
            records[i].mode = rng() % 2 ? CompletionMode::Token : CompletionMode::Conversational;
            records[i].language = rng() % 2 ? Language::Python : Language::Java;
            records[i].call_match = rng() % 2;
            // Deliberately inconsistent input: arg credit without a call match must not count.
            records[i].arg_match = rng() % 2;
            records[i].latency_ms = rng() % 500;
            records[i].from_cache = rng() % 4 == 0;
        }
        const EvalReport report = summarize(records);
        CHECK(report.aggregates.argument_matching_pct <= report.aggregates.call_accuracy_pct);
        CHECK(report.aggregates.tasks == records.size());
        for (const MetricRow& row : report.table) CHECK(row.argument_matching_pct <= row.call_accuracy_pct);
        CHECK(std::is_sorted(report.tasks.begin(), report.tasks.end(),
                             [](const TaskRecord& a, const TaskRecord& b) { return a.id < b.id; }));
    }
}

TEST_CASE("latency ignores cache hits unless asked") {
    std::vector<TaskRecord> records(2);
    records[0].id = "a";
    records[0].latency_ms = 10;
    records[1].id = "b";
    records[1].latency_ms = 30;
    records[1].from_cache = true;
    CHECK(summarize(records).aggregates.inference_time_ms == 10.0);
    CHECK(summarize(records, true).aggregates.inference_time_ms == 20.0);
}

TEST_CASE("task files are validated strictly") {
    const auto tasks = load_tasks(fixtures::tasks("python_hotel.jsonl"));
    CHECK(tasks.size() == 6);
    CHECK(tasks.front().repo_path == fixtures::python_repo());
    CHECK(tasks.front().line == 1);

    const std::filesystem::path base = fixtures::root() / "tasks";
    CHECK(parse_tasks(task_line(R"(, "mode": "token", "cursor": 3)"), base).size() == 1);
    try {
        parse_tasks(task_line(R"(, "mode": "token", "cursor": 3)") + "\n\n" + task_line(R"(, "mode": "token")"),
                    base);
        FAIL("missing cursor accepted");
    } catch (const TaskSchemaError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_tasks("", base), TaskSchemaError);
    CHECK_THROWS_AS(parse_tasks("\n  \n", base), TaskSchemaError);
    CHECK_THROWS_AS(parse_tasks(task_line(R"(, "mode": "conversational")"), base), TaskSchemaError);
    CHECK_THROWS_AS(parse_tasks(task_line(R"(, "mode": "token", "cursor": 3, "extra": 1)"), base), TaskSchemaError);
    CHECK_THROWS_AS(parse_tasks(task_line(R"(, "mode": "token", "cursor": -1)"), base), TaskSchemaError);
    CHECK_THROWS_AS(parse_tasks(task_line(R"(, "mode": "sideways", "cursor": 3)"), base), TaskSchemaError);
    CHECK_THROWS_AS(parse_tasks("{not json", base), TaskSchemaError);
    const std::string twice = task_line(R"(, "mode": "token", "cursor": 3)");
    CHECK_THROWS_AS(parse_tasks(twice + "\n" + twice, base), TaskSchemaError);
    CHECK_THROWS_AS(load_tasks(base / "missing.jsonl"), IoError);
}

TEST_CASE("fixture suite under the mock") {
    MockLlm mock;
    WorkspaceCache cache(fixtures::hash_embedder(), fixtures::fixed_options());
    const auto lookup = [&](const EvalTask& t) -> const Workspace& { return cache.get(t); };
    EvalConfig config;
    config.generated_at = "2000-01-01T00:00:00Z";

    const auto tasks = load_tasks(fixtures::tasks("python_hotel.jsonl"));
    config.mode_filter = CompletionMode::Token;
    const EvalReport token = run_eval(tasks, lookup, fixtures::hash_embedder(), mock, config);
    CHECK(token.tasks.size() == 4);
    CHECK(token.aggregates.call_accuracy_pct == 100.0);
    CHECK(token.config.at("mode") == "token");
    CHECK(token.config.at("llm") == "mock");

    config.mode_filter.reset();
    const EvalReport all = run_eval(tasks, lookup, fixtures::hash_embedder(), mock, config);
    CHECK(all.tasks.size() == 6);
    CHECK(all.aggregates.call_accuracy_pct == 100.0);
    CHECK(all.aggregates.argument_matching_pct <= all.aggregates.call_accuracy_pct);
    CHECK(all.table.size() == 2);

    const EvalReport adversarial =
        run_eval(load_tasks(fixtures::tasks("python_adversarial.jsonl")), lookup, fixtures::hash_embedder(), mock, config);
    REQUIRE(adversarial.tasks.size() == 1);
    CHECK_FALSE(adversarial.tasks[0].call_match);
    CHECK_FALSE(adversarial.tasks[0].error.has_value());

    const EvalReport java =
        run_eval(load_tasks(fixtures::tasks("java_hotel.jsonl")), lookup, fixtures::hash_embedder(), mock, config);
    CHECK(java.tasks.size() == 5);
    CHECK(java.aggregates.call_accuracy_pct == 100.0);

    const std::string json = report_json(all);
    CHECK(json == report_json(run_eval(tasks, lookup, fixtures::hash_embedder(), mock, config)));
    const auto doc = nlohmann::json::parse(json);
    CHECK(doc.contains("aggregates"));
    CHECK(doc["tasks"].size() == 6);
    CHECK(doc["generated_at"] == "2000-01-01T00:00:00Z");
    const std::string csv = report_csv(all);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    CHECK(report_summary_line(all).starts_with("call=100.0% args="));
}

TEST_CASE("tasks whose expected call is not indexed abort the run") {
    MockLlm mock;
    WorkspaceCache cache(fixtures::hash_embedder(), fixtures::fixed_options());
    auto tasks = load_tasks(fixtures::tasks("python_hotel.jsonl"));
    tasks[2].expected_call = "text_processing.nothing";
    try {
        run_eval(tasks, [&](const EvalTask& t) -> const Workspace& { return cache.get(t); }, fixtures::hash_embedder(),
                 mock, EvalConfig{});
        FAIL("unindexed expected call accepted");
    } catch (const TaskSchemaError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("warm cache rerun makes no network calls and repeats the report") {
    fixtures::TempDir dir;
    fixtures::ScriptedTransport service{
        {HttpResponse{200, R"j({"choices":[{"message":{"content":"tp.sentiment_analysis(review_text)"}}]})j", ""}}};
    ChatClientConfig chat;
    chat.url = "http://chat.invalid";
    chat.key = "k";
    chat.cache_dir = dir.path();
    chat.requests_per_second = 0.0;
    WorkspaceCache cache(fixtures::hash_embedder(), fixtures::fixed_options());
    const auto lookup = [&](const EvalTask& t) -> const Workspace& { return cache.get(t); };
    const auto tasks = load_tasks(fixtures::tasks("python_hotel.jsonl"));
    EvalConfig config;
    config.generated_at = "2000-01-01T00:00:00Z";

    RemoteChatClient cold(chat, service.bind());
    const std::string first = report_json(run_eval(tasks, lookup, fixtures::hash_embedder(), cold, config));
    CHECK(cold.network_calls() > 0);
    const std::size_t sent = service.bodies.size();

    RemoteChatClient warm(chat, service.bind());
    const EvalReport second_report = run_eval(tasks, lookup, fixtures::hash_embedder(), warm, config);
    const std::string second = report_json(second_report);
    CHECK(warm.network_calls() == 0);
    CHECK(service.bodies.size() == sent);
    for (const TaskRecord& r : second_report.tasks) CHECK(r.from_cache);
    CHECK(without_timing(first) == without_timing(second));

    RemoteChatClient again(chat, service.bind());
    config.generated_at = "2001-01-01T00:00:00Z";
    const std::string third = report_json(run_eval(tasks, lookup, fixtures::hash_embedder(), again, config));
    CHECK(nlohmann::json::parse(second)["tasks"] == nlohmann::json::parse(third)["tasks"]);
    CHECK(without_timing(second) == without_timing(third));
}
