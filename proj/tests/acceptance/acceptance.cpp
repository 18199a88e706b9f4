// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "fixtures.hpp"
#include "oracle.hpp"
#include "ranking_check.hpp"

#include "cli.hpp"
#include "lancekit/errors.hpp"
#include "lancekit/eval_harness.hpp"
#include "lancekit/extractor.hpp"
#include "lancekit/simd/dot.hpp"
#include "lancekit/vector_index.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace lancekit;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kExtractionSeconds = 2.0;
constexpr std::size_t kMinRankingSites = 20;
constexpr std::size_t kNestingReports = 1000;
constexpr std::size_t kLatencyEntries = 10000;
constexpr std::size_t kLatencyQueries = 100;
constexpr double kLatencyCeilingMs = 200.0;
constexpr std::size_t kPurityNames = 1000;
constexpr std::size_t kBruteForceTrials = 60;
constexpr std::size_t kBruteForceMaxEntries = 1000;

struct Verdict {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string random_name(std::mt19937_64& rng) {
    static const std::string alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_0123456789";
    std::string name = "w";
    const std::size_t length = 1 + rng() % 24;
    for (std::size_t i = 0; i < length; ++i) name += alphabet[rng() % alphabet.size()];
    return name;
}

struct CliRun {
    int code = -1;
    std::string out;
};

CliRun cli(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str() + err.str()};
}

Verdict extraction_oracle() {
    const auto start = Clock::now();
    const RepoIndex python = index_repository(fixtures::python_repo(), Language::Python, fixtures::fixed_options());
    const RepoIndex java = index_repository(fixtures::java_repo(), Language::Java, fixtures::fixed_options());
    const double elapsed = seconds_since(start);
    auto extracted = [](const RepoIndex& index) {
        std::set<std::pair<std::string, std::string>> out;
        for (const ApiFunction& fn : index.functions) out.emplace(fn.file, fn.qualified_name());
        return out;
    };
    const bool python_ok = extracted(python) == oracle::read_manifest(fixtures::root() / "manifests/python_hotel.txt");
    const bool java_ok = extracted(java) == oracle::read_manifest(fixtures::root() / "manifests/java_hotel.txt");
    std::ostringstream detail;
    detail << "python " << (python_ok ? "exact" : "differs") << ", java " << (java_ok ? "exact" : "differs") << ", "
           << elapsed << " s";
    return {python_ok && java_ok && elapsed < kExtractionSeconds, detail.str()};
}

Verdict ranking_oracle() {
    std::vector<fixtures::RankingCheck> checks;
    Embedder& embedder = fixtures::hash_embedder();
    const auto& py = fixtures::python_index();
    const auto& pv = fixtures::python_vectors();
    const auto& jv = fixtures::java_vectors();
    const auto& java = fixtures::java_index();
    checks.push_back(fixtures::check_token_sites(py, pv, embedder, fixtures::python_token_probes()));
    checks.push_back(fixtures::check_token_sites(java, jv, embedder, fixtures::java_token_probes()));
    checks.push_back(fixtures::check_query_sites(py, pv, embedder, fixtures::python_queries()));
    checks.push_back(fixtures::check_query_sites(java, jv, embedder, fixtures::java_queries()));
    for (const char* file : {"python_hotel.jsonl", "python_adversarial.jsonl"}) {
        checks.push_back(fixtures::check_task_sites(py, pv, embedder, load_tasks(fixtures::tasks(file))));
    }
    checks.push_back(fixtures::check_task_sites(java, jv, embedder, load_tasks(fixtures::tasks("java_hotel.jsonl"))));
    std::size_t sites = 0;
    std::vector<std::string> mismatches;
    for (const auto& c : checks) {
        sites += c.sites;
        mismatches.insert(mismatches.end(), c.mismatches.begin(), c.mismatches.end());
    }
    std::string detail = std::to_string(sites) + " sites, " + std::to_string(mismatches.size()) + " mismatches";
    if (!mismatches.empty()) detail += " (first: " + mismatches.front() + ")";
    return {sites >= kMinRankingSites && mismatches.empty(), detail};
}

Verdict hotel_walkthrough(const std::filesystem::path& dir) {
    const std::string index = (dir / "walkthrough.json").string();
    if (cli({"index", fixtures::python_repo().string(), "--out", index, "--lang", "python"}).code != 0) {
        return {false, "index failed"};
    }
    const CliRun token =
        cli({"complete", "token", "--index", index, "--file", fixtures::kPythonMain, "--cursor", "20:28"});
    const CliRun query = cli({"complete", "query", "--index", index, "--query",
                              "how to process payment with PaymentProcessor?", "--file", fixtures::kPythonMain,
                              "--cursor", "41:13"});
    std::string callee;
    try {
        callee = parse_predicted_call(token.out, Language::Python).callee;
    } catch (const Error&) {
    }
    const bool token_ok = token.code == 0 && callee == "tp.sentiment_analysis";
    const bool query_ok = query.code == 0 && query.out == "pp.process_payment(name, payment)\n";
    std::string shown = query.out;
    if (!shown.empty() && shown.back() == '\n') shown.pop_back();
    return {token_ok && query_ok, "token callee `" + callee + "`, query `" + shown + "`"};
}

Verdict metric_pairs() {
    RepoIndex index;
    index.language = Language::Python;
    for (const char* name : {"is_course_active", "is_course_available", "display_items", "get_all_items"}) {
        ApiFunction fn;
        fn.name = name;
        fn.owner = "catalog";
        fn.file = "catalog.py";
        index.functions.push_back(fn);
    }
    const std::string main = fixtures::read(fixtures::python_repo() / fixtures::kPythonMain);
    std::size_t agree = 0;
    EvalTask task;
    task.expected_call = "catalog.is_course_available";
    agree += !score_call("catalog.is_course_active", task, index);
    task.expected_call = "catalog.get_all_items";
    agree += !score_call("catalog.display_items", task, index);

    EvalTask payment;
    payment.context_file = fixtures::kPythonMain;
    payment.expected_call = "payment_processor.process_payment";
    payment.expected_args = {"name", "payment"};
    const PredictedCall predicted = parse_predicted_call("pp.process_payment(payment)", Language::Python);
    const bool call = score_call(predicted.callee, payment, fixtures::python_index(), main);
    const bool args = call && score_arguments(predicted.arguments, payment);
    agree += call;
    agree += !args;
    return {agree == 4, std::to_string(agree) + "/4 pairs agree"};
}

Verdict nesting() {
    std::mt19937_64 rng(2024);
    std::size_t violations = 0;
    for (std::size_t round = 0; round < kNestingReports; ++round) {
        std::vector<TaskRecord> records(1 + rng() % 60);
        for (std::size_t i = 0; i < records.size(); ++i) {
            records[i].id = std::to_string(i);
            records[i].language = rng() % 2 ? Language::Python : Language::Java;
            records[i].mode = rng() % 2 ? CompletionMode::Token : CompletionMode::Conversational;
            records[i].call_match = rng() % 3 != 0;
            records[i].arg_match = rng() % 2;
            records[i].latency_ms = static_cast<std::int64_t>(rng() % 1000);
        }
        const EvalReport report = summarize(records);
        violations += report.aggregates.argument_matching_pct > report.aggregates.call_accuracy_pct;
        for (const MetricRow& row : report.table) violations += row.argument_matching_pct > row.call_accuracy_pct;
    }
    return {violations == 0, std::to_string(kNestingReports) + " reports, " + std::to_string(violations) +
                                 " violations"};
}

Verdict retrieval_latency() {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> normal;
    auto random_unit = [&] {
        std::vector<double> v(kHashDimension);
        for (double& x : v) x = normal(rng);
        return normalized(v);
    };
    VectorIndex vindex("synthetic", kHashDimension);
    for (std::size_t i = 0; i < kLatencyEntries; ++i) {
        vindex.add("k" + std::to_string(i), PayloadKind::Function, i, random_unit());
    }
    std::vector<double> samples;
    for (std::size_t q = 0; q < kLatencyQueries; ++q) {
        const auto probe = random_unit();
        const auto start = Clock::now();
        const auto top = vindex.query_topk(probe, kDefaultCandidates);
        samples.push_back(seconds_since(start) * 1000.0);
        if (top.size() != kDefaultCandidates) return {false, "short result"};
    }
    std::nth_element(samples.begin(), samples.begin() + samples.size() / 2, samples.end());
    const double median = samples[samples.size() / 2];
    std::ostringstream detail;
    detail << "median " << median << " ms over " << kLatencyQueries << " queries, " << kLatencyEntries
           << " entries (" << simd::to_string(simd::active_isa()) << ")";
    return {median < kLatencyCeilingMs, detail.str()};
}

/// File text with the named timestamp field blanked on every JSON line.
std::string without_timestamp(const std::filesystem::path& path, const char* field) {
    std::istringstream in(fixtures::read(path));
    std::string line;
    std::string out;
    while (std::getline(in, line)) {
        nlohmann::ordered_json doc = nlohmann::ordered_json::parse(line, nullptr, false);
        if (doc.is_object() && doc.contains(field)) {
            doc[field] = "";
            line = doc.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
        }
        out += line + '\n';
    }
    return out;
}

Verdict determinism(const std::filesystem::path& dir) {
    std::vector<std::string> index_text, vectors, reports;
    for (int run = 0; run < 2; ++run) {
        const auto base = dir / ("run" + std::to_string(run));
        std::filesystem::create_directories(base);
        const std::string index = (base / "py.json").string();
        const std::string report = (base / "report.json").string();
        if (cli({"index", fixtures::python_repo().string(), "--out", index, "--lang", "python"}).code != 0 ||
            cli({"eval", "--index", index, "--tasks", fixtures::tasks("python_hotel.jsonl").string(), "--report",
                 report})
                    .code != 0) {
            return {false, "run " + std::to_string(run) + " failed"};
        }
        index_text.push_back(without_timestamp(index, "created_at"));
        vectors.push_back(fixtures::read(index + ".vec"));
        reports.push_back(without_timestamp(report, "generated_at"));
    }
    const bool same_index = index_text[0] == index_text[1];
    const bool same_vectors = vectors[0] == vectors[1];
    const bool same_report = reports[0] == reports[1];
    return {same_index && same_vectors && same_report,
            std::string("index ") + (same_index ? "identical" : "differs") + ", vectors " +
                (same_vectors ? "identical" : "differs") + ", report " + (same_report ? "identical" : "differs")};
}

Verdict purity_and_brute_force() {
    std::mt19937_64 rng(4242);
    HashEmbedder embedder;
    std::size_t impure = 0;
    for (std::size_t i = 0; i < kPurityNames; ++i) {
        const std::string name = random_name(rng);
        impure += embedder.embed(name) != embedder.embed(name);
    }
    std::size_t disagreements = 0;
    for (std::size_t trial = 0; trial < kBruteForceTrials; ++trial) {
        const std::size_t n = 1 + rng() % kBruteForceMaxEntries;
        VectorIndex vindex(embedder.id(), kHashDimension);
        std::vector<std::pair<std::string, std::vector<long double>>> reference;
        std::set<std::string> used;
        for (std::size_t i = 0; i < n; ++i) {
            const std::string key = random_name(rng);
            if (!used.insert(key).second) continue;
            vindex.add(key, PayloadKind::Function, i, embedder.embed(key));
            reference.emplace_back(key, oracle::embed(key));
        }
        const std::string probe = random_name(rng);
        const std::size_t k = 1 + rng() % (reference.size() + 3);
        const auto got = vindex.query_topk(embedder.embed(probe), k);
        const auto expected = oracle::rank_vectors(oracle::embed(probe), reference);
        bool same = got.size() == std::min(k, expected.size());
        for (std::size_t i = 0; same && i < got.size(); ++i) same = got[i].key == expected[i].key;
        disagreements += !same;
    }
    return {impure == 0 && disagreements == 0,
            std::to_string(kPurityNames) + " names, " + std::to_string(impure) + " impure; " +
                std::to_string(kBruteForceTrials) + " indexes, " + std::to_string(disagreements) + " disagree"};
}

}  // namespace

int main() {
    fixtures::TempDir dir;
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"extraction-oracle", extraction_oracle},
        {"ranking-oracle", ranking_oracle},
        {"hotel-walkthrough", [&] { return hotel_walkthrough(dir.path()); }},
        {"metric-pairs", metric_pairs},
        {"nesting-invariant", nesting},
        {"retrieval-latency", retrieval_latency},
        {"determinism", [&] { return determinism(dir.path()); }},
        {"embedding-purity-and-ordering", purity_and_brute_force},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Verdict verdict;
        try {
            verdict = check();
        } catch (const std::exception& e) {
            verdict = {false, std::string("threw: ") + e.what()};
        }
        failures += !verdict.pass;
        std::cout << (verdict.pass ? "PASS " : "FAIL ") << name << ": " << verdict.detail << '\n';
    }
    std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed\n";
    return failures == 0 ? 0 : 1;
}
