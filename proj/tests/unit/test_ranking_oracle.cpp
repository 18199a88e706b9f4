#include "fixtures.hpp"
#include "ranking_check.hpp"

#include <doctest.h>

namespace {

void report(const fixtures::RankingCheck& check) {
    for (const std::string& m : check.mismatches) MESSAGE(m);
    CHECK(check.mismatches.empty());
}

}  // namespace

TEST_CASE("token rankings agree with the reference") {
    const auto python = fixtures::check_token_sites(fixtures::python_index(), fixtures::python_vectors(),
                                                    fixtures::hash_embedder(), fixtures::python_token_probes());
    const auto java = fixtures::check_token_sites(fixtures::java_index(), fixtures::java_vectors(),
                                                  fixtures::hash_embedder(), fixtures::java_token_probes());
    CHECK(python.sites + java.sites >= 20);
    report(python);
    report(java);
}

TEST_CASE("conversational rankings agree with the reference") {
    const auto python = fixtures::check_query_sites(fixtures::python_index(), fixtures::python_vectors(),
                                                    fixtures::hash_embedder(), fixtures::python_queries());
    const auto java = fixtures::check_query_sites(fixtures::java_index(), fixtures::java_vectors(),
                                                  fixtures::hash_embedder(), fixtures::java_queries());
    CHECK(python.sites + java.sites >= 20);
    report(python);
    report(java);
}

TEST_CASE("fixture task sites agree with the reference") {
    const auto python = fixtures::check_task_sites(fixtures::python_index(), fixtures::python_vectors(),
                                                   fixtures::hash_embedder(),
                                                   lancekit::load_tasks(fixtures::tasks("python_hotel.jsonl")));
    const auto adversarial = fixtures::check_task_sites(
        fixtures::python_index(), fixtures::python_vectors(), fixtures::hash_embedder(),
        lancekit::load_tasks(fixtures::tasks("python_adversarial.jsonl")));
    const auto java = fixtures::check_task_sites(fixtures::java_index(), fixtures::java_vectors(),
                                                 fixtures::hash_embedder(),
                                                 lancekit::load_tasks(fixtures::tasks("java_hotel.jsonl")));
    CHECK(python.sites + adversarial.sites + java.sites == 12);
    report(python);
    report(adversarial);
    report(java);
}
