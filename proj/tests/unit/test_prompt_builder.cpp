#include "fixtures.hpp"

#include "lancekit/context_engine.hpp"
#include "lancekit/errors.hpp"
#include "lancekit/prompt_builder.hpp"

#include <doctest.h>

#include <random>

using namespace lancekit;

namespace {

std::string python_main() { return fixtures::read(fixtures::python_repo() / fixtures::kPythonMain); }

CompletionContext sentiment_context(std::size_t k = kDefaultCandidates) {
    const std::string content = python_main();
    const TokenSite site =
        analyze_token_site(content, fixtures::offset_after(content, "sentiment = tp.", "sentiment = tp."), Language::Python);
    return rank_token_candidates("text_processing", site, fixtures::python_index(), fixtures::python_vectors(),
                                 fixtures::hash_embedder(), k);
}

CompletionContext payment_context() {
    const auto entities = match_entity("PaymentProcessor", fixtures::python_vectors(), fixtures::hash_embedder());
    return rank_conversational_candidates(entities, "process payment", fixtures::python_index(),
                                          fixtures::python_vectors(), fixtures::hash_embedder());
}

std::string prefix_at(const std::string& anchor) {
    const std::string content = python_main();
    return content.substr(0, fixtures::offset_after(content, anchor, anchor));
}

/// Position of each candidate's signature in the text, in candidate order.
std::vector<std::size_t> signature_positions(const PromptBundle& bundle, const CompletionContext& context) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < bundle.candidate_count; ++i) {
        out.push_back(bundle.user_text.find(render_signature(context.candidates[i].function, Language::Python) + "\n"));
    }
    return out;
}

}  // namespace

TEST_CASE("token estimate is ceil of 1.3 per word") {
    CHECK(estimate_tokens("") == 0);
    CHECK(estimate_tokens("one") == 2);
    CHECK(estimate_tokens("a b c") == 4);
    CHECK(estimate_tokens("  ten\twords\nhere and there x y z w v  ") == 13);
}

TEST_CASE("signature rendering") {
    const ApiFunction& fn = *fixtures::python_index().functions_named("text_processing.sentiment_analysis").front();
    const std::string sig = render_signature(fn, Language::Python);
    CHECK(sig.starts_with("text_processing.sentiment_analysis(text: str) -> str  # "));
    ApiFunction bare;
    bare.name = "f";
    bare.parameters = {{"a", std::nullopt, std::nullopt}, {"b", "int", std::nullopt}};
    CHECK(render_signature(bare, Language::Python) == "f(a, b: int)");
    bare.comment = "First line.\nSecond line.";
    CHECK(render_signature(bare, Language::Java) == "f(a, b: int)  // First line.");
}

TEST_CASE("token prompt leads with the top candidate") {
    const CompletionContext context = sentiment_context();
    const std::string prefix = prefix_at("sentiment = tp.");
    const PromptBundle bundle = build_token_prompt(context, prefix, PromptOptions{});
    const std::size_t first = bundle.user_text.find("text_processing.sentiment_analysis(text: str) -> str");
    REQUIRE(first != std::string::npos);
    for (std::size_t i = 1; i < context.candidates.size(); ++i) {
        CHECK(bundle.user_text.find(render_signature(context.candidates[i].function, Language::Python)) > first);
    }
    CHECK(bundle.user_text.find(prefix) != std::string::npos);
    CHECK(bundle.candidate_count == context.candidates.size());
    REQUIRE_FALSE(bundle.calls.empty());
    CHECK(bundle.calls[0].render() == "tp.sentiment_analysis(text)");
    CHECK_FALSE(bundle.system_text.empty());
}

TEST_CASE("one candidate gives one signature line") {
    const CompletionContext context = sentiment_context(1);
    const PromptBundle bundle = build_token_prompt(context, "x = tp.", PromptOptions{});
    CHECK(bundle.candidate_count == 1);
    std::size_t lines = 0;
    std::istringstream in(bundle.user_text);
    std::string line;
    while (std::getline(in, line)) lines += line.starts_with("text_processing.");
    CHECK(lines == 1);
}

TEST_CASE("tight budget keeps the prefix and drops every signature") {
    const CompletionContext context = sentiment_context();
    const std::string prefix = prefix_at("sentiment = tp.");
    PromptOptions options;
    options.token_budget = estimate_tokens(prefix);
    const PromptBundle bundle = build_token_prompt(context, prefix, options);
    CHECK(bundle.candidate_count == 0);
    CHECK(bundle.truncated);
    CHECK(bundle.user_text.find(prefix) != std::string::npos);
    CHECK(bundle.calls.empty());
}

TEST_CASE("budget, order and verbatim prefix hold for every budget") {
    const CompletionContext context = sentiment_context();
    const std::string prefix = prefix_at("sentiment = tp.");
    for (std::size_t budget = 1; budget < 1200; budget += 7) {
        PromptOptions options;
        options.token_budget = budget;
        const PromptBundle bundle = build_token_prompt(context, prefix, options);
        CHECK((bundle.token_estimate <= budget || (bundle.truncated && bundle.candidate_count == 0)));
        CHECK(bundle.user_text.find(prefix) != std::string::npos);
        const auto positions = signature_positions(bundle, context);
        for (std::size_t i = 0; i < positions.size(); ++i) {
            REQUIRE(positions[i] != std::string::npos);
            if (i) CHECK(positions[i - 1] < positions[i]);
        }
        CHECK(bundle.truncated == (bundle.candidate_count < context.candidates.size()));
    }
}

TEST_CASE("query prompt") {
    const CompletionContext context = payment_context();
    const std::string query = "how to process payment with PaymentProcessor?";
    const PromptBundle with_code = build_query_prompt(context, query, std::string_view("def f():\n    "), PromptOptions{});
    CHECK(with_code.user_text.find("process_payment(name: str, payment: Payment) -> bool") != std::string::npos);
    CHECK(with_code.user_text.find(query) != std::string::npos);
    CHECK(with_code.user_text.find("def f():\n    ") != std::string::npos);
    const PromptBundle without = build_query_prompt(context, query, std::nullopt, PromptOptions{});
    CHECK(without.user_text.find("Code so far") == std::string::npos);
    CHECK(without.user_text.find(query) != std::string::npos);
    const auto a = without.user_text.find("payment_processor.process_payment(");
    const auto b = without.user_text.find("payment_processor.refund_payment(");
    CHECK(a < b);
}

TEST_CASE("prompt errors") {
    CompletionContext empty;
    CHECK_THROWS_AS(build_token_prompt(empty, "x.", PromptOptions{}), EmptyContextError);
    empty.mode = CompletionMode::Conversational;
    CHECK_THROWS_AS(build_query_prompt(empty, "q", std::nullopt, PromptOptions{}), EmptyContextError);
    CHECK_THROWS_AS(build_query_prompt(sentiment_context(), "q", std::nullopt, PromptOptions{}), Error);
    CHECK_THROWS_AS(build_token_prompt(payment_context(), "x.", PromptOptions{}), Error);
}

TEST_CASE("templates render in one pass") {
    CHECK(render_template("a {{x}} b", {{"x", "1"}}) == "a 1 b");
    CHECK(render_template("{{x}}", {{"x", "{{y}}"}, {"y", "no"}}) == "{{y}}");
    CHECK(render_template("A\n{{#s}}\nS {{s}}\n{{/s}}\nB", {{"s", "v"}}) == "A\nS v\nB");
    CHECK(render_template("A\n{{#s}}\nS\n{{/s}}\nB", {}) == "A\nB");
    CHECK(render_template("A\n{{#s}}\nS\n{{/s}}\nB", {{"s", ""}}) == "A\nB");
    CHECK_THROWS_AS(render_template("{{#s}} never closed", {{"s", "v"}}), Error);
}

TEST_CASE("built-in templates and directory overrides") {
    for (const char* name : {"token_system", "token_user", "query_system", "query_user", "query_parse_system",
                             "query_parse_user"}) {
        CHECK_FALSE(template_text(name).empty());
    }
    CHECK(template_text("token_user").find("{{candidates}}") != std::string_view::npos);
    CHECK(template_text("token_user").find("{{prefix}}") != std::string_view::npos);
    CHECK(template_text("query_user").find("{{query}}") != std::string_view::npos);
    CHECK_THROWS_AS(template_text("nope"), Error);

    fixtures::TempDir dir;
    fixtures::write(dir.path() / "token_user.txt", "CANDIDATES\n{{candidates}}\nCODE\n{{prefix}}");
    PromptOptions options;
    options.template_dir = dir.path();
    const PromptBundle bundle = build_token_prompt(sentiment_context(), "x = tp.", options);
    CHECK(bundle.user_text.starts_with("CANDIDATES\ntext_processing.sentiment_analysis"));
    CHECK(bundle.system_text == std::string(template_text("token_system")));
}
