#include "fixtures.hpp"

#include "lancekit/errors.hpp"
#include "lancekit/pipeline.hpp"

#include <doctest.h>

using namespace lancekit;

namespace {

/// Non-mock client replying with fixed text and recording prompts.
class CannedLlm final : public LlmClient {
public:
    explicit CannedLlm(std::vector<std::string> replies) : replies_(std::move(replies)) {}
    std::string id() const override { return "canned"; }
    LlmResponse complete(const PromptBundle& bundle) override {
        prompts.push_back(bundle);
        const std::string text = replies_[std::min(next_++, replies_.size() - 1)];
        return LlmResponse{text, 1, id(), false};
    }
    std::vector<PromptBundle> prompts;

private:
    std::vector<std::string> replies_;
    std::size_t next_ = 0;
};

std::string python_main() { return fixtures::read(fixtures::python_repo() / fixtures::kPythonMain); }

}  // namespace

TEST_CASE("token completion at the sentiment site") {
    MockLlm mock;
    Pipeline pipeline(fixtures::python_index(), fixtures::python_vectors(), fixtures::hash_embedder(), mock);
    const std::string content = python_main();
    const std::size_t cursor = fixtures::offset_after(content, "sentiment = tp.", "sentiment = tp.");
    const CompletionResult result = pipeline.complete_token(fixtures::kPythonMain, content, cursor);
    CHECK(result.context.resolved_module == std::optional<std::string>("text_processing"));
    CHECK(result.context.candidates.size() == kDefaultCandidates);
    CHECK(result.context.candidates.front().function.name == "sentiment_analysis");
    CHECK(result.response.text == "tp.sentiment_analysis(text)");
    CHECK(result.prompt.user_text.find(content.substr(0, cursor)) != std::string::npos);
    CHECK_FALSE(result.context.degraded);
}

TEST_CASE("query completion names the processor method") {
    MockLlm mock;
    Pipeline pipeline(fixtures::python_index(), fixtures::python_vectors(), fixtures::hash_embedder(), mock);
    const CompletionResult bare = pipeline.complete_query("how to process payment with PaymentProcessor?", {}, {});
    CHECK(bare.response.text == "payment_processor.process_payment(name, payment)");
    CHECK(bare.context.mode == CompletionMode::Conversational);
    REQUIRE_FALSE(bare.context.local_cues.empty());
    CHECK(bare.context.local_cues.front() == "PaymentProcessor");

    const std::string content = python_main();
    const std::string prefix = content.substr(0, fixtures::offset_after(content, "# how to process payment with PaymentProcessor?\n            ", "# how to process payment with PaymentProcessor?\n            "));
    const CompletionResult in_file =
        pipeline.complete_query("how to process payment with PaymentProcessor?", fixtures::kPythonMain, prefix);
    CHECK(in_file.response.text == "pp.process_payment(name, payment)");
}

TEST_CASE("unresolved receivers fail unless fallback is enabled") {
    MockLlm mock;
    const std::string content = "def f():\n    x = paymentprocessor.";
    Pipeline strict(fixtures::python_index(), fixtures::python_vectors(), fixtures::hash_embedder(), mock);
    CHECK_THROWS_AS(strict.complete_token("scratch.py", content, content.size()), UnresolvedReceiverError);

    PipelineConfig config;
    config.fallback_entity_match = true;
    Pipeline lenient(fixtures::python_index(), fixtures::python_vectors(), fixtures::hash_embedder(), mock, config);
    const CompletionResult result = lenient.complete_token("scratch.py", content, content.size());
    CHECK(result.context.degraded);
    CHECK(result.context.mode == CompletionMode::Token);
    CHECK(result.response.text.starts_with("paymentprocessor."));
}

TEST_CASE("cursor off a member access is a site error") {
    MockLlm mock;
    Pipeline pipeline(fixtures::python_index(), fixtures::python_vectors(), fixtures::hash_embedder(), mock);
    CHECK_THROWS_AS(pipeline.complete_token("scratch.py", "x = 1\n", 6), ParseSiteError);
}

TEST_CASE("a model parse of the query takes precedence") {
    CannedLlm llm({"Entity: PaymentProcessor\nOperation: refund payment", "payment_processor.refund_payment(t)"});
    Pipeline pipeline(fixtures::python_index(), fixtures::python_vectors(), fixtures::hash_embedder(), llm);
    const CompletionResult result = pipeline.complete_query("give the money back", {}, {});
    REQUIRE(llm.prompts.size() == 2);
    CHECK(llm.prompts[0].user_text.find("give the money back") != std::string::npos);
    CHECK(result.context.candidates.front().function.name == "refund_payment");
    CHECK(result.response.text == "payment_processor.refund_payment(t)");
}

TEST_CASE("k and budget flow through") {
    MockLlm mock;
    PipelineConfig config;
    config.k = 3;
    config.token_budget = 100000;
    Pipeline pipeline(fixtures::python_index(), fixtures::python_vectors(), fixtures::hash_embedder(), mock, config);
    const std::string content = python_main();
    const std::size_t cursor = fixtures::offset_after(content, "sentiment = tp.", "sentiment = tp.");
    const CompletionResult result = pipeline.complete_token(fixtures::kPythonMain, content, cursor);
    CHECK(result.context.candidates.size() == 3);
    CHECK(result.prompt.candidate_count == 3);
    CHECK_FALSE(result.prompt.truncated);
}
