#include "fixtures.hpp"
#include "oracle.hpp"

#include "lancekit/context_engine.hpp"
#include "lancekit/errors.hpp"
#include "lancekit/llm_gateway.hpp"

#include <doctest.h>

#include <random>

using namespace lancekit;

namespace {

std::string python_main() { return fixtures::read(fixtures::python_repo() / fixtures::kPythonMain); }
std::string java_main() { return fixtures::read(fixtures::java_repo() / fixtures::kJavaMain); }

TokenSite site_after(const std::string& content, const std::string& anchor, Language language) {
    return analyze_token_site(content, fixtures::offset_after(content, anchor, anchor), language);
}

std::vector<std::string> keys(const CompletionContext& context) {
    std::vector<std::string> out;
    for (const Candidate& c : context.candidates) out.push_back(c.key);
    return out;
}

/// Client that answers every prompt with fixed text.
class CannedLlm final : public LlmClient {
public:
    explicit CannedLlm(std::string text) : text_(std::move(text)) {}
    std::string id() const override { return "canned"; }
    LlmResponse complete(const PromptBundle&) override {
        ++calls;
        return LlmResponse{text_, 1, id(), false};
    }
    int calls = 0;

private:
    std::string text_;
};

}  // namespace

TEST_CASE("token site at the sentiment assignment") {
    const TokenSite site = site_after(python_main(), "sentiment = tp.", Language::Python);
    CHECK(site.receiver == "tp");
    CHECK(site.assignment_identifier == "sentiment");
    const auto& vars = site.in_scope_variables;
    CHECK(std::find(vars.begin(), vars.end(), "sentiments") != vars.end());
    CHECK(std::find(vars.begin(), vars.end(), "word_count") == vars.end());
}

TEST_CASE("token site without assignment") {
    const TokenSite site = analyze_token_site("x.", 2, Language::Python);
    CHECK(site.receiver == "x");
    CHECK_FALSE(site.assignment_identifier.has_value());
    const TokenSite chained = analyze_token_site("value = self.hotel.", 19, Language::Python);
    CHECK(chained.receiver == "self.hotel");
    CHECK(chained.assignment_identifier == "value");
    const TokenSite java = analyze_token_site("int n = helper.", 15, Language::Java);
    CHECK(java.receiver == "helper");
    CHECK(java.assignment_identifier == "n");
}

TEST_CASE("bad token sites") {
    CHECK_THROWS_AS(analyze_token_site("sentiment = tp.sent", 17, Language::Python), ParseSiteError);
    CHECK_THROWS_AS(analyze_token_site("x = 1", 5, Language::Python), ParseSiteError);
    CHECK_THROWS_AS(analyze_token_site("x.", 10, Language::Python), ParseSiteError);
    CHECK_THROWS_AS(analyze_token_site("3.", 2, Language::Python), ParseSiteError);
}

TEST_CASE("receivers resolve through imports and typed variables") {
    const RepoIndex& py = fixtures::python_index();
    const std::string content = python_main();
    CHECK(resolve_receiver(site_after(content, "sentiment = tp.", Language::Python), py, fixtures::kPythonMain) ==
          "text_processing");
    CHECK(resolve_receiver(site_after(content, "refunded = pp.", Language::Python), py, fixtures::kPythonMain) ==
          "payment_processor");

    const RepoIndex& java = fixtures::java_index();
    const std::string jcontent = java_main();
    CHECK(resolve_receiver(site_after(jcontent, "refunded = processor.", Language::Java), java, fixtures::kJavaMain) ==
          "com.hotel.payment.PaymentProcessor");
    CHECK(resolve_receiver(site_after(jcontent, "sentiment = TextProcessing.", Language::Java), java,
                           fixtures::kJavaMain) == "com.hotel.text.TextProcessing");
}

TEST_CASE("typed python parameter resolves to its entity") {
    const std::string content = python_main();
    const std::size_t at = content.find("translation = tp.");
    REQUIRE(at != std::string::npos);
    const std::string prefix = content.substr(0, at) + "words = review.";
    const TokenSite site = analyze_token_site(prefix, prefix.size(), Language::Python);
    CHECK(resolve_receiver(site, fixtures::python_index(), fixtures::kPythonMain) == "review.Review");
}

TEST_CASE("unknown receiver lists the bindings it tried") {
    const std::string source = "import text_processing as tp\nzz.";
    const TokenSite site = analyze_token_site(source, source.size(), Language::Python);
    try {
        resolve_receiver(site, fixtures::python_index(), fixtures::kPythonMain);
        FAIL("expected UnresolvedReceiverError");
    } catch (const UnresolvedReceiverError& e) {
        CHECK(e.receiver() == "zz");
        CHECK_FALSE(e.candidates().empty());
    }
}

TEST_CASE("identifier cue ranks sentiment_analysis first") {
    const TokenSite site = site_after(python_main(), "sentiment = tp.", Language::Python);
    const CompletionContext context = rank_token_candidates("text_processing", site, fixtures::python_index(),
                                                            fixtures::python_vectors(), fixtures::hash_embedder());
    REQUIRE_FALSE(context.candidates.empty());
    CHECK(context.candidates[0].function.name == "sentiment_analysis");
    CHECK(context.candidates.size() == kDefaultCandidates);
    CHECK(context.truncated);
    for (std::size_t i = 1; i < context.candidates.size(); ++i) {
        CHECK(context.candidates[i - 1].score >= context.candidates[i].score);
    }
}

TEST_CASE("without a cue candidates keep declaration order") {
    const TokenSite site = analyze_token_site("tp.", 3, Language::Python);
    const CompletionContext context = rank_token_candidates("text_processing", site, fixtures::python_index(),
                                                            fixtures::python_vectors(), fixtures::hash_embedder(), 20);
    REQUIRE(context.candidates.size() == 12);
    CHECK(context.candidates[0].function.name == "tokenize");
    CHECK_FALSE(context.truncated);
    for (const Candidate& c : context.candidates) {
        CHECK_FALSE(c.scored);
        CHECK(c.score == 0.0);
    }
}

TEST_CASE("single-function module") {
    const TokenSite site = analyze_token_site("ok = x.", 7, Language::Python);
    const CompletionContext context = rank_token_candidates("com.hotel.payment.Payment", site, fixtures::java_index(),
                                                            fixtures::java_vectors(), fixtures::hash_embedder());
    REQUIRE(context.candidates.size() == 1);
    CHECK(context.candidates[0].function.name == "getAmount");
    CHECK_THROWS_AS(rank_token_candidates("hotel", site, fixtures::python_index(), fixtures::python_vectors(),
                                          fixtures::hash_embedder()),
                    EmptyModuleError);
}

TEST_CASE("candidates stay inside the resolved module and the cue only reorders") {
    const std::string content = python_main();
    for (const char* anchor : {"sentiment = tp.", "word_count = tp.", "translation = tp.", "refunded = pp."}) {
        const TokenSite site = site_after(content, anchor, Language::Python);
        const std::string module = resolve_receiver(site, fixtures::python_index(), fixtures::kPythonMain);
        const CompletionContext cued = rank_token_candidates(module, site, fixtures::python_index(),
                                                             fixtures::python_vectors(), fixtures::hash_embedder(), 50);
        TokenSite bare = site;
        bare.assignment_identifier.reset();
        const CompletionContext plain = rank_token_candidates(module, bare, fixtures::python_index(),
                                                              fixtures::python_vectors(), fixtures::hash_embedder(), 50);
        for (const Candidate& c : cued.candidates) CHECK(c.function.owner == module);
        auto a = keys(cued);
        auto b = keys(plain);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
    }
}

TEST_CASE("query heuristic") {
    const ParsedQuery full = parse_query_heuristic("how to process payment with PaymentProcessor?");
    CHECK(full.entity == "PaymentProcessor");
    CHECK(full.operation == "process payment");
    const ParsedQuery entity_only = parse_query_heuristic("PaymentProcessor");
    CHECK(entity_only.entity == "PaymentProcessor");
    CHECK(entity_only.operation.empty());
    const ParsedQuery no_entity = parse_query_heuristic("do the thing");
    CHECK(no_entity.entity.empty());
    CHECK(no_entity.operation == "do the thing");
    CHECK(parse_query_heuristic("refund with Payment Processor").entity == "Payment Processor");
}

TEST_CASE("parse_query uses the heuristic for the mock and the model otherwise") {
    MockLlm mock;
    const ParsedQuery heuristic = parse_query(ConversationalQuery{"how to process payment with PaymentProcessor?", {}, {}}, mock);
    CHECK(heuristic.entity == "PaymentProcessor");
    CHECK_FALSE(heuristic.from_model);

    CannedLlm model("Entity: Payment Processor\nOperation: refund a payment\n");
    const ParsedQuery parsed = parse_query(ConversationalQuery{"give the money back", {}, {}}, model);
    CHECK(model.calls == 1);
    CHECK(parsed.from_model);
    CHECK(parsed.entity == "Payment Processor");
    CHECK(parsed.operation == "refund a payment");

    CannedLlm rambling("I am not sure.");
    const ParsedQuery fallback = parse_query(ConversationalQuery{"how to process payment with PaymentProcessor?", {}, {}}, rambling);
    CHECK_FALSE(fallback.from_model);
    CHECK(fallback.entity == "PaymentProcessor");

    CHECK_THROWS_AS(parse_query(ConversationalQuery{"   ", {}, {}}, mock), QueryParseError);
    CHECK_THROWS_AS(parse_query(ConversationalQuery{"?? 42", {}, {}}, mock), QueryParseError);
}

TEST_CASE("query parsing never fails on text with a letter") {
    MockLlm mock;
    std::mt19937_64 rng(17);
    const std::string alphabet = "aZ ?!.,_-9 howtotheAND";
    for (int i = 0; i < 2000; ++i) {
        std::string query;
        for (std::size_t n = rng() % 12; n > 0; --n) query += alphabet[rng() % alphabet.size()];
        query.insert(query.begin() + static_cast<std::ptrdiff_t>(rng() % (query.size() + 1)), "aZ"[rng() % 2]);
        CHECK_NOTHROW(parse_query(ConversationalQuery{query, {}, {}}, mock));
    }
}

TEST_CASE("entity matching tolerates spacing") {
    const auto exact = match_entity("PaymentProcessor", fixtures::python_vectors(), fixtures::hash_embedder());
    const auto spaced = match_entity("Payment Processor", fixtures::python_vectors(), fixtures::hash_embedder());
    REQUIRE_FALSE(exact.empty());
    CHECK(exact[0].key == "payment_processor");
    CHECK(spaced[0].key == "payment_processor");
    CHECK(exact[0].similarity == spaced[0].similarity);
    const auto java = match_entity("PaymentProcessor", fixtures::java_vectors(), fixtures::hash_embedder());
    CHECK(java[0].key == "com.hotel.payment.PaymentProcessor");

    VectorIndex functions_only("hash", kHashDimension);
    functions_only.add("a.b", PayloadKind::Function, 0, embed_hash("a.b"));
    CHECK_THROWS_AS(match_entity("Anything", functions_only, fixtures::hash_embedder()), NoEntitiesError);
}

TEST_CASE("conversational ranking") {
    const auto entities = match_entity("PaymentProcessor", fixtures::python_vectors(), fixtures::hash_embedder());
    const CompletionContext pay = rank_conversational_candidates(entities, "process payment", fixtures::python_index(),
                                                                 fixtures::python_vectors(), fixtures::hash_embedder());
    CHECK(pay.resolved_module == "payment_processor");
    CHECK(pay.candidates[0].function.name == "process_payment");
    CHECK(pay.candidates[0].scored);

    const CompletionContext refund = rank_conversational_candidates(
        entities, "refund transaction", fixtures::python_index(), fixtures::python_vectors(), fixtures::hash_embedder());
    CHECK(refund.candidates[0].function.name == "refund_payment");

    const CompletionContext plain = rank_conversational_candidates(entities, "", fixtures::python_index(),
                                                                   fixtures::python_vectors(), fixtures::hash_embedder());
    CHECK(plain.candidates[0].function.name == "process_payment");
    CHECK(plain.candidates[1].function.name == "refund_payment");
    CHECK_FALSE(plain.candidates[0].scored);

    for (const Candidate& c : pay.candidates) {
        if (c.function.owner != "payment_processor") CHECK_FALSE(c.scored);
    }
    const auto pay_keys = keys(pay);
    std::set<std::string> unique(pay_keys.begin(), pay_keys.end());
    CHECK(unique.size() == pay.candidates.size());
    CHECK_THROWS_AS(rank_conversational_candidates({}, "x", fixtures::python_index(), fixtures::python_vectors(),
                                                   fixtures::hash_embedder()),
                    EmptyModuleError);
}

TEST_CASE("receivers for matched entities") {
    const RepoIndex& py = fixtures::python_index();
    CHECK(receiver_for_entity("payment_processor", py, fixtures::kPythonMain, "", {}) == "pp");
    CHECK(receiver_for_entity("payment_processor", py, "", "", {}) == "payment_processor");
    const RepoIndex& java = fixtures::java_index();
    const std::string content = java_main();
    const std::string prefix = content.substr(0, content.find("processor.processPayment"));
    const VariableScan scan = scan_variables(prefix, Language::Java);
    CHECK(scan.types.at("processor") == "PaymentProcessor");
    CHECK(receiver_for_entity("com.hotel.payment.PaymentProcessor", java, fixtures::kJavaMain, prefix, scan.types) ==
          "processor");
    CHECK(receiver_for_entity("com.hotel.text.TextProcessing", java, fixtures::kJavaMain, prefix, scan.types) ==
          "TextProcessing");
}

TEST_CASE("variable scan respects scope") {
    const std::string java =
        "class A {\n  private Payment field;\n  void one() { Hotel h = null; }\n  void two(Review r) {\n"
        "    for (int i = 0; i < 3; i++) {}\n    String s = \"Hotel x = 1;\";\n    ";
    const VariableScan scan = scan_variables(java, Language::Java);
    CHECK(scan.types.count("field") == 1);
    CHECK(scan.types.count("r") == 1);
    CHECK(scan.types.count("h") == 0);
    CHECK(scan.types.count("x") == 0);
    CHECK(scan.types.at("s") == "String");

    const std::string python =
        "import os\nLIMIT: int = 3\n\ndef one(a: str):\n    b = 1\n\ndef two(c: Review, d):\n    e = c\n    ";
    const VariableScan py = scan_variables(python, Language::Python);
    CHECK(py.types.at("c") == "Review");
    CHECK(py.types.at("LIMIT") == "int");
    CHECK(py.types.count("a") == 0);
    CHECK(std::find(py.local_names.begin(), py.local_names.end(), "e") != py.local_names.end());
    CHECK(std::find(py.local_names.begin(), py.local_names.end(), "b") == py.local_names.end());
}

TEST_CASE("rankings are deterministic") {
    const TokenSite site = site_after(python_main(), "translation = tp.", Language::Python);
    const auto first = keys(rank_token_candidates("text_processing", site, fixtures::python_index(),
                                                  fixtures::python_vectors(), fixtures::hash_embedder()));
    for (int i = 0; i < 5; ++i) {
        HashEmbedder fresh;
        const VectorIndex rebuilt = build_vector_index(fixtures::python_index(), fresh);
        CHECK(keys(rank_token_candidates("text_processing", site, fixtures::python_index(), rebuilt, fresh)) == first);
    }
}
