#include "ranking_check.hpp"

#include "oracle.hpp"

#include "lancekit/context_engine.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace fixtures {

namespace {

using namespace lancekit;

constexpr long double kScoreTolerance = 1e-9L;

bool letters_in(std::string_view text) {
    for (char c : text) {
        if (std::isalpha(static_cast<unsigned char>(c)) || static_cast<unsigned char>(c) >= 0x80) return true;
    }
    return false;
}

/// (key, embedded text) for the non-private functions `owner` declares.
std::vector<std::pair<std::string, std::string>> owned_items(const RepoIndex& index, const VectorIndex& vindex,
                                                             const std::string& owner) {
    std::vector<std::pair<std::string, std::string>> items;
    for (const IndexEntry& e : vindex.entries()) {
        if (e.kind != PayloadKind::Function) continue;
        const ApiFunction& fn = index.functions[e.source];
        if (fn.owner == owner && fn.visibility != Visibility::Private) items.emplace_back(e.key, fn.qualified_name());
    }
    return items;
}

/// Empty when the scored prefix of `candidates` matches `expected`.
std::string compare(const std::vector<Candidate>& candidates, const std::vector<oracle::Ranked>& expected) {
    std::vector<const Candidate*> scored;
    for (const Candidate& c : candidates) {
        if (c.scored) scored.push_back(&c);
    }
    if (scored.size() != expected.size()) {
        return "scored " + std::to_string(scored.size()) + " vs " + std::to_string(expected.size());
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (scored[i]->key != expected[i].key) return "rank " + std::to_string(i + 1) + ": " + scored[i]->key +
                                                       " vs " + expected[i].key;
        if (std::fabs(static_cast<long double>(scored[i]->score) - expected[i].score) > kScoreTolerance) {
            return "score of " + expected[i].key;
        }
    }
    return {};
}

}  // namespace

RankingCheck check_token_sites(const RepoIndex& index, const VectorIndex& vindex, Embedder& embedder,
                               const std::vector<TokenProbe>& probes) {
    RankingCheck check;
    for (const TokenProbe& p : probes) {
        const std::string content = index.language == Language::Python
                                        ? "def f(text):\n    " + p.identifier + " = " + p.receiver + "."
                                        : "class C { void f(String text) { var " + p.identifier + " = " +
                                              p.receiver + ".";
        ++check.sites;
        const std::string label = p.module + " <- " + p.identifier;
        try {
            const TokenSite site = analyze_token_site(content, content.size(), index.language);
            const CompletionContext context = rank_token_candidates(p.module, site, index, vindex, embedder, 1000);
            const auto items = owned_items(index, vindex, p.module);
            const auto expected = letters_in(p.identifier) ? oracle::rank(p.identifier, items)
                                                           : std::vector<oracle::Ranked>{};
            if (std::string diff = compare(context.candidates, expected); !diff.empty()) {
                check.mismatches.push_back(label + ": " + diff);
            }
        } catch (const std::exception& e) {
            check.mismatches.push_back(label + ": " + e.what());
        }
    }
    return check;
}

RankingCheck check_query_sites(const RepoIndex& index, const VectorIndex& vindex, Embedder& embedder,
                               const std::vector<std::string>& queries) {
    std::vector<std::pair<std::string, std::string>> entity_items;
    for (const EntityRecord& entity : index.entities) entity_items.emplace_back(entity.name, entity.name);

    RankingCheck check;
    for (const std::string& query : queries) {
        ++check.sites;
        try {
            const ParsedQuery parsed = parse_query_heuristic(query);
            const std::string probe = parsed.entity.empty() ? parsed.operation : parsed.entity;
            const auto entities = match_entity(probe, vindex, embedder, 1000);
            const auto expected_entities = oracle::rank(probe, entity_items);
            bool same = entities.size() == expected_entities.size();
            for (std::size_t i = 0; same && i < entities.size(); ++i) {
                same = entities[i].key == expected_entities[i].key &&
                       std::fabs(entities[i].similarity - expected_entities[i].score) <= kScoreTolerance;
            }
            if (!same) {
                check.mismatches.push_back(query + ": entity order");
                continue;
            }
            const CompletionContext context =
                rank_conversational_candidates(entities, parsed.operation, index, vindex, embedder, 1000);
            std::string top;
            for (const oracle::Ranked& r : expected_entities) {
                if (!owned_items(index, vindex, r.key).empty()) {
                    top = r.key;
                    break;
                }
            }
            const auto expected = letters_in(parsed.operation)
                                      ? oracle::rank(parsed.operation, owned_items(index, vindex, top))
                                      : std::vector<oracle::Ranked>{};
            if (context.resolved_module != top) {
                check.mismatches.push_back(query + ": top entity");
            } else if (std::string diff = compare(context.candidates, expected); !diff.empty()) {
                check.mismatches.push_back(query + ": " + diff);
            }
        } catch (const std::exception& e) {
            check.mismatches.push_back(query + ": " + e.what());
        }
    }
    return check;
}

RankingCheck check_task_sites(const RepoIndex& index, const VectorIndex& vindex, Embedder& embedder,
                              const std::vector<EvalTask>& tasks) {
    RankingCheck check;
    for (const EvalTask& task : tasks) {
        if (task.mode == CompletionMode::Conversational) {
            RankingCheck one = check_query_sites(index, vindex, embedder, {*task.query});
            check.sites += one.sites;
            for (std::string& m : one.mismatches) check.mismatches.push_back(task.id + ": " + m);
            continue;
        }
        ++check.sites;
        try {
            std::ifstream in(task.repo_path / task.context_file, std::ios::binary);
            std::stringstream buffer;
            buffer << in.rdbuf();
            const TokenSite site = analyze_token_site(buffer.str(), *task.cursor, index.language);
            const std::string module = resolve_receiver(site, index, task.context_file);
            const CompletionContext context = rank_token_candidates(module, site, index, vindex, embedder, 1000);
            const std::string cue = site.assignment_identifier.value_or("");
            const auto expected = letters_in(cue) ? oracle::rank(cue, owned_items(index, vindex, module))
                                                  : std::vector<oracle::Ranked>{};
            if (std::string diff = compare(context.candidates, expected); !diff.empty()) {
                check.mismatches.push_back(task.id + ": " + diff);
            }
        } catch (const std::exception& e) {
            check.mismatches.push_back(task.id + ": " + e.what());
        }
    }
    return check;
}

std::vector<TokenProbe> python_token_probes() {
    std::vector<TokenProbe> probes;
    for (const char* id : {"sentiment", "word_count", "translation", "entities", "summary", "tokens", "stems",
                           "frequency", "synonyms", "cleaned_text", "lemma", "spelling", "words", "x", "review_mood"}) {
        probes.push_back({"text_processing", "tp", id});
    }
    for (const char* id : {"paid", "refunded", "ok"}) probes.push_back({"payment_processor", "pp", id});
    for (const char* id : {"booking", "deleted", "room_number"}) probes.push_back({"database_helper", "dbh", id});
    for (const char* id : {"valid", "shown_name"}) probes.push_back({"user.User", "guest", id});
    return probes;
}

std::vector<TokenProbe> java_token_probes() {
    std::vector<TokenProbe> probes;
    for (const char* id : {"sentiment", "wordCount", "translated", "tokens", "synonyms", "countOfWords"}) {
        probes.push_back({"com.hotel.text.TextProcessing", "TextProcessing", id});
    }
    for (const char* id : {"paid", "refunded", "processed"}) {
        probes.push_back({"com.hotel.payment.PaymentProcessor", "processor", id});
    }
    return probes;
}

std::vector<std::string> python_queries() {
    return {"how to process payment with PaymentProcessor?",
            "refund the payment with PaymentProcessor",
            "get the sentiment of a review using TextProcessing",
            "count words with text processing",
            "translate the review text into French",
            "save a booking with DatabaseHelper",
            "delete the booking in the Database Helper",
            "find a booking for a guest",
            "book a room in the Hotel",
            "is the Payment valid?",
            "display the name of the User",
            "check whether the Review is positive",
            "summarize a long review",
            "remove stopwords from the text",
            "spell check the review",
            "Payment Processor refund",
            "PaymentProcesser process",
            "get synonyms for a word",
            "lemmatize the text with TextProcessing",
            "tokenize review text"};
}

std::vector<std::string> java_queries() {
    return {"how to process payment with PaymentProcessor?",
            "refund a payment with the PaymentProcessor",
            "translate text with TextProcessing",
            "count the words using TextProcessing",
            "get the amount of a Payment",
            "book a room in the Hotel",
            "sentiment analysis of a review"};
}

}  // namespace fixtures
