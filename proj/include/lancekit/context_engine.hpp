#pragma once

#include "lancekit/embedding.hpp"
#include "lancekit/repo_model.hpp"
#include "lancekit/vector_index.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lancekit {

class LlmClient;

inline constexpr std::size_t kDefaultCandidates = 10;

enum class CompletionMode { Token, Conversational };

std::string_view to_string(CompletionMode mode);
std::optional<CompletionMode> parse_completion_mode(std::string_view text);

/// A `receiver.` completion point inside a file.
struct TokenSite {
    std::string content;
    std::size_t cursor = 0;
    /// Dotted identifier chain before the trailing `.`.
    std::string receiver;
    /// Left-hand identifier when the cursor sits in the right side of an assignment.
    std::optional<std::string> assignment_identifier;
    /// Names declared or assigned before the cursor in the enclosing function.
    std::vector<std::string> in_scope_variables;
    /// Declared types of visible variables (enclosing blocks, fields, globals).
    std::map<std::string, std::string> variable_types;
};

struct ConversationalQuery {
    std::string raw;
    std::optional<std::string> entity_hint;
    std::optional<std::string> operation_hint;
};

struct Candidate {
    ApiFunction function;
    /// Vector index key (`owner.name`, with `#n` for overloads).
    std::string key;
    double score = 0.0;
    /// False for candidates kept in declaration order without a cue.
    bool scored = false;
    /// Expression the call should be made on (`tp`, `processor`, ...).
    std::string receiver;
};

/// Ranked candidates for one request. Scored candidates come first, sorted by
/// score descending then key ascending; unscored ones follow in declaration order.
struct CompletionContext {
    CompletionMode mode = CompletionMode::Token;
    std::optional<std::string> resolved_module;
    std::vector<Candidate> candidates;
    std::vector<std::string> local_cues;
    bool truncated = false;
    /// The receiver did not resolve and entity matching stood in for it.
    bool degraded = false;
};

/// Variables visible at the end of `prefix`.
struct VariableScan {
    /// Declared or assigned in the enclosing function, in text order.
    std::vector<std::string> local_names;
    /// Declared types of everything visible, inner declarations winning.
    std::map<std::string, std::string> types;
};

VariableScan scan_variables(std::string_view prefix, Language language);

/// Qualified entity a type name (`Review`, `List<Payment>`, `pp.Payment`)
/// refers to from `file`, whose text is `content`: import bindings first, then
/// the same package or module, wildcard imports, and finally a global name.
std::optional<std::string> resolve_type_name(std::string_view type, const RepoIndex& index, std::string_view file,
                                             std::string_view content);

/// Throws ParseSiteError unless the cursor directly follows `identifier.`.
TokenSite analyze_token_site(std::string_view content, std::size_t cursor, Language language);

/// Qualified module or class name the receiver refers to. `file` is the
/// repo-relative path of the edited file. Throws UnresolvedReceiverError.
std::string resolve_receiver(const TokenSite& site, const RepoIndex& index, std::string_view file);

/// Non-private functions owned by `module`, in declaration order, with their keys.
std::vector<Candidate> module_functions(std::string_view module, const RepoIndex& index);

/// Throws EmptyModuleError when the module has no callable functions.
CompletionContext rank_token_candidates(std::string_view module, const TokenSite& site, const RepoIndex& index,
                                        const VectorIndex& vindex, Embedder& embedder,
                                        std::size_t k = kDefaultCandidates);

struct ParsedQuery {
    std::string entity;
    std::string operation;
    /// The reply came from the language model rather than the heuristic.
    bool from_model = false;
};

/// Entity and operation named by a developer query. Uses the model when it is
/// not a mock and its reply has both labeled lines; otherwise the heuristic.
/// Throws QueryParseError when both come out empty.
ParsedQuery parse_query(const ConversationalQuery& query, LlmClient& llm);

/// The heuristic half of `parse_query`.
ParsedQuery parse_query_heuristic(std::string_view raw);

/// Entity keys ranked by similarity to `entity`. Throws NoEntitiesError.
std::vector<ScoredKey> match_entity(std::string_view entity, const VectorIndex& vindex, Embedder& embedder,
                                    std::size_t k = kDefaultCandidates);

/// Methods of the best entity with at least one callable method, scored
/// against `operation`, followed by the other entities' methods unscored.
/// `receiver_of` names the call receiver for an entity; by default the last
/// segment of the entity name.
CompletionContext rank_conversational_candidates(
    const std::vector<ScoredKey>& entity_keys, std::string_view operation, const RepoIndex& index,
    const VectorIndex& vindex, Embedder& embedder, std::size_t k = kDefaultCandidates,
    const std::function<std::string(std::string_view)>& receiver_of = {});

/// How code in `file` (text `content`) would refer to `entity`: a typed
/// variable, an import alias, or the last segment of the name.
std::string receiver_for_entity(std::string_view entity, const RepoIndex& index, std::string_view file,
                                std::string_view content,
                                const std::map<std::string, std::string>& variable_types);

}  // namespace lancekit
