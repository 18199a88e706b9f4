#pragma once

#include "lancekit/context_engine.hpp"
#include "lancekit/llm_gateway.hpp"
#include "lancekit/prompt_builder.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace lancekit {

struct PipelineConfig {
    std::size_t k = kDefaultCandidates;
    std::size_t token_budget = kDefaultTokenBudget;
    /// On an unresolved receiver, rank entities matched on the receiver text
    /// instead of failing.
    bool fallback_entity_match = false;
    std::optional<std::filesystem::path> template_dir;
};

struct CompletionResult {
    CompletionContext context;
    PromptBundle prompt;
    LlmResponse response;
};

/// Wires context selection, prompt construction and the model together over
/// one indexed repository.
class Pipeline {
public:
    Pipeline(const RepoIndex& index, const VectorIndex& vindex, Embedder& embedder, LlmClient& llm,
             PipelineConfig config = {});

    /// `file` is repo-relative; `content` is its full text.
    CompletionContext token_context(std::string_view file, std::string_view content, std::size_t cursor);
    CompletionContext query_context(std::string_view query, std::optional<std::string_view> file,
                                    std::optional<std::string_view> prefix);

    CompletionResult complete_token(std::string_view file, std::string_view content, std::size_t cursor);
    CompletionResult complete_query(std::string_view query, std::optional<std::string_view> file,
                                    std::optional<std::string_view> prefix);

    const PipelineConfig& config() const noexcept { return config_; }

private:
    PromptOptions prompt_options() const;

    const RepoIndex& index_;
    const VectorIndex& vindex_;
    Embedder& embedder_;
    LlmClient& llm_;
    PipelineConfig config_;
};

}  // namespace lancekit
