#include "lancekit/pipeline.hpp"

#include "lancekit/errors.hpp"

namespace lancekit {

Pipeline::Pipeline(const RepoIndex& index, const VectorIndex& vindex, Embedder& embedder, LlmClient& llm,
                   PipelineConfig config)
    : index_(index), vindex_(vindex), embedder_(embedder), llm_(llm), config_(std::move(config)) {}

PromptOptions Pipeline::prompt_options() const {
    return PromptOptions{config_.token_budget, index_.language, config_.template_dir};
}

CompletionContext Pipeline::token_context(std::string_view file, std::string_view content, std::size_t cursor) {
    const TokenSite site = analyze_token_site(content, cursor, index_.language);
    std::string module;
    try {
        module = resolve_receiver(site, index_, file);
    } catch (const UnresolvedReceiverError&) {
        if (!config_.fallback_entity_match) throw;
        const std::vector<ScoredKey> entities = match_entity(site.receiver, vindex_, embedder_, config_.k);
        CompletionContext context = rank_conversational_candidates(
            entities, site.assignment_identifier.value_or(""), index_, vindex_, embedder_, config_.k,
            [&](std::string_view) { return site.receiver; });
        context.mode = CompletionMode::Token;
        context.degraded = true;
        return context;
    }
    return rank_token_candidates(module, site, index_, vindex_, embedder_, config_.k);
}

CompletionContext Pipeline::query_context(std::string_view query, std::optional<std::string_view> file,
                                          std::optional<std::string_view> prefix) {
    const ParsedQuery parsed = parse_query(ConversationalQuery{std::string(query), {}, {}}, llm_);
    // Without an entity name the operation is the best description of the target.
    const std::string probe = parsed.entity.empty() ? parsed.operation : parsed.entity;
    const std::vector<ScoredKey> entities = match_entity(probe, vindex_, embedder_, config_.k);

    VariableScan scan;
    if (prefix) scan = scan_variables(*prefix, index_.language);
    const std::string file_path(file.value_or(""));
    const std::string text(prefix.value_or(""));
    CompletionContext context =
        rank_conversational_candidates(entities, parsed.operation, index_, vindex_, embedder_, config_.k,
                                       [&](std::string_view entity) {
                                           return receiver_for_entity(entity, index_, file_path, text, scan.types);
                                       });
    if (!parsed.entity.empty()) context.local_cues.insert(context.local_cues.begin(), parsed.entity);
    return context;
}

CompletionResult Pipeline::complete_token(std::string_view file, std::string_view content, std::size_t cursor) {
    CompletionResult result;
    result.context = token_context(file, content, cursor);
    result.prompt = build_token_prompt(result.context, content.substr(0, cursor), prompt_options());
    result.response = llm_.complete(result.prompt);
    return result;
}

CompletionResult Pipeline::complete_query(std::string_view query, std::optional<std::string_view> file,
                                          std::optional<std::string_view> prefix) {
    CompletionResult result;
    result.context = query_context(query, file, prefix);
    result.prompt = build_query_prompt(result.context, query, prefix, prompt_options());
    result.response = llm_.complete(result.prompt);
    return result;
}

}  // namespace lancekit
