#pragma once

#include "lancekit/context_engine.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lancekit {

inline constexpr std::size_t kDefaultTokenBudget = 3000;

/// A call the prompt offers, in candidate rank order. Lets offline clients
/// answer without reading prose.
struct CallTemplate {
    std::string receiver;
    std::string name;
    std::vector<std::string> arguments;

    std::string render() const;
};

struct PromptBundle {
    std::string system_text;
    std::string user_text;
    std::size_t candidate_count = 0;
    std::size_t token_estimate = 0;
    bool truncated = false;
    std::vector<CallTemplate> calls;
};

struct PromptOptions {
    std::size_t token_budget = kDefaultTokenBudget;
    Language language = Language::Python;
    /// Directory of `<name>.txt` files replacing the built-in templates.
    std::optional<std::filesystem::path> template_dir;
};

/// ceil(1.3 x whitespace-separated words).
std::size_t estimate_tokens(std::string_view text);

/// `owner.name(p: T, ...) -> R`, plus the first comment line as a trailing
/// language-appropriate comment when present.
std::string render_signature(const ApiFunction& fn, Language language);

/// Replaces `{{name}}` placeholders and keeps `{{#name}}...{{/name}}` sections
/// only when `name` is present and non-empty. Single pass: substituted text is
/// never rescanned.
std::string render_template(std::string_view text, const std::map<std::string, std::string>& values);

/// Built-in template text, shipped under templates/. Throws Error for an unknown name.
std::string_view template_text(std::string_view name);

/// `<dir>/<name>.txt` when `dir` is set and the file exists, else the built-in text.
std::string load_template(std::string_view name, const std::optional<std::filesystem::path>& dir);

/// Throws EmptyContextError when the context has no candidates.
PromptBundle build_token_prompt(const CompletionContext& context, std::string_view file_prefix,
                                const PromptOptions& options = {});

PromptBundle build_query_prompt(const CompletionContext& context, std::string_view query,
                                std::optional<std::string_view> file_prefix, const PromptOptions& options = {});

}  // namespace lancekit
