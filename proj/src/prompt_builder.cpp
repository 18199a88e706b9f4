#include "lancekit/prompt_builder.hpp"

#include "lancekit/errors.hpp"

#include <fstream>
#include <sstream>

namespace lancekit {

namespace detail {
std::string_view builtin_template(std::string_view name);
}

namespace {

std::string first_line(std::string_view text) {
    std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    return std::string(line);
}

// Mirrors a closing tag's trailing newline so sections can sit on lines of their own.
std::size_t skip_newline(std::string_view text, std::size_t pos) {
    return pos < text.size() && text[pos] == '\n' ? pos + 1 : pos;
}

void render_into(std::string_view text, const std::map<std::string, std::string>& values, std::string& out) {
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t open = text.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(text.substr(pos));
            return;
        }
        const std::size_t close = text.find("}}", open + 2);
        if (close == std::string_view::npos) {
            out.append(text.substr(pos));
            return;
        }
        out.append(text.substr(pos, open - pos));
        const std::string_view tag = text.substr(open + 2, close - open - 2);
        if (tag.starts_with('#')) {
            const std::string name(tag.substr(1));
            const std::string end_tag = "{{/" + name + "}}";
            const std::size_t body_begin = skip_newline(text, close + 2);
            const std::size_t end = text.find(end_tag, body_begin);
            if (end == std::string_view::npos) throw Error("template section \"" + name + "\" is not closed");
            auto value = values.find(name);
            if (value != values.end() && !value->second.empty()) {
                render_into(text.substr(body_begin, end - body_begin), values, out);
            }
            pos = skip_newline(text, end + end_tag.size());
        } else {
            auto value = values.find(std::string(tag));
            if (value != values.end()) out.append(value->second);
            pos = close + 2;
        }
    }
}

std::string signature_block(const CompletionContext& context, std::size_t count, Language language) {
    std::string block;
    for (std::size_t i = 0; i < count; ++i) {
        if (i) block += '\n';
        block += render_signature(context.candidates[i].function, language);
    }
    return block;
}

CallTemplate call_for(const Candidate& candidate) {
    CallTemplate call{candidate.receiver, candidate.function.name, {}};
    for (const Parameter& p : candidate.function.parameters) call.arguments.push_back(p.name);
    return call;
}

// Drops signatures from the tail until the estimate fits the budget.
PromptBundle fit_to_budget(const CompletionContext& context, const PromptOptions& options,
                           const std::string& system_template, const std::string& user_template,
                           std::map<std::string, std::string> values) {
    if (context.candidates.empty()) throw EmptyContextError("no candidate functions to put in the prompt");
    PromptBundle bundle;
    const std::map<std::string, std::string> no_values;
    bundle.system_text = render_template(system_template, no_values);
    const std::size_t system_tokens = estimate_tokens(bundle.system_text);

    std::size_t count = context.candidates.size();
    while (true) {
        values["candidates"] = signature_block(context, count, options.language);
        bundle.user_text = render_template(user_template, values);
        bundle.token_estimate = system_tokens + estimate_tokens(bundle.user_text);
        if (bundle.token_estimate <= options.token_budget || count == 0) break;
        --count;
    }
    bundle.candidate_count = count;
    bundle.truncated = count < context.candidates.size();
    for (std::size_t i = 0; i < count; ++i) bundle.calls.push_back(call_for(context.candidates[i]));
    return bundle;
}

}  // namespace

std::string CallTemplate::render() const {
    std::string text = receiver.empty() ? name : receiver + "." + name;
    text += '(';
    for (std::size_t i = 0; i < arguments.size(); ++i) {
        if (i) text += ", ";
        text += arguments[i];
    }
    text += ')';
    return text;
}

std::size_t estimate_tokens(std::string_view text) {
    std::size_t words = 0;
    bool in_word = false;
    for (char c : text) {
        const bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
        if (!space && !in_word) ++words;
        in_word = !space;
    }
    return (words * 13 + 9) / 10;
}

std::string render_signature(const ApiFunction& fn, Language language) {
    std::string text = fn.qualified_name();
    text += '(';
    for (std::size_t i = 0; i < fn.parameters.size(); ++i) {
        if (i) text += ", ";
        text += fn.parameters[i].name;
        if (fn.parameters[i].declared_type) text += ": " + *fn.parameters[i].declared_type;
    }
    text += ')';
    if (fn.return_type) text += " -> " + *fn.return_type;
    if (fn.comment) {
        const std::string note = first_line(*fn.comment);
        if (!note.empty()) text += (language == Language::Python ? "  # " : "  // ") + note;
    }
    return text;
}

std::string render_template(std::string_view text, const std::map<std::string, std::string>& values) {
    std::string out;
    render_into(text, values, out);
    return out;
}

std::string_view template_text(std::string_view name) {
    std::string_view text = detail::builtin_template(name);
    if (text.empty()) throw Error("unknown prompt template \"" + std::string(name) + "\"");
    return text;
}

std::string load_template(std::string_view name, const std::optional<std::filesystem::path>& dir) {
    if (dir) {
        std::ifstream in(*dir / (std::string(name) + ".txt"));
        if (in) {
            std::stringstream buffer;
            buffer << in.rdbuf();
            return buffer.str();
        }
    }
    return std::string(template_text(name));
}

PromptBundle build_token_prompt(const CompletionContext& context, std::string_view file_prefix,
                                const PromptOptions& options) {
    if (context.mode != CompletionMode::Token) throw Error("token prompt needs a token-mode context");
    return fit_to_budget(context, options, load_template("token_system", options.template_dir),
                         load_template("token_user", options.template_dir), {{"prefix", std::string(file_prefix)}});
}

PromptBundle build_query_prompt(const CompletionContext& context, std::string_view query,
                                std::optional<std::string_view> file_prefix, const PromptOptions& options) {
    if (context.mode != CompletionMode::Conversational) throw Error("query prompt needs a conversational context");
    std::map<std::string, std::string> values{{"query", std::string(query)}};
    if (file_prefix) values["prefix"] = std::string(*file_prefix);
    return fit_to_budget(context, options, load_template("query_system", options.template_dir),
                         load_template("query_user", options.template_dir), std::move(values));
}

}  // namespace lancekit
