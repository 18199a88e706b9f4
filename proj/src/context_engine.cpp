#include "lancekit/context_engine.hpp"

#include "lancekit/errors.hpp"
#include "lancekit/extractor.hpp"
#include "lancekit/llm_gateway.hpp"
#include "lancekit/prompt_builder.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>

namespace lancekit {

namespace {

bool is_ident_char(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || u >= 0x80;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string last_segment(std::string_view dotted) {
    std::size_t dot = dotted.rfind('.');
    return std::string(dot == std::string_view::npos ? dotted : dotted.substr(dot + 1));
}

std::string head_segment(std::string_view dotted) {
    return std::string(dotted.substr(0, dotted.find('.')));
}

// `List<String>` -> `List`, `Foo[]` -> `Foo`, `Optional[Foo]` -> `Optional`.
std::string bare_type(std::string_view type) {
    type = trim(type);
    std::size_t cut = type.find_first_of("<[ .");
    while (cut != std::string_view::npos && type[cut] == '.') {
        if (type.substr(cut).starts_with("...")) break;
        cut = type.find_first_of("<[ .", cut + 1);
    }
    return std::string(trim(type.substr(0, cut)));
}

const std::set<std::string, std::less<>>& java_non_types() {
    static const std::set<std::string, std::less<>> words = {
        "return", "new",     "throw",      "else",       "case",   "package", "import", "class",
        "interface", "extends", "implements", "instanceof", "yield", "assert",  "goto",   "break",
        "continue", "do",    "enum",       "record",     "throws", "default", "static", "final",
        "public",  "private", "protected",  "abstract",   "synchronized"};
    return words;
}

const std::set<std::string, std::less<>>& java_control_keywords() {
    static const std::set<std::string, std::less<>> words = {"if",  "for",   "while", "switch", "catch",
                                                              "try", "else",  "do",    "synchronized"};
    return words;
}

// Java source with comments and string/char literals blanked out, same length.
std::string blank_java_noise(std::string_view src) {
    std::string out(src);
    std::size_t i = 0;
    while (i < out.size()) {
        if (out.compare(i, 2, "//") == 0) {
            while (i < out.size() && out[i] != '\n') out[i++] = ' ';
        } else if (out.compare(i, 2, "/*") == 0) {
            std::size_t end = out.find("*/", i + 2);
            end = end == std::string::npos ? out.size() : end + 2;
            for (; i < end; ++i) {
                if (out[i] != '\n') out[i] = ' ';
            }
        } else if (out[i] == '"' || out[i] == '\'') {
            const char quote = out[i];
            out[i++] = ' ';
            while (i < out.size() && out[i] != quote && out[i] != '\n') {
                if (out[i] == '\\' && i + 1 < out.size()) out[i++] = ' ';
                out[i++] = ' ';
            }
            if (i < out.size() && out[i] == quote) out[i++] = ' ';
        } else {
            ++i;
        }
    }
    return out;
}

// Python source with comments and string literals blanked out, same length.
std::string blank_python_noise(std::string_view src) {
    std::string out(src);
    std::size_t i = 0;
    while (i < out.size()) {
        if (out[i] == '#') {
            while (i < out.size() && out[i] != '\n') out[i++] = ' ';
        } else if (out[i] == '"' || out[i] == '\'') {
            const char quote = out[i];
            const bool triple = out.compare(i, 3, std::string(3, quote)) == 0;
            const std::size_t open = triple ? 3 : 1;
            for (std::size_t j = 0; j < open; ++j) out[i++] = ' ';
            while (i < out.size()) {
                if (out[i] == '\\' && i + 1 < out.size()) {
                    out[i++] = ' ';
                    if (out[i] != '\n') out[i] = ' ';
                    ++i;
                    continue;
                }
                if (triple ? out.compare(i, 3, std::string(3, quote)) == 0 : out[i] == quote) {
                    for (std::size_t j = 0; j < open; ++j) out[i++] = ' ';
                    break;
                }
                if (!triple && out[i] == '\n') break;
                if (out[i] != '\n') out[i] = ' ';
                ++i;
            }
        } else {
            ++i;
        }
    }
    return out;
}

void add_name(VariableScan& scan, std::set<std::string>& seen, const std::string& name) {
    if (seen.insert(name).second) scan.local_names.push_back(name);
}

std::vector<std::string> split_top_level(std::string_view text) {
    std::vector<std::string> parts;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '(' || c == '[' || c == '{' || c == '<') ++depth;
        if (c == ')' || c == ']' || c == '}' || c == '>') --depth;
        if (c == ',' && depth == 0) {
            parts.emplace_back(trim(text.substr(start, i - start)));
            start = i + 1;
        }
    }
    if (!trim(text.substr(start)).empty()) parts.emplace_back(trim(text.substr(start)));
    return parts;
}

struct Line {
    std::size_t begin;
    std::string_view text;
};

std::vector<Line> lines_of(std::string_view text) {
    std::vector<Line> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        lines.push_back({pos, text.substr(pos, eol - pos)});
        pos = eol + 1;
    }
    return lines;
}

std::size_t indent_of(std::string_view line) {
    std::size_t n = 0;
    while (n < line.size() && (line[n] == ' ' || line[n] == '\t')) ++n;
    return n;
}

void scan_python_statements(std::string_view text, bool record_names, VariableScan& scan, std::set<std::string>& seen) {
    static const std::regex annotated(R"(^\s*([A-Za-z_]\w*)\s*:\s*([^=]+?)\s*(=[^=].*)?$)");
    static const std::regex assigned(R"(^\s*([A-Za-z_]\w*(?:\s*,\s*[A-Za-z_]\w*)*)\s*=(?!=))");
    static const std::regex for_target(R"(^\s*(?:async\s+)?for\s+([A-Za-z_][\w\s,]*?)\s+in\b)");
    static const std::regex as_target(R"(\bas\s+([A-Za-z_]\w*))");
    static const std::regex name(R"([A-Za-z_]\w*)");

    auto add_names = [&](const std::string& list) {
        for (auto it = std::sregex_iterator(list.begin(), list.end(), name); it != std::sregex_iterator(); ++it) {
            if (record_names) add_name(scan, seen, it->str());
        }
    };
    for (const Line& line : lines_of(text)) {
        std::string s(line.text);
        if (trim(s).empty()) continue;
        std::smatch m;
        std::string_view stripped = trim(s);
        const bool keyword_line = stripped.starts_with("def ") || stripped.starts_with("class ") ||
                                  stripped.starts_with("if ") || stripped.starts_with("elif ") ||
                                  stripped.starts_with("while ") || stripped.starts_with("return") ||
                                  stripped.starts_with("else") || stripped.starts_with("try") ||
                                  stripped.starts_with("async def ");
        if (!keyword_line && std::regex_search(s, m, annotated)) {
            if (record_names) add_name(scan, seen, m[1].str());
            scan.types[m[1].str()] = std::string(trim(m[2].str()));
        } else if (!keyword_line && std::regex_search(s, m, assigned)) {
            add_names(m[1].str());
        } else if (std::regex_search(s, m, for_target)) {
            add_names(m[1].str());
        }
        if (stripped.starts_with("with ") || stripped.starts_with("except") || stripped.starts_with("async with")) {
            for (auto it = std::sregex_iterator(s.begin(), s.end(), as_target); it != std::sregex_iterator(); ++it) {
                if (record_names) add_name(scan, seen, (*it)[1].str());
            }
        }
    }
}

VariableScan scan_python(std::string_view prefix) {
    const std::string clean = blank_python_noise(prefix);
    const std::vector<Line> lines = lines_of(clean);
    VariableScan scan;
    std::set<std::string> seen;

    std::size_t current_indent = lines.empty() ? 0 : indent_of(lines.back().text);
    static const std::regex def_line(R"(^(\s*)(?:async\s+)?def\s+\w+\s*\()");
    std::optional<std::size_t> def_index;
    for (std::size_t i = lines.size(); i-- > 0;) {
        if (i + 1 == lines.size()) continue;
        std::string s(lines[i].text);
        std::smatch m;
        if (trim(s).empty()) continue;
        if (std::regex_search(s, m, def_line) && m[1].length() < static_cast<long>(current_indent)) {
            def_index = i;
            break;
        }
        current_indent = std::min(current_indent, indent_of(s));
    }

    // Module-level declarations stay visible inside functions.
    std::string module_level;
    const std::size_t module_end = def_index ? *def_index : lines.size();
    for (std::size_t i = 0; i < module_end; ++i) {
        if (indent_of(lines[i].text) == 0) {
            module_level.append(lines[i].text);
            module_level.push_back('\n');
        }
    }
    scan_python_statements(module_level, !def_index, scan, seen);
    if (!def_index) return scan;

    const std::size_t def_begin = lines[*def_index].begin;
    const std::size_t open = clean.find('(', def_begin);
    int depth = 0;
    std::size_t close = open;
    for (; close < clean.size(); ++close) {
        if (clean[close] == '(' || clean[close] == '[') ++depth;
        if (clean[close] == ')' || clean[close] == ']') --depth;
        if (depth == 0) break;
    }
    std::string_view params = std::string_view(clean).substr(open + 1, close > open ? close - open - 1 : 0);
    for (const std::string& part : split_top_level(params)) {
        std::string_view p = part;
        while (p.starts_with('*')) p.remove_prefix(1);
        std::size_t colon = p.find(':');
        std::size_t equals = p.find('=');
        std::string pname(trim(p.substr(0, std::min(colon, equals))));
        if (pname.empty() || pname == "/") continue;
        add_name(scan, seen, pname);
        if (colon != std::string_view::npos && (equals == std::string_view::npos || colon < equals)) {
            std::string_view type = p.substr(colon + 1, equals == std::string_view::npos ? std::string_view::npos
                                                                                        : equals - colon - 1);
            scan.types[pname] = std::string(trim(type));
        }
    }
    std::size_t body = clean.find('\n', close);
    if (body != std::string::npos) scan_python_statements(std::string_view(clean).substr(body), true, scan, seen);
    return scan;
}

VariableScan scan_java(std::string_view prefix) {
    const std::string clean = blank_java_noise(prefix);

    // Braces still open at the end of the prefix.
    std::vector<std::size_t> open_stack;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        if (clean[i] == '{') open_stack.push_back(i);
        if (clean[i] == '}' && !open_stack.empty()) open_stack.pop_back();
    }
    const std::set<std::size_t> still_open(open_stack.begin(), open_stack.end());

    // Text outside any closed block: enclosing blocks, their headers, fields.
    std::string visible(clean.size(), ' ');
    std::vector<std::size_t> stack;
    std::size_t closed_depth = 0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        const char c = clean[i];
        if (c == '{') {
            stack.push_back(i);
            if (!still_open.count(i)) ++closed_depth;
        }
        if (closed_depth == 0 || c == '\n') visible[i] = c;
        if (c == '}' && !stack.empty()) {
            if (!still_open.count(stack.back())) {
                --closed_depth;
                visible[i] = ';';
            }
            stack.pop_back();
        }
        if (c == '{' && closed_depth > 0 && !still_open.count(i)) visible[i] = ' ';
    }

    // Innermost open brace that starts a method or constructor body.
    std::size_t method_start = 0;
    bool in_method = false;
    for (auto it = open_stack.rbegin(); it != open_stack.rend(); ++it) {
        std::size_t brace = *it;
        std::size_t header_begin = clean.find_last_of(";{}", brace == 0 ? 0 : brace - 1);
        header_begin = header_begin == std::string::npos || brace == 0 ? 0 : header_begin + 1;
        std::string_view header = trim(std::string_view(clean).substr(header_begin, brace - header_begin));
        if (header.find('(') == std::string_view::npos) continue;
        std::string first;
        for (char c : header) {
            if (!is_ident_char(c)) break;
            first.push_back(c);
        }
        if (java_control_keywords().count(first)) continue;
        if (header.find("->") != std::string_view::npos) continue;  // lambda body
        method_start = header_begin;
        in_method = true;
        break;
    }

    VariableScan scan;
    std::set<std::string> seen;
    static const std::regex declaration(
        R"((?:^|[\s(,;{}])([A-Za-z_][\w.]*(?:\s*<[^;=(){}]*>)?(?:\s*\[\s*\])*(?:\.\.\.)?)\s+([A-Za-z_]\w*)\s*(?=[=;:,)]))");
    static const std::regex assignment(R"((?:^|[;{}(\s])([A-Za-z_]\w*)\s*=(?!=))");
    for (auto it = std::sregex_iterator(visible.begin(), visible.end(), declaration); it != std::sregex_iterator();
         ++it) {
        const std::string type = (*it)[1].str();
        const std::string vname = (*it)[2].str();
        if (java_non_types().count(type) || java_non_types().count(vname)) continue;
        scan.types[vname] = type;
        if (in_method && static_cast<std::size_t>(it->position(2)) >= method_start) add_name(scan, seen, vname);
    }
    if (in_method) {
        const std::string tail = visible.substr(method_start);
        for (auto it = std::sregex_iterator(tail.begin(), tail.end(), assignment); it != std::sregex_iterator(); ++it) {
            add_name(scan, seen, (*it)[1].str());
        }
    }
    return scan;
}

std::optional<std::string> java_package(std::string_view content) {
    static const std::regex package_decl(R"((?:^|\n)\s*package\s+([\w.]+)\s*;)");
    std::string text(content.substr(0, std::min<std::size_t>(content.size(), 4096)));
    std::smatch m;
    if (std::regex_search(text, m, package_decl)) return m[1].str();
    return std::nullopt;
}

bool is_entity(const RepoIndex& index, std::string_view name) { return index.find_entity(name) != nullptr; }

// Qualified entity a type name refers to from `file`.
std::optional<std::string> resolve_type(std::string_view type_name, const RepoIndex& index, std::string_view file,
                                        std::string_view content) {
    const std::string type = bare_type(type_name);
    if (type.empty()) return std::nullopt;
    const auto bindings = index.imports_for(file);
    const std::string head = head_segment(type);
    const std::string rest = type.size() > head.size() ? type.substr(head.size()) : std::string();
    for (const ImportBinding& b : bindings) {
        if (b.kind == ImportKind::Wildcard) continue;
        if (b.local_name == type && is_entity(index, b.target)) return b.target;
        if (b.local_name == head && !rest.empty() && is_entity(index, b.target + rest)) return b.target + rest;
    }
    if (index.language == Language::Java) {
        if (auto package = java_package(content)) {
            if (is_entity(index, *package + "." + type)) return *package + "." + type;
        }
    } else {
        const std::string module = python_module_name(file);
        if (!module.empty() && is_entity(index, module + "." + type)) return module + "." + type;
    }
    for (const ImportBinding& b : bindings) {
        if (b.kind == ImportKind::Wildcard && is_entity(index, b.target + "." + type)) return b.target + "." + type;
    }
    if (is_entity(index, type)) return type;
    return std::nullopt;
}

bool has_letter(std::string_view text) {
    return std::any_of(text.begin(), text.end(), [](char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || static_cast<unsigned char>(c) >= 0x80;
    });
}

// Identifier-like words that contain at least one letter.
std::vector<std::string> words_of(std::string_view text) {
    std::vector<std::string> words;
    std::string current;
    auto flush = [&] {
        if (has_letter(current)) words.push_back(current);
        current.clear();
    };
    for (char c : text) {
        if (is_ident_char(c)) {
            current.push_back(c);
        } else {
            flush();
        }
    }
    flush();
    return words;
}

std::string lowercase(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

const std::set<std::string, std::less<>>& query_stop_words() {
    // "do" and "the" are deliberately absent: they can carry the operation.
    static const std::set<std::string, std::less<>> words = {
        "a",    "an",    "and",  "are",  "as",   "at",    "be",    "by",     "can",  "could", "for",
        "from", "how",   "i",    "in",   "into", "is",    "it",    "me",     "my",   "of",    "on",
        "or",   "please", "should", "so", "that", "this", "to",   "using",  "via",  "we",    "what",
        "when", "where", "which", "why", "with", "would", "you",  "your",   "our",  "shall", "will"};
    return words;
}

bool is_capitalized(std::string_view word) {
    return !word.empty() && std::isupper(static_cast<unsigned char>(word.front()));
}

std::optional<std::size_t> function_entry(const VectorIndex& vindex, const std::string& key) {
    return vindex.find(key, PayloadKind::Function);
}

void score_candidates(std::vector<Candidate>& candidates, const EmbeddingVector& probe, const VectorIndex& vindex) {
    for (Candidate& c : candidates) {
        auto entry = function_entry(vindex, c.key);
        if (!entry) throw Error("vector index has no entry for \"" + c.key + "\"; rebuild it");
        c.score = vindex.similarity(*entry, probe);
        c.scored = true;
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.key < b.key;
    });
}

std::optional<EmbeddingVector> try_embed(Embedder& embedder, std::string_view text) {
    if (trim(text).empty()) return std::nullopt;
    try {
        return embedder.embed(text);
    } catch (const EmptyTextError&) {
        return std::nullopt;
    }
}

}  // namespace

std::optional<std::string> resolve_type_name(std::string_view type, const RepoIndex& index, std::string_view file,
                                             std::string_view content) {
    return resolve_type(type, index, file, content);
}

std::string_view to_string(CompletionMode mode) {
    return mode == CompletionMode::Token ? "token" : "conversational";
}

std::optional<CompletionMode> parse_completion_mode(std::string_view text) {
    if (text == "token") return CompletionMode::Token;
    if (text == "conversational" || text == "query") return CompletionMode::Conversational;
    return std::nullopt;
}

VariableScan scan_variables(std::string_view prefix, Language language) {
    return language == Language::Python ? scan_python(prefix) : scan_java(prefix);
}

TokenSite analyze_token_site(std::string_view content, std::size_t cursor, Language language) {
    if (cursor > content.size()) {
        throw ParseSiteError("cursor " + std::to_string(cursor) + " is past the end of the file (" +
                             std::to_string(content.size()) + " bytes)");
    }
    if (cursor < 2 || content[cursor - 1] != '.' || !is_ident_char(content[cursor - 2])) {
        throw ParseSiteError("cursor " + std::to_string(cursor) + " does not follow `identifier.`");
    }
    std::size_t start = cursor - 1;
    while (start > 0 && (is_ident_char(content[start - 1]) || content[start - 1] == '.')) --start;
    while (start < cursor - 1 && content[start] == '.') ++start;
    std::string receiver(content.substr(start, cursor - 1 - start));
    if (receiver.empty() || std::isdigit(static_cast<unsigned char>(receiver.front())) ||
        receiver.find("..") != std::string::npos) {
        throw ParseSiteError("no identifier before the `.` at cursor " + std::to_string(cursor));
    }

    TokenSite site;
    site.content = std::string(content);
    site.cursor = cursor;
    site.receiver = receiver;

    std::size_t boundary;
    if (language == Language::Python) {
        boundary = content.rfind('\n', start == 0 ? 0 : start - 1);
    } else {
        boundary = content.find_last_of(";{}", start == 0 ? 0 : start - 1);
    }
    boundary = boundary == std::string_view::npos || start == 0 ? 0 : boundary + 1;
    const std::string statement(content.substr(boundary, start - boundary));
    static const std::regex python_assign(
        R"(^\s*(?:[A-Za-z_][\w.]*\s*,\s*)*([A-Za-z_][\w.]*)(?:\s*:\s*[^=]+?)?\s*=\s*$)");
    static const std::regex java_assign(
        R"(^\s*(?:final\s+)?(?:[A-Za-z_][\w.]*(?:\s*<[^=;]*>)?(?:\s*\[\s*\])*\s+)?([A-Za-z_][\w.]*)\s*=\s*$)");
    std::smatch m;
    if (std::regex_match(statement, m, language == Language::Python ? python_assign : java_assign)) {
        std::string lhs = last_segment(m[1].str());
        if (!lhs.empty()) site.assignment_identifier = lhs;
    }

    VariableScan scan = scan_variables(content.substr(0, cursor), language);
    site.in_scope_variables = std::move(scan.local_names);
    site.variable_types = std::move(scan.types);
    return site;
}

std::string resolve_receiver(const TokenSite& site, const RepoIndex& index, std::string_view file) {
    const std::string& receiver = site.receiver;
    const auto bindings = index.imports_for(file);
    const std::string head = head_segment(receiver);
    const std::string rest = receiver.substr(head.size());

    for (const ImportBinding& b : bindings) {
        if (b.kind != ImportKind::Wildcard && b.local_name == receiver && is_entity(index, b.target)) return b.target;
    }
    for (const ImportBinding& b : bindings) {
        if (b.kind != ImportKind::Wildcard && b.local_name == head && !rest.empty() &&
            is_entity(index, b.target + rest)) {
            return b.target + rest;
        }
    }
    if (rest.empty()) {
        if (auto type = site.variable_types.find(receiver); type != site.variable_types.end()) {
            if (auto entity = resolve_type(type->second, index, file, site.content)) return *entity;
        }
    }
    if (auto entity = resolve_type(receiver, index, file, site.content)) return *entity;

    std::vector<std::string> known;
    for (const ImportBinding& b : bindings) {
        known.push_back(b.local_name.empty() ? b.target + ".*" : b.local_name + " -> " + b.target);
    }
    throw UnresolvedReceiverError(receiver, known);
}

std::vector<Candidate> module_functions(std::string_view module, const RepoIndex& index) {
    const std::vector<std::string> keys = function_keys(index);
    std::vector<Candidate> out;
    for (std::size_t i = 0; i < index.functions.size(); ++i) {
        const ApiFunction& fn = index.functions[i];
        if (!fn.owner || *fn.owner != module || fn.visibility == Visibility::Private) continue;
        out.push_back(Candidate{fn, keys[i], 0.0, false, {}});
    }
    return out;
}

CompletionContext rank_token_candidates(std::string_view module, const TokenSite& site, const RepoIndex& index,
                                        const VectorIndex& vindex, Embedder& embedder, std::size_t k) {
    if (k == 0) throw Error("candidate count must be at least 1");
    CompletionContext context;
    context.mode = CompletionMode::Token;
    context.resolved_module = std::string(module);
    context.candidates = module_functions(module, index);
    if (context.candidates.empty()) throw EmptyModuleError("\"" + std::string(module) + "\" has no callable functions");
    for (Candidate& c : context.candidates) c.receiver = site.receiver;

    if (site.assignment_identifier) {
        context.local_cues.push_back(*site.assignment_identifier);
        if (auto probe = try_embed(embedder, *site.assignment_identifier)) {
            score_candidates(context.candidates, *probe, vindex);
        }
    }
    for (const std::string& name : site.in_scope_variables) {
        if (!site.assignment_identifier || name != *site.assignment_identifier) context.local_cues.push_back(name);
    }
    if (context.candidates.size() > k) {
        context.candidates.resize(k);
        context.truncated = true;
    }
    return context;
}

ParsedQuery parse_query_heuristic(std::string_view raw) {
    const std::vector<std::string> words = words_of(raw);
    const auto& stop = query_stop_words();

    // Longest run of adjacent capitalized words that are not stop words.
    std::size_t best_begin = 0;
    std::size_t best_end = 0;
    std::size_t best_length = 0;
    for (std::size_t i = 0; i < words.size();) {
        if (!is_capitalized(words[i]) || stop.count(lowercase(words[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        std::size_t length = 0;
        while (j < words.size() && is_capitalized(words[j]) && !stop.count(lowercase(words[j]))) {
            length += words[j].size();
            ++j;
        }
        if (length > best_length) {
            best_begin = i;
            best_end = j;
            best_length = length;
        }
        i = j;
    }

    ParsedQuery parsed;
    std::vector<std::string> operation;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i >= best_begin && i < best_end) {
            if (!parsed.entity.empty()) parsed.entity += ' ';
            parsed.entity += words[i];
        } else if (!stop.count(lowercase(words[i]))) {
            operation.push_back(words[i]);
        }
    }
    // A query made only of stop words still names an operation.
    if (parsed.entity.empty() && operation.empty()) operation = words;
    for (std::size_t i = 0; i < operation.size(); ++i) {
        if (i) parsed.operation += ' ';
        parsed.operation += operation[i];
    }
    return parsed;
}

ParsedQuery parse_query(const ConversationalQuery& query, LlmClient& llm) {
    if (trim(query.raw).empty()) throw QueryParseError("query is empty");
    ParsedQuery parsed;
    bool have = false;
    if (!llm.is_mock()) {
        PromptBundle bundle;
        bundle.system_text = std::string(template_text("query_parse_system"));
        bundle.user_text = render_template(template_text("query_parse_user"), {{"query", query.raw}});
        bundle.token_estimate = estimate_tokens(bundle.system_text) + estimate_tokens(bundle.user_text);
        const LlmResponse reply = llm.complete(bundle);
        static const std::regex entity_line(R"((?:^|\n)\s*\**entity\**\s*:\s*([^\n]*))", std::regex::icase);
        static const std::regex operation_line(R"((?:^|\n)\s*\**operation\**\s*:\s*([^\n]*))", std::regex::icase);
        std::smatch e;
        std::smatch o;
        if (std::regex_search(reply.text, e, entity_line) && std::regex_search(reply.text, o, operation_line)) {
            parsed.entity = std::string(trim(e[1].str()));
            parsed.operation = std::string(trim(o[1].str()));
            for (std::string* field : {&parsed.entity, &parsed.operation}) {
                if (lowercase(*field) == "none" || *field == "-" || lowercase(*field) == "n/a") field->clear();
            }
            parsed.from_model = true;
            have = !(parsed.entity.empty() && parsed.operation.empty());
        }
    }
    if (!have) parsed = parse_query_heuristic(query.raw);
    if (query.entity_hint) parsed.entity = *query.entity_hint;
    if (query.operation_hint) parsed.operation = *query.operation_hint;
    if (parsed.entity.empty() && parsed.operation.empty()) {
        throw QueryParseError("no entity or operation found in \"" + query.raw + "\"");
    }
    return parsed;
}

std::vector<ScoredKey> match_entity(std::string_view entity, const VectorIndex& vindex, Embedder& embedder,
                                    std::size_t k) {
    if (vindex.count(PayloadKind::Entity) == 0) throw NoEntitiesError("the index contains no entities");
    if (trim(entity).empty()) throw QueryParseError("entity name is empty");
    const EmbeddingVector probe = embedder.embed(entity);
    return vindex.query_topk(probe, k, PayloadKind::Entity);
}

CompletionContext rank_conversational_candidates(const std::vector<ScoredKey>& entity_keys,
                                                 std::string_view operation, const RepoIndex& index,
                                                 const VectorIndex& vindex, Embedder& embedder, std::size_t k,
                                                 const std::function<std::string(std::string_view)>& receiver_of) {
    if (k == 0) throw Error("candidate count must be at least 1");
    if (entity_keys.empty()) throw EmptyModuleError("no entities to draw candidates from");
    auto receiver = [&](std::string_view entity) {
        return receiver_of ? receiver_of(entity) : last_segment(entity);
    };

    CompletionContext context;
    context.mode = CompletionMode::Conversational;
    if (!trim(operation).empty()) context.local_cues.emplace_back(trim(operation));

    std::set<std::string> taken;
    for (const ScoredKey& entity : entity_keys) {
        std::vector<Candidate> methods = module_functions(entity.key, index);
        if (methods.empty()) continue;
        const bool top = !context.resolved_module;
        if (top) {
            context.resolved_module = entity.key;
            if (auto probe = try_embed(embedder, operation)) score_candidates(methods, *probe, vindex);
        }
        const std::string call_receiver = receiver(entity.key);
        for (Candidate& c : methods) {
            if (!taken.insert(c.key).second) continue;
            c.receiver = call_receiver;
            context.candidates.push_back(std::move(c));
        }
    }
    if (context.candidates.empty()) throw EmptyModuleError("none of the matched entities has callable functions");
    if (context.candidates.size() > k) {
        context.candidates.resize(k);
        context.truncated = true;
    }
    return context;
}

std::string receiver_for_entity(std::string_view entity, const RepoIndex& index, std::string_view file,
                                std::string_view content,
                                const std::map<std::string, std::string>& variable_types) {
    for (const auto& [name, type] : variable_types) {
        if (auto resolved = resolve_type(type, index, file, content); resolved && *resolved == entity) return name;
    }
    const auto bindings = index.imports_for(file);
    for (const ImportBinding& b : bindings) {
        if (!b.local_name.empty() && b.target == entity) return b.local_name;
    }
    for (const ImportBinding& b : bindings) {
        if (b.kind == ImportKind::ModuleAlias && entity.starts_with(b.target + ".")) {
            return b.local_name + std::string(entity.substr(b.target.size()));
        }
    }
    if (index.language == Language::Python && !file.empty()) {
        const std::string module = python_module_name(file);
        if (entity.starts_with(module + ".")) return std::string(entity.substr(module.size() + 1));
    }
    return last_segment(entity);
}

}  // namespace lancekit
