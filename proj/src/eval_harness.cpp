#include "lancekit/eval_harness.hpp"

#include "lancekit/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace lancekit {

namespace {

using nlohmann::json;

bool is_ident_char(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || c == '$' || u >= 0x80;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

[[noreturn]] void task_error(std::size_t line, const std::string& message) { throw TaskSchemaError(line, message); }

std::string required_string(const json& record, const char* field, std::size_t line) {
    if (!record.contains(field)) task_error(line, std::string("missing field `") + field + "`");
    if (!record[field].is_string()) task_error(line, std::string("field `") + field + "` must be a string");
    std::string value = record[field].get<std::string>();
    if (trim(value).empty()) task_error(line, std::string("field `") + field + "` is empty");
    return value;
}

std::vector<std::string> string_list(const json& value, const std::string& field, std::size_t line) {
    if (!value.is_array()) task_error(line, "field `" + field + "` must be a list of strings");
    std::vector<std::string> out;
    for (const json& item : value) {
        if (!item.is_string()) task_error(line, "field `" + field + "` must be a list of strings");
        out.push_back(item.get<std::string>());
    }
    return out;
}

EvalTask task_from_record(const json& record, std::size_t line, const std::filesystem::path& base_dir) {
    static const std::set<std::string> known = {"id",       "mode",          "repo_ref",      "language",
                                                "context_file", "cursor",    "query",         "expected_call",
                                                "expected_args", "accepted_arg_variants"};
    if (!record.is_object()) task_error(line, "record is not a JSON object");
    for (const auto& item : record.items()) {
        if (!known.count(item.key())) task_error(line, "unknown field `" + item.key() + "`");
    }
    EvalTask task;
    task.line = line;
    task.id = required_string(record, "id", line);
    auto mode = parse_completion_mode(required_string(record, "mode", line));
    if (!mode) task_error(line, "mode must be `token` or `conversational`");
    task.mode = *mode;
    task.repo_ref = required_string(record, "repo_ref", line);
    auto language = parse_language(required_string(record, "language", line));
    if (!language) task_error(line, "unsupported language `" + record["language"].get<std::string>() + "`");
    task.language = *language;
    task.context_file = required_string(record, "context_file", line);
    if (record.contains("cursor") && !record["cursor"].is_null()) {
        if (!record["cursor"].is_number_unsigned()) task_error(line, "cursor must be a non-negative integer");
        task.cursor = record["cursor"].get<std::size_t>();
    }
    if (record.contains("query") && !record["query"].is_null()) {
        if (!record["query"].is_string() || trim(record["query"].get<std::string>()).empty()) {
            task_error(line, "query must be a non-empty string");
        }
        task.query = record["query"].get<std::string>();
    }
    if (task.mode == CompletionMode::Token && !task.cursor) task_error(line, "token task needs `cursor`");
    if (task.mode == CompletionMode::Conversational && !task.query) task_error(line, "conversational task needs `query`");
    task.expected_call = required_string(record, "expected_call", line);
    if (!record.contains("expected_args")) task_error(line, "missing field `expected_args`");
    task.expected_args = string_list(record["expected_args"], "expected_args", line);
    if (record.contains("accepted_arg_variants")) {
        const json& variants = record["accepted_arg_variants"];
        if (!variants.is_array()) task_error(line, "field `accepted_arg_variants` must be a list of lists");
        for (const json& v : variants) task.accepted_arg_variants.push_back(string_list(v, "accepted_arg_variants", line));
    }
    task.repo_path = (base_dir / task.repo_ref).lexically_normal();
    return task;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Index of the `)` closing the `(` at `open`, skipping strings and nesting.
std::optional<std::size_t> closing_paren(std::string_view text, std::size_t open) {
    int depth = 0;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '"' || c == '\'') {
            const char quote = c;
            for (++i; i < text.size() && text[i] != quote; ++i) {
                if (text[i] == '\\') ++i;
            }
            if (i >= text.size()) return std::nullopt;
            continue;
        }
        if (c == '(' || c == '[' || c == '{') ++depth;
        if (c == ')' || c == ']' || c == '}') {
            if (--depth == 0) return c == ')' ? std::optional<std::size_t>(i) : std::nullopt;
        }
    }
    return std::nullopt;
}

std::vector<std::string> split_arguments(std::string_view text) {
    std::vector<std::string> args;
    if (trim(text).empty()) return args;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '"' || c == '\'') {
            const char quote = c;
            for (++i; i < text.size() && text[i] != quote; ++i) {
                if (text[i] == '\\') ++i;
            }
            continue;
        }
        if (c == '(' || c == '[' || c == '{') ++depth;
        if (c == ')' || c == ']' || c == '}') --depth;
        if (c == ',' && depth == 0) {
            args.emplace_back(trim(text.substr(start, i - start)));
            start = i + 1;
        }
    }
    args.emplace_back(trim(text.substr(start)));
    return args;
}

std::string strip_fences(std::string_view text) {
    const std::size_t fence = text.find("```");
    if (fence == std::string_view::npos) return std::string(text);
    std::size_t body = text.find('\n', fence);
    if (body == std::string_view::npos) return std::string(text.substr(fence + 3));
    ++body;
    const std::size_t end = text.find("```", body);
    return std::string(text.substr(body, end == std::string_view::npos ? std::string_view::npos : end - body));
}

const std::set<std::string, std::less<>>& non_call_words() {
    static const std::set<std::string, std::less<>> words = {
        "if",   "elif",   "while", "for",    "return", "not",   "and",    "or",     "in",    "is",
        "lambda", "def",  "class", "new",    "switch", "catch", "await",  "yield",  "assert", "with",
        "except", "sizeof", "typeof", "synchronized", "throw", "else", "try", "do"};
    return words;
}

std::string head_of(std::string_view dotted) { return std::string(dotted.substr(0, dotted.find('.'))); }

double round_tenth(double value) { return std::round(value * 10.0) / 10.0; }

MetricRow metrics_for(const std::vector<const TaskRecord*>& records, bool include_cached_latency) {
    MetricRow row;
    row.tasks = records.size();
    std::int64_t latency_total = 0;
    std::size_t latency_count = 0;
    for (const TaskRecord* r : records) {
        if (r->call_match) ++row.call_matches;
        if (r->call_match && r->arg_match) ++row.arg_matches;
        if (!r->from_cache || include_cached_latency) {
            latency_total += r->latency_ms;
            ++latency_count;
        }
    }
    row.call_accuracy_pct = percentage(row.call_matches, row.tasks);
    row.argument_matching_pct = percentage(row.arg_matches, row.tasks);
    row.inference_time_ms =
        latency_count ? round_tenth(static_cast<double>(latency_total) / static_cast<double>(latency_count)) : 0.0;
    return row;
}

nlohmann::ordered_json row_json(const MetricRow& row) {
    nlohmann::ordered_json out;
    if (row.language) out["language"] = std::string(to_string(*row.language));
    if (row.mode) out["mode"] = std::string(to_string(*row.mode));
    out["tasks"] = row.tasks;
    out["call_matches"] = row.call_matches;
    out["arg_matches"] = row.arg_matches;
    out["call_accuracy_pct"] = row.call_accuracy_pct;
    out["argument_matching_pct"] = row.argument_matching_pct;
    out["inference_time_ms"] = row.inference_time_ms;
    return out;
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string format_number(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.1f", value);
    return buffer;
}

}  // namespace

std::vector<EvalTask> parse_tasks(std::string_view text, const std::filesystem::path& base_dir) {
    std::vector<EvalTask> tasks;
    std::set<std::string> ids;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        ++line_no;
        pos = eol + 1;
        if (trim(line).empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded()) task_error(line_no, "not valid JSON");
        EvalTask task = task_from_record(record, line_no, base_dir);
        if (!ids.insert(task.id).second) task_error(line_no, "duplicate task id `" + task.id + "`");
        tasks.push_back(std::move(task));
    }
    if (tasks.empty()) task_error(line_no == 0 ? 1 : line_no, "zero tasks");
    return tasks;
}

std::vector<EvalTask> load_tasks(const std::filesystem::path& path) {
    return parse_tasks(read_text(path), path.parent_path());
}

PredictedCall parse_predicted_call(std::string_view raw, Language) {
    const std::string text = strip_fences(raw);
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == '"' || c == '\'') {
            const char quote = c;
            for (++i; i < text.size() && text[i] != quote && text[i] != '\n'; ++i) {
                if (text[i] == '\\') ++i;
            }
            ++i;
            continue;
        }
        const bool starts_chain = (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') &&
                                  (i == 0 || (!is_ident_char(text[i - 1]) && text[i - 1] != '.'));
        if (!starts_chain) {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < text.size() && (is_ident_char(text[end]) || text[end] == '.')) ++end;
        std::string chain = text.substr(i, end - i);
        while (!chain.empty() && chain.back() == '.') chain.pop_back();
        std::size_t next = end;
        while (next < text.size() && (text[next] == ' ' || text[next] == '\t')) ++next;
        if (next < text.size() && text[next] == '(' && !chain.empty() && !non_call_words().count(chain)) {
            auto close = closing_paren(text, next);
            if (!close) throw NoCallFoundError("call to `" + chain + "` is not terminated");
            return PredictedCall{chain, split_arguments(std::string_view(text).substr(next + 1, *close - next - 1))};
        }
        i = end;
    }
    throw NoCallFoundError("no call expression in model output");
}

std::string qualify_callee(std::string_view callee_in, const RepoIndex& index, std::string_view file,
                           std::string_view content) {
    std::string callee(trim(callee_in));
    if (auto hash = callee.find('#'); hash != std::string::npos) callee.resize(hash);
    const auto bindings = index.imports_for(file);
    const std::string head = head_of(callee);
    const std::string rest = callee.substr(head.size());

    if (rest.empty()) {
        for (const ImportBinding& b : bindings) {
            if (b.kind == ImportKind::EntityImport && b.local_name == callee) return b.target;
        }
        if (index.language == Language::Python) {
            const std::string module = python_module_name(file);
            if (!module.empty() && !index.functions_named(module + "." + callee).empty()) return module + "." + callee;
        }
        return callee;
    }
    // Longest binding that prefixes the callee (`import a.b` binds `a.b`).
    const ImportBinding* best = nullptr;
    for (const ImportBinding& b : bindings) {
        if (b.local_name.empty() || !callee.starts_with(b.local_name + ".")) continue;
        if (!best || b.local_name.size() > best->local_name.size()) best = &b;
    }
    if (best) return best->target + callee.substr(best->local_name.size());

    const VariableScan scan = scan_variables(content, index.language);
    if (auto type = scan.types.find(head); type != scan.types.end()) {
        if (auto entity = resolve_type_name(type->second, index, file, content)) return *entity + rest;
    }
    if (!index.functions_named(callee).empty()) return callee;
    if (auto entity = resolve_type_name(head, index, file, content)) return *entity + rest;
    return callee;
}

bool score_call(std::string_view predicted_callee, const EvalTask& task, const RepoIndex& index,
                std::string_view context_text) {
    if (trim(predicted_callee).empty()) return false;
    const std::string expected = qualify_callee(task.expected_call, index, task.context_file, context_text);
    const std::string predicted = qualify_callee(predicted_callee, index, task.context_file, context_text);
    return expected == predicted;
}

std::string normalize_argument(std::string_view argument) {
    std::string collapsed;
    bool space = false;
    for (char c : trim(argument)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = true;
            continue;
        }
        if (space && !collapsed.empty()) collapsed += ' ';
        space = false;
        collapsed += c;
    }
    while (collapsed.size() >= 2 && collapsed.front() == '(' && closing_paren(collapsed, 0) == collapsed.size() - 1) {
        collapsed = std::string(trim(std::string_view(collapsed).substr(1, collapsed.size() - 2)));
    }
    return collapsed;
}

bool score_arguments(const std::vector<std::string>& predicted, const EvalTask& task) {
    auto normalize_all = [](const std::vector<std::string>& args) {
        std::vector<std::string> out;
        for (const std::string& a : args) out.push_back(normalize_argument(a));
        return out;
    };
    const std::vector<std::string> got = normalize_all(predicted);
    if (got == normalize_all(task.expected_args)) return true;
    return std::any_of(task.accepted_arg_variants.begin(), task.accepted_arg_variants.end(),
                       [&](const std::vector<std::string>& variant) { return got == normalize_all(variant); });
}

double percentage(std::size_t matched, std::size_t total) {
    if (total == 0) return 0.0;
    return std::round(1000.0 * static_cast<double>(matched) / static_cast<double>(total)) / 10.0;
}

EvalReport summarize(std::vector<TaskRecord> records, bool include_cached_latency) {
    std::sort(records.begin(), records.end(), [](const TaskRecord& a, const TaskRecord& b) { return a.id < b.id; });
    EvalReport report;
    report.tasks = std::move(records);

    std::vector<const TaskRecord*> all;
    std::map<std::pair<Language, CompletionMode>, std::vector<const TaskRecord*>> groups;
    for (const TaskRecord& r : report.tasks) {
        all.push_back(&r);
        groups[{r.language, r.mode}].push_back(&r);
    }
    report.aggregates = metrics_for(all, include_cached_latency);
    for (const auto& [key, members] : groups) {
        MetricRow row = metrics_for(members, include_cached_latency);
        row.language = key.first;
        row.mode = key.second;
        report.table.push_back(row);
    }
    return report;
}

WorkspaceCache::WorkspaceCache(Embedder& embedder, IndexOptions index_options, VectorIndexOptions vector_options)
    : embedder_(embedder), index_options_(std::move(index_options)), vector_options_(vector_options) {}

void WorkspaceCache::preload(const std::filesystem::path& root, Workspace workspace) {
    const std::string key = std::filesystem::weakly_canonical(std::filesystem::absolute(root)).string();
    const Language language = workspace.index.language;
    workspaces_[{key, language}] = std::make_unique<Workspace>(std::move(workspace));
}

const Workspace& WorkspaceCache::get(const EvalTask& task) {
    const std::string key = std::filesystem::weakly_canonical(std::filesystem::absolute(task.repo_path)).string();
    auto found = workspaces_.find({key, task.language});
    if (found != workspaces_.end()) return *found->second;
    RepoIndex index = index_repository(task.repo_path, task.language, index_options_);
    VectorIndex vindex = build_vector_index(index, embedder_, vector_options_);
    auto& slot = workspaces_[{key, task.language}];
    slot = std::make_unique<Workspace>(Workspace{std::move(index), std::move(vindex)});
    return *slot;
}

EvalReport run_eval(const std::vector<EvalTask>& tasks, const WorkspaceLookup& workspaces, Embedder& embedder,
                    LlmClient& llm, const EvalConfig& config) {
    std::vector<TaskRecord> records;
    PipelineConfig pipeline_config = config.pipeline;
    pipeline_config.fallback_entity_match = true;

    for (const EvalTask& task : tasks) {
        if (config.mode_filter && task.mode != *config.mode_filter) continue;
        const Workspace& ws = workspaces(task);
        if (ws.index.functions_named(task.expected_call).empty()) {
            throw TaskSchemaError(task.line, "expected_call `" + task.expected_call + "` is not in the index");
        }
        const std::string content = read_text(task.repo_path / task.context_file);
        if (task.cursor && *task.cursor > content.size()) {
            throw TaskSchemaError(task.line, "cursor is past the end of " + task.context_file);
        }
        const std::string_view context_text =
            task.cursor ? std::string_view(content).substr(0, *task.cursor) : std::string_view(content);

        TaskRecord record;
        record.id = task.id;
        record.mode = task.mode;
        record.language = task.language;
        Pipeline pipeline(ws.index, ws.vindex, embedder, llm, pipeline_config);
        try {
            CompletionResult result =
                task.mode == CompletionMode::Token
                    ? pipeline.complete_token(task.context_file, content, *task.cursor)
                    : pipeline.complete_query(*task.query, std::string_view(task.context_file),
                                              task.cursor ? std::optional<std::string_view>(context_text)
                                                          : std::nullopt);
            record.predicted_text = result.response.text;
            record.latency_ms = result.response.latency_ms;
            record.from_cache = result.response.from_cache;
            PredictedCall call = parse_predicted_call(result.response.text, task.language);
            record.predicted_callee = call.callee;
            record.call_match = score_call(call.callee, task, ws.index, context_text);
            record.arg_match = record.call_match && score_arguments(call.arguments, task);
        } catch (const ServiceError&) {
            throw;
        } catch (const AuthError&) {
            throw;
        } catch (const BudgetExceededError&) {
            throw;
        } catch (const IoError&) {
            throw;
        } catch (const Error& e) {
            record.error = e.what();
        }
        records.push_back(std::move(record));
    }

    EvalReport report = summarize(std::move(records), config.include_cached_latency);
    report.config = config.snapshot;
    report.config["k"] = std::to_string(config.pipeline.k);
    report.config["token_budget"] = std::to_string(config.pipeline.token_budget);
    report.config["llm"] = llm.id();
    report.config["embedder"] = embedder.id();
    report.config["temperature"] = format_number(llm.temperature());
    report.config["mode"] = config.mode_filter ? std::string(to_string(*config.mode_filter)) : "all";
    report.config["latency_includes_cache_hits"] = config.include_cached_latency ? "true" : "false";
    report.generated_at = config.generated_at ? *config.generated_at : utc_timestamp();
    return report;
}

std::string report_json(const EvalReport& report) {
    nlohmann::ordered_json out;
    out["config"] = report.config;
    out["aggregates"] = row_json(report.aggregates);
    out["table"] = nlohmann::ordered_json::array();
    for (const MetricRow& row : report.table) out["table"].push_back(row_json(row));
    out["tasks"] = nlohmann::ordered_json::array();
    for (const TaskRecord& r : report.tasks) {
        nlohmann::ordered_json t;
        t["id"] = r.id;
        t["language"] = std::string(to_string(r.language));
        t["mode"] = std::string(to_string(r.mode));
        t["predicted_text"] = r.predicted_text;
        t["predicted_call"] = r.predicted_callee;
        t["call_match"] = r.call_match;
        t["arg_match"] = r.arg_match;
        t["latency_ms"] = r.latency_ms;
        t["cached"] = r.from_cache;
        if (r.error) {
            t["error"] = *r.error;
        } else {
            t["error"] = nullptr;
        }
        out["tasks"].push_back(std::move(t));
    }
    out["generated_at"] = report.generated_at;
    return out.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

std::string report_csv(const EvalReport& report) {
    std::string out = "id,language,mode,call_match,arg_match,latency_ms,cached,predicted_text,error\n";
    for (const TaskRecord& r : report.tasks) {
        out += csv_field(r.id) + ',' + std::string(to_string(r.language)) + ',' + std::string(to_string(r.mode)) + ',' +
               (r.call_match ? "true" : "false") + ',' + (r.arg_match ? "true" : "false") + ',' +
               std::to_string(r.latency_ms) + ',' + (r.from_cache ? "true" : "false") + ',' +
               csv_field(r.predicted_text) + ',' + csv_field(r.error.value_or("")) + '\n';
    }
    return out;
}

std::string report_summary_line(const EvalReport& report) {
    return "call=" + format_number(report.aggregates.call_accuracy_pct) +
           "% args=" + format_number(report.aggregates.argument_matching_pct) +
           "% latency=" + format_number(report.aggregates.inference_time_ms) + "ms";
}

}  // namespace lancekit
