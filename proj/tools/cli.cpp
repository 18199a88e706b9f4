#include "cli.hpp"

#include "lancekit/errors.hpp"
#include "lancekit/eval_harness.hpp"
#include "lancekit/extractor.hpp"
#include "lancekit/pipeline.hpp"
#include "lancekit/remote_embedder.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

namespace lancekit::cli {

namespace {

namespace fs = std::filesystem;

/// Settings shared by every command. Defaults give fully offline behavior.
struct RunConfig {
    std::string language;
    std::string embedder = "hash";
    std::string llm = "mock";
    std::size_t k = kDefaultCandidates;
    std::size_t budget = kDefaultTokenBudget;
    std::string cache_dir = ".lancekit-cache";
    std::vector<std::string> exclude;
    std::string templates;
    std::string model;
    std::size_t max_calls = 0;
};

struct IndexArgs {
    std::string root;
    std::string out;
    unsigned threads = 0;
    std::string created_at;
    bool embed_signatures = false;
};

struct CompleteArgs {
    std::string index;
    std::string file;
    std::string cursor;
    std::string query;
    bool explain = false;
    bool fallback = false;
};

struct EvalArgs {
    std::string index;
    std::string tasks;
    std::string mode = "all";
    std::string report;
    std::string csv;
    std::string generated_at;
    bool include_cached_latency = false;
};

struct InspectArgs {
    std::string index;
    std::string entity;
};

class UsageError : public Error {
public:
    using Error::Error;
};

std::string sidecar_path(const std::string& index_path) { return index_path + ".vec"; }

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("cannot write " + path.string());
}

Language language_from(const std::string& name) {
    auto language = parse_language(name);
    if (!language) throw UnsupportedLanguageError("unsupported language `" + name + "`");
    return *language;
}

std::unique_ptr<Embedder> make_embedder(const RunConfig& config) {
    if (config.embedder == "hash") return std::make_unique<HashEmbedder>();
    if (config.embedder == "remote") {
        RemoteEmbedderConfig remote = RemoteEmbedderConfig::from_env();
        remote.cache_dir = config.cache_dir;
        return std::make_unique<RemoteEmbedder>(remote);
    }
    throw UsageError("unknown embedder `" + config.embedder + "` (hash or remote)");
}

std::unique_ptr<LlmClient> make_llm(const RunConfig& config) {
    if (config.llm == "mock") return std::make_unique<MockLlm>();
    if (config.llm == "remote") {
        ChatClientConfig remote = ChatClientConfig::from_env();
        remote.cache_dir = config.cache_dir;
        if (!config.model.empty()) remote.model = config.model;
        if (config.max_calls > 0) remote.max_calls = config.max_calls;
        return std::make_unique<RemoteChatClient>(remote);
    }
    throw UsageError("unknown llm `" + config.llm + "` (mock or remote)");
}

PipelineConfig pipeline_config(const RunConfig& config, bool fallback) {
    PipelineConfig out;
    out.k = config.k;
    out.token_budget = config.budget;
    out.fallback_entity_match = fallback;
    if (!config.templates.empty()) out.template_dir = config.templates;
    return out;
}

/// Loaded index plus its vector sidecar, rebuilt when missing or made by another embedder.
struct LoadedWorkspace {
    RepoIndex index;
    std::optional<VectorIndex> vindex;
};

LoadedWorkspace load_workspace(const std::string& index_path, Embedder& embedder) {
    LoadedWorkspace ws{load_index(index_path), std::nullopt};
    const fs::path sidecar = sidecar_path(index_path);
    if (fs::exists(sidecar)) {
        VectorIndex stored = VectorIndex::load(sidecar);
        if (stored.embedder_id() == embedder.id() && stored.dimension() == embedder.dimension()) {
            ws.vindex = std::move(stored);
        }
    }
    if (!ws.vindex) ws.vindex = build_vector_index(ws.index, embedder);
    return ws;
}

/// Repo-relative form of `file`: taken as is when it exists under the root,
/// otherwise treated as a path on disk inside the root.
std::string repo_relative(const RepoIndex& index, const std::string& file) {
    const fs::path root(index.repo_root);
    if (fs::path(file).is_relative() && fs::exists(root / file)) return fs::path(file).lexically_normal().generic_string();
    if (!fs::exists(file)) throw IoError("no such file: " + file);
    const fs::path relative = fs::relative(fs::weakly_canonical(file), fs::weakly_canonical(root));
    if (relative.empty() || *relative.begin() == "..") throw UsageError(file + " is outside " + index.repo_root);
    return relative.generic_string();
}

/// Byte offset from `N` or 1-based `LINE:COL`.
std::size_t cursor_offset(std::string_view content, const std::string& cursor) {
    auto number = [&](std::string_view text) {
        std::size_t value = 0;
        if (text.empty()) throw UsageError("bad cursor `" + cursor + "`");
        for (char c : text) {
            if (c < '0' || c > '9') throw UsageError("bad cursor `" + cursor + "`");
            value = value * 10 + static_cast<std::size_t>(c - '0');
        }
        return value;
    };
    std::size_t offset = 0;
    if (auto colon = cursor.find(':'); colon != std::string::npos) {
        const std::size_t line = number(std::string_view(cursor).substr(0, colon));
        const std::size_t column = number(std::string_view(cursor).substr(colon + 1));
        if (line == 0 || column == 0) throw UsageError("cursor lines and columns start at 1");
        std::size_t start = 0;
        for (std::size_t l = 1; l < line; ++l) {
            start = content.find('\n', start);
            if (start == std::string_view::npos) throw UsageError("cursor line " + std::to_string(line) + " is past the end");
            ++start;
        }
        offset = start + column - 1;
    } else {
        offset = number(cursor);
    }
    if (offset > content.size()) throw UsageError("cursor " + cursor + " is past the end of the file");
    return offset;
}

std::string format_score(const Candidate& c) {
    if (!c.scored) return "-";
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.6f", c.score);
    return buffer;
}

void print_explain(const CompletionContext& context, Language language, std::ostream& out) {
    out << "mode: " << to_string(context.mode) << (context.degraded ? " (entity match fallback)" : "") << '\n';
    if (context.resolved_module) out << "module: " << *context.resolved_module << '\n';
    if (!context.local_cues.empty()) {
        out << "cues:";
        for (const std::string& cue : context.local_cues) out << ' ' << cue;
        out << '\n';
    }
    out << "rank\tscore\tkey\tsignature\n";
    std::size_t rank = 1;
    for (const Candidate& c : context.candidates) {
        std::string signature = render_signature(c.function, language);
        if (auto nl = signature.find('\n'); nl != std::string::npos) signature.resize(nl);
        out << rank++ << '\t' << format_score(c) << '\t' << c.key << '\t' << signature << '\n';
    }
}

int cmd_index(const RunConfig& config, const IndexArgs& args, std::ostream& out, std::ostream& err) {
    const Language language = language_from(config.language);
    if (!fs::is_directory(args.root)) throw IoError("repository root " + args.root + " is not a directory");
    IndexOptions options;
    options.exclude_globs = config.exclude;
    options.threads = args.threads;
    if (!args.created_at.empty()) options.created_at = args.created_at;
    options.on_skip = [&](const std::string& line) { err << "skipped: " << line << '\n'; };

    const fs::path root = fs::weakly_canonical(fs::absolute(args.root));
    RepoIndex index = index_repository(root, language, options);
    auto embedder = make_embedder(config);
    VectorIndex vindex = build_vector_index(index, *embedder, VectorIndexOptions{args.embed_signatures});
    save_index(index, args.out);
    vindex.save(sidecar_path(args.out));

    out << "functions: " << index.functions.size() << '\n'
        << "entities: " << index.entities.size() << '\n'
        << "imports: " << index.import_count() << '\n'
        << "skipped files: " << index.skipped_files.size() << '\n';
    for (const EntityRecord& entity : index.entities) {
        out << "  " << entity.name << ": " << entity.methods.size() << " functions\n";
    }
    out << "wrote " << args.out << " and " << sidecar_path(args.out) << '\n';
    return kExitOk;
}

int cmd_complete(const RunConfig& config, const CompleteArgs& args, bool token_mode, std::ostream& out) {
    auto embedder = make_embedder(config);
    auto llm = make_llm(config);
    LoadedWorkspace ws = load_workspace(args.index, *embedder);
    Pipeline pipeline(ws.index, *ws.vindex, *embedder, *llm, pipeline_config(config, args.fallback));

    CompletionResult result;
    if (token_mode) {
        if (args.file.empty() || args.cursor.empty()) throw UsageError("token completion needs --file and --cursor");
        const std::string file = repo_relative(ws.index, args.file);
        const std::string content = read_file(fs::path(ws.index.repo_root) / file);
        result = pipeline.complete_token(file, content, cursor_offset(content, args.cursor));
    } else {
        if (args.query.empty()) throw UsageError("query completion needs --query");
        std::optional<std::string> file;
        std::string content;
        std::optional<std::string_view> prefix;
        if (!args.file.empty()) {
            file = repo_relative(ws.index, args.file);
            content = read_file(fs::path(ws.index.repo_root) / *file);
            if (!args.cursor.empty()) prefix = std::string_view(content).substr(0, cursor_offset(content, args.cursor));
        } else if (!args.cursor.empty()) {
            throw UsageError("--cursor needs --file");
        }
        result = pipeline.complete_query(args.query, file ? std::optional<std::string_view>(*file) : std::nullopt,
                                         prefix);
    }
    if (args.explain) print_explain(result.context, ws.index.language, out);
    out << result.response.text << '\n';
    return kExitOk;
}

int cmd_eval(const RunConfig& config, const EvalArgs& args, std::ostream& out) {
    EvalConfig eval;
    eval.pipeline = pipeline_config(config, true);
    if (args.mode != "all") {
        auto mode = parse_completion_mode(args.mode);
        if (!mode) throw UsageError("--mode must be token, conversational or all");
        eval.mode_filter = *mode;
    }
    eval.include_cached_latency = args.include_cached_latency;
    if (!args.generated_at.empty()) eval.generated_at = args.generated_at;
    eval.snapshot["tasks_file"] = fs::path(args.tasks).filename().string();
    eval.snapshot["budget"] = std::to_string(config.budget);

    const std::vector<EvalTask> tasks = load_tasks(args.tasks);
    auto embedder = make_embedder(config);
    auto llm = make_llm(config);
    IndexOptions index_options;
    index_options.exclude_globs = config.exclude;
    WorkspaceCache cache(*embedder, index_options);
    if (!args.index.empty()) {
        LoadedWorkspace ws = load_workspace(args.index, *embedder);
        const std::string root = ws.index.repo_root;
        cache.preload(root, Workspace{std::move(ws.index), std::move(*ws.vindex)});
    }
    EvalReport report = run_eval(
        tasks, [&](const EvalTask& task) -> const Workspace& { return cache.get(task); }, *embedder, *llm, eval);
    write_file(args.report, report_json(report));
    if (!args.csv.empty()) write_file(args.csv, report_csv(report));
    out << "tasks: " << report.tasks.size() << '\n' << report_summary_line(report) << '\n';
    return kExitOk;
}

int cmd_inspect(const InspectArgs& args, std::ostream& out) {
    const RepoIndex index = load_index(args.index);
    if (args.entity.empty()) {
        out << "root: " << index.repo_root << '\n'
            << "language: " << to_string(index.language) << '\n'
            << "functions: " << index.functions.size() << '\n'
            << "entities: " << index.entities.size() << '\n'
            << "imports: " << index.import_count() << '\n';
        for (const EntityRecord& entity : index.entities) {
            out << "  " << entity.name << " (" << to_string(entity.kind) << ", " << entity.file
                << "): " << entity.methods.size() << " functions\n";
        }
        return kExitOk;
    }
    const EntityRecord* entity = index.find_entity(args.entity);
    if (!entity) throw UsageError("no entity `" + args.entity + "` in the index");
    for (const ApiFunction* fn : index.methods_of(*entity)) {
        out << to_string(fn->visibility) << '\t' << render_signature(*fn, index.language) << '\n';
    }
    return kExitOk;
}

void add_run_options(CLI::App& command, RunConfig& config, bool with_language) {
    if (with_language) {
        command.add_option("--lang", config.language, "Source language: python or java")->required();
        command.add_option("--exclude", config.exclude, "fnmatch pattern of paths to skip (repeatable)");
    }
    command.add_option("--embedder", config.embedder, "Embedding backend: hash or remote")->capture_default_str();
    command.add_option("--cache-dir", config.cache_dir, "Response and embedding cache directory")
        ->capture_default_str();
}

void add_model_options(CLI::App& command, RunConfig& config) {
    command.add_option("--llm", config.llm, "Language model backend: mock or remote")->capture_default_str();
    command.add_option("--model", config.model, "Remote model name");
    command.add_option("--max-calls", config.max_calls, "Cap on remote model calls (0 = none)");
    command.add_option("--k", config.k, "Ranked candidates offered to the model")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    command.add_option("--budget", config.budget, "Prompt token budget")->capture_default_str()->check(
        CLI::PositiveNumber);
    command.add_option("--templates", config.templates, "Directory overriding the built-in prompt templates");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Repository-aware API completion toolkit", "lancekit"};
    app.set_config("--config", "", "TOML/INI file with option defaults; command-line flags win");
    app.require_subcommand(1);

    RunConfig config;
    IndexArgs index_args;
    CompleteArgs complete_args;
    EvalArgs eval_args;
    InspectArgs inspect_args;

    CLI::App* index = app.add_subcommand("index", "Extract APIs from a repository and write an index");
    index->add_option("root", index_args.root, "Repository root")->required();
    index->add_option("--out", index_args.out, "Index file to write (vectors go to <out>.vec)")->required();
    index->add_option("--threads", index_args.threads, "Parser threads (0 = all cores)");
    index->add_option("--created-at", index_args.created_at, "Fixed creation timestamp");
    index->add_flag("--embed-signatures", index_args.embed_signatures, "Embed parameter types with names");
    add_run_options(*index, config, true);

    CLI::App* complete = app.add_subcommand("complete", "Predict an API call");
    complete->require_subcommand(1);
    CLI::App* token = complete->add_subcommand("token", "Complete the member call after `receiver.`");
    CLI::App* query = complete->add_subcommand("query", "Answer a natural-language request with a call");
    for (CLI::App* mode : {token, query}) {
        mode->add_option("--index", complete_args.index, "Index file")->required();
        mode->add_option("--file", complete_args.file, "Edited file, repo-relative or on disk");
        mode->add_option("--cursor", complete_args.cursor, "Byte offset or LINE:COL in --file");
        mode->add_flag("--explain", complete_args.explain, "Print the ranked candidates with scores");
        add_run_options(*mode, config, false);
        add_model_options(*mode, config);
    }
    token->add_flag("--fallback-entity-match", complete_args.fallback,
                    "Match entities on the receiver text when it does not resolve");
    query->add_option("--query", complete_args.query, "Developer request")->required();

    CLI::App* eval = app.add_subcommand("eval", "Score completions against a task file");
    eval->add_option("--index", eval_args.index, "Prebuilt index for the task repository");
    eval->add_option("--tasks", eval_args.tasks, "Task file, one JSON record per line")->required();
    eval->add_option("--mode", eval_args.mode, "token, conversational or all")->capture_default_str();
    eval->add_option("--report", eval_args.report, "Report file to write")->required();
    eval->add_option("--csv", eval_args.csv, "Also write per-task rows as CSV");
    eval->add_option("--generated-at", eval_args.generated_at, "Fixed report timestamp");
    eval->add_flag("--include-cached-latency", eval_args.include_cached_latency,
                   "Count cached responses in the latency mean");
    eval->add_option("--exclude", config.exclude, "fnmatch pattern skipped when indexing task repositories");
    add_run_options(*eval, config, false);
    add_model_options(*eval, config);

    CLI::App* inspect = app.add_subcommand("inspect", "Summarize an index or list an entity's functions");
    inspect->add_option("--index", inspect_args.index, "Index file")->required();
    inspect->add_option("--entity", inspect_args.entity, "Entity whose functions to list");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitData;
    }

    try {
        if (index->parsed()) return cmd_index(config, index_args, out, err);
        if (token->parsed()) return cmd_complete(config, complete_args, true, out);
        if (query->parsed()) return cmd_complete(config, complete_args, false, out);
        if (eval->parsed()) return cmd_eval(config, eval_args, out);
        if (inspect->parsed()) return cmd_inspect(inspect_args, out);
    } catch (const ServiceError& e) {
        err << "error: " << e.what() << '\n';
        return kExitService;
    } catch (const AuthError& e) {
        err << "error: " << e.what() << '\n';
        return kExitService;
    } catch (const BudgetExceededError& e) {
        err << "error: " << e.what() << '\n';
        return kExitService;
    } catch (const UnresolvedReceiverError& e) {
        err << "error: " << e.what() << "\nhint: --fallback-entity-match ranks entities by the receiver name\n";
        return kExitData;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitData;
}

}  // namespace lancekit::cli
