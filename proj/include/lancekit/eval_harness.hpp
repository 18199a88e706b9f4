#pragma once

#include "lancekit/extractor.hpp"
#include "lancekit/pipeline.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lancekit {

struct EvalTask {
    std::string id;
    CompletionMode mode = CompletionMode::Token;
    std::string repo_ref;
    Language language = Language::Python;
    /// Relative to the repository root.
    std::string context_file;
    std::optional<std::size_t> cursor;
    std::optional<std::string> query;
    /// Qualified `owner.name` of the function the completion should call.
    std::string expected_call;
    std::vector<std::string> expected_args;
    std::vector<std::vector<std::string>> accepted_arg_variants;

    /// Repository root: `repo_ref` resolved against the task file's directory.
    std::filesystem::path repo_path;
    /// 1-based line of the record in the task file.
    std::size_t line = 0;
};

/// One JSON object per line; blank lines are ignored. Every problem is a
/// TaskSchemaError naming its line; an empty file is one too.
std::vector<EvalTask> parse_tasks(std::string_view text, const std::filesystem::path& base_dir);
std::vector<EvalTask> load_tasks(const std::filesystem::path& path);

struct PredictedCall {
    std::string callee;
    std::vector<std::string> arguments;
};

/// First call expression in model output, after removing code fences.
/// Throws NoCallFoundError.
PredictedCall parse_predicted_call(std::string_view text, Language language);

/// Fully qualified function a callee expression names from `file`, using its
/// imports and the typed variables visible in `content`. Returns the callee
/// unchanged when it cannot be resolved.
std::string qualify_callee(std::string_view callee, const RepoIndex& index, std::string_view file,
                           std::string_view content);

/// Whether the prediction names the expected function, arguments ignored.
bool score_call(std::string_view predicted_callee, const EvalTask& task, const RepoIndex& index,
                std::string_view context_text = {});

/// Whitespace collapsed, enclosing parentheses removed.
std::string normalize_argument(std::string_view argument);

/// Whether the arguments equal the expected list or an accepted variant.
bool score_arguments(const std::vector<std::string>& predicted, const EvalTask& task);

/// 100 * matched / total rounded to one decimal; 0 when total is 0.
double percentage(std::size_t matched, std::size_t total);

struct TaskRecord {
    std::string id;
    CompletionMode mode = CompletionMode::Token;
    Language language = Language::Python;
    std::string predicted_text;
    std::string predicted_callee;
    bool call_match = false;
    bool arg_match = false;
    std::int64_t latency_ms = 0;
    bool from_cache = false;
    std::optional<std::string> error;
};

struct MetricRow {
    std::optional<Language> language;
    std::optional<CompletionMode> mode;
    std::size_t tasks = 0;
    std::size_t call_matches = 0;
    std::size_t arg_matches = 0;
    double call_accuracy_pct = 0.0;
    double argument_matching_pct = 0.0;
    /// Mean latency of the counted tasks, one decimal.
    double inference_time_ms = 0.0;
};

struct EvalReport {
    std::vector<TaskRecord> tasks;  // sorted by id
    MetricRow aggregates;
    /// One row per (language, mode) present.
    std::vector<MetricRow> table;
    std::map<std::string, std::string> config;
    std::string generated_at;
};

/// Builds aggregates and table rows. Argument credit counts only for tasks
/// whose call matched. Cached responses are left out of latency unless asked.
EvalReport summarize(std::vector<TaskRecord> records, bool include_cached_latency = false);

struct EvalConfig {
    PipelineConfig pipeline;
    std::optional<CompletionMode> mode_filter;
    bool include_cached_latency = false;
    std::map<std::string, std::string> snapshot;
    /// Fixed report timestamp; current UTC time when empty.
    std::optional<std::string> generated_at;
};

struct Workspace {
    RepoIndex index;
    VectorIndex vindex;
};

/// Indexed repository a task runs against.
using WorkspaceLookup = std::function<const Workspace&(const EvalTask&)>;

/// Indexes each (repository, language) once, on first use.
class WorkspaceCache {
public:
    WorkspaceCache(Embedder& embedder, IndexOptions index_options = {}, VectorIndexOptions vector_options = {});
    const Workspace& get(const EvalTask& task);
    /// Serves `workspace` for tasks in its language whose repository is `root`.
    void preload(const std::filesystem::path& root, Workspace workspace);

private:
    Embedder& embedder_;
    IndexOptions index_options_;
    VectorIndexOptions vector_options_;
    std::map<std::pair<std::string, Language>, std::unique_ptr<Workspace>> workspaces_;
};

/// Runs every task through the pipeline and scores it. Per-task failures
/// (unparseable output, unresolvable site, ...) score false and are recorded;
/// infrastructure errors (service, auth, budget, I/O) abort the run.
EvalReport run_eval(const std::vector<EvalTask>& tasks, const WorkspaceLookup& workspaces, Embedder& embedder,
                    LlmClient& llm, const EvalConfig& config);

std::string report_json(const EvalReport& report);
std::string report_csv(const EvalReport& report);

/// `call=X% args=Y% latency=Zms`
std::string report_summary_line(const EvalReport& report);

}  // namespace lancekit
