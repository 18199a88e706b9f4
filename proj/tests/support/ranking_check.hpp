#pragma once

#include "lancekit/embedding.hpp"
#include "lancekit/eval_harness.hpp"
#include "lancekit/repo_model.hpp"
#include "lancekit/vector_index.hpp"

#include <string>
#include <vector>

namespace fixtures {

/// `identifier = receiver.` inside `module`.
struct TokenProbe {
    std::string module;
    std::string receiver;
    std::string identifier;
};

/// Outcome of comparing library rankings against the reference ranking.
struct RankingCheck {
    std::size_t sites = 0;
    std::vector<std::string> mismatches;
};

/// Ranks each probe with the library and with the reference implementation
/// and records every site where order or grid score differs.
RankingCheck check_token_sites(const lancekit::RepoIndex& index, const lancekit::VectorIndex& vindex,
                               lancekit::Embedder& embedder, const std::vector<TokenProbe>& probes);

/// Same for conversational queries: entity ranking, then the operation
/// ranking over the winning entity's functions.
RankingCheck check_query_sites(const lancekit::RepoIndex& index, const lancekit::VectorIndex& vindex,
                               lancekit::Embedder& embedder, const std::vector<std::string>& queries);

/// Both checks applied to the completion sites of fixture tasks.
RankingCheck check_task_sites(const lancekit::RepoIndex& index, const lancekit::VectorIndex& vindex,
                              lancekit::Embedder& embedder, const std::vector<lancekit::EvalTask>& tasks);

std::vector<TokenProbe> python_token_probes();
std::vector<TokenProbe> java_token_probes();
std::vector<std::string> python_queries();
std::vector<std::string> java_queries();

}  // namespace fixtures
