#pragma once

#include "lancekit/embedding.hpp"
#include "lancekit/repo_model.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <unordered_map>
#include <string>
#include <vector>

namespace lancekit {

enum class PayloadKind { Function, Entity };

std::string_view to_string(PayloadKind kind);

struct IndexEntry {
    std::string key;
    PayloadKind kind = PayloadKind::Function;
    /// Position in RepoIndex::functions or RepoIndex::entities.
    std::size_t source = 0;

    bool operator==(const IndexEntry&) const = default;
};

struct ScoredKey {
    std::string key;
    PayloadKind kind = PayloadKind::Function;
    double similarity = 0.0;
    std::size_t entry = 0;  // position in VectorIndex::entries()
};

/// Similarities are snapped to this grid before ranking so that equal scores
/// compare equal regardless of summation order.
inline constexpr double kSimilarityGrid = 1e-9;
double quantize_similarity(double similarity);

/// True when `a` ranks before `b`: higher similarity first, then key ascending.
bool ranks_before(const ScoredKey& a, const ScoredKey& b);

/// Exhaustive-scan cosine index over unit vectors. Immutable once built;
/// concurrent queries are safe.
class VectorIndex {
public:
    VectorIndex(std::string embedder_id, std::size_t dimension);

    /// Throws DimensionMismatchError, InvalidVectorError (not unit length) or
    /// Error (duplicate key for the kind).
    void add(std::string key, PayloadKind kind, std::size_t source, std::span<const double> vector);

    const std::string& embedder_id() const noexcept { return embedder_id_; }
    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return entries_.size(); }
    std::size_t count(PayloadKind kind) const;
    const std::vector<IndexEntry>& entries() const noexcept { return entries_; }
    std::span<const double> vector(std::size_t entry) const;
    std::optional<std::size_t> find(std::string_view key, PayloadKind kind) const;

    /// Top `k` entries by cosine similarity to `probe` (a unit vector). Throws
    /// DimensionMismatchError, or Error when k is 0.
    std::vector<ScoredKey> query_topk(std::span<const double> probe, std::size_t k,
                                      std::optional<PayloadKind> filter = std::nullopt) const;

    /// Quantized similarity between one stored entry and `probe`.
    double similarity(std::size_t entry, std::span<const double> probe) const;

    /// Binary sidecar, native byte order.
    void save(const std::filesystem::path& path) const;
    static VectorIndex load(const std::filesystem::path& path);

    bool operator==(const VectorIndex&) const = default;

private:
    std::string embedder_id_;
    std::size_t dimension_;
    std::vector<IndexEntry> entries_;
    std::vector<double> matrix_;  // row-major, one row per entry
    std::unordered_map<std::string, std::size_t> function_keys_;
    std::unordered_map<std::string, std::size_t> entity_keys_;
};

struct VectorIndexOptions {
    /// Embed `owner.name(param types)` instead of the bare qualified name.
    bool embed_signatures = false;
};

/// Keys for RepoIndex::functions, in the same order. Qualified names shared by
/// overloads get `#1`, `#2`, ... in declaration order.
std::vector<std::string> function_keys(const RepoIndex& index);

/// Text handed to the embedder for a function.
std::string embedding_text(const ApiFunction& fn, bool with_signature);

/// One entry per function and per entity. Embedder failures are rethrown with
/// the offending key in the message, keeping the original error type.
VectorIndex build_vector_index(const RepoIndex& index, Embedder& embedder, const VectorIndexOptions& options = {});

}  // namespace lancekit
