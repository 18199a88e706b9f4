#include "lancekit/vector_index.hpp"

#include "lancekit/errors.hpp"
#include "lancekit/simd/dot.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

namespace lancekit {

namespace {

constexpr char kMagic[4] = {'L', 'K', 'V', 'I'};
constexpr std::uint32_t kSidecarVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw IoError("vector index file is truncated");
    return value;
}

void write_string(std::ostream& out, const std::string& s) {
    write_pod(out, static_cast<std::uint64_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    auto size = read_pod<std::uint64_t>(in);
    if (size > (1u << 20)) throw IoError("vector index file is corrupt");
    std::string s(size, '\0');
    if (!in.read(s.data(), static_cast<std::streamsize>(size))) throw IoError("vector index file is truncated");
    return s;
}

template <typename E>
[[noreturn]] void rethrow_as(const E& e, const std::string& key) {
    throw E("while embedding \"" + key + "\": " + e.what());
}

// Keeps the error class intact so callers can still dispatch on it.
template <typename Fn>
EmbeddingVector embed_named(Fn&& fn, const std::string& key) {
    try {
        return fn();
    } catch (const AuthError& e) {
        rethrow_as(e, key);
    } catch (const BudgetExceededError& e) {
        rethrow_as(e, key);
    } catch (const ServiceError& e) {
        rethrow_as(e, key);
    } catch (const EmptyTextError& e) {
        rethrow_as(e, key);
    } catch (const InvalidVectorError& e) {
        rethrow_as(e, key);
    } catch (const DimensionMismatchError& e) {
        rethrow_as(e, key);
    } catch (const IoError& e) {
        rethrow_as(e, key);
    }
}

}  // namespace

std::string_view to_string(PayloadKind kind) { return kind == PayloadKind::Function ? "function" : "entity"; }

double quantize_similarity(double similarity) {
    double q = std::round(similarity / kSimilarityGrid) * kSimilarityGrid;
    return std::clamp(q, -1.0, 1.0);
}

bool ranks_before(const ScoredKey& a, const ScoredKey& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.key != b.key) return a.key < b.key;
    return a.kind < b.kind;
}

VectorIndex::VectorIndex(std::string embedder_id, std::size_t dimension)
    : embedder_id_(std::move(embedder_id)), dimension_(dimension) {
    if (dimension_ == 0) throw DimensionMismatchError("vector index dimension must be positive");
}

void VectorIndex::add(std::string key, PayloadKind kind, std::size_t source, std::span<const double> vector) {
    if (vector.size() != dimension_) {
        throw DimensionMismatchError("vector for \"" + key + "\" has dimension " + std::to_string(vector.size()) +
                                     ", index expects " + std::to_string(dimension_));
    }
    const double norm = l2_norm(vector);
    if (!std::isfinite(norm) || std::abs(norm - 1.0) >= kUnitTolerance) {
        throw InvalidVectorError("vector for \"" + key + "\" is not unit length");
    }
    auto& keys = kind == PayloadKind::Function ? function_keys_ : entity_keys_;
    if (keys.count(key)) throw Error("duplicate " + std::string(to_string(kind)) + " key \"" + key + "\"");
    keys.emplace(key, entries_.size());
    entries_.push_back(IndexEntry{std::move(key), kind, source});
    matrix_.insert(matrix_.end(), vector.begin(), vector.end());
}

std::size_t VectorIndex::count(PayloadKind kind) const {
    return kind == PayloadKind::Function ? function_keys_.size() : entity_keys_.size();
}

std::span<const double> VectorIndex::vector(std::size_t entry) const {
    return std::span<const double>(matrix_).subspan(entry * dimension_, dimension_);
}

std::optional<std::size_t> VectorIndex::find(std::string_view key, PayloadKind kind) const {
    const auto& keys = kind == PayloadKind::Function ? function_keys_ : entity_keys_;
    auto it = keys.find(std::string(key));
    if (it == keys.end()) return std::nullopt;
    return it->second;
}

std::vector<ScoredKey> VectorIndex::query_topk(std::span<const double> probe, std::size_t k,
                                               std::optional<PayloadKind> filter) const {
    if (k == 0) throw Error("query_topk needs k >= 1");
    if (probe.size() != dimension_) {
        throw DimensionMismatchError("probe has dimension " + std::to_string(probe.size()) + ", index expects " +
                                     std::to_string(dimension_));
    }
    std::vector<double> scores(entries_.size());
    simd::dot_rows(matrix_.data(), entries_.size(), dimension_, probe.data(), scores.data());

    std::vector<ScoredKey> hits;
    hits.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (filter && entries_[i].kind != *filter) continue;
        hits.push_back(ScoredKey{entries_[i].key, entries_[i].kind, quantize_similarity(scores[i]), i});
    }
    const std::size_t keep = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), ranks_before);
    hits.resize(keep);
    return hits;
}

double VectorIndex::similarity(std::size_t entry, std::span<const double> probe) const {
    if (probe.size() != dimension_) {
        throw DimensionMismatchError("probe has dimension " + std::to_string(probe.size()) + ", index expects " +
                                     std::to_string(dimension_));
    }
    double score = 0.0;
    simd::dot_rows(vector(entry).data(), 1, dimension_, probe.data(), &score);
    return quantize_similarity(score);
}

void VectorIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(kMagic, sizeof kMagic);
    write_pod(out, kSidecarVersion);
    write_pod(out, static_cast<std::uint64_t>(dimension_));
    write_pod(out, static_cast<std::uint64_t>(entries_.size()));
    write_string(out, embedder_id_);
    for (const IndexEntry& e : entries_) {
        write_string(out, e.key);
        write_pod(out, static_cast<std::uint8_t>(e.kind));
        write_pod(out, static_cast<std::uint64_t>(e.source));
    }
    out.write(reinterpret_cast<const char*>(matrix_.data()),
              static_cast<std::streamsize>(matrix_.size() * sizeof(double)));
    if (!out) throw IoError("failed writing " + path.string());
}

VectorIndex VectorIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    char magic[4];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
        throw IoError(path.string() + " is not a vector index file");
    }
    if (read_pod<std::uint32_t>(in) != kSidecarVersion) throw IoError(path.string() + ": unsupported version");
    const auto dimension = read_pod<std::uint64_t>(in);
    const auto count = read_pod<std::uint64_t>(in);
    VectorIndex index(read_string(in), dimension);
    std::vector<IndexEntry> entries;
    for (std::uint64_t i = 0; i < count; ++i) {
        IndexEntry e;
        e.key = read_string(in);
        const auto kind = read_pod<std::uint8_t>(in);
        if (kind > 1) throw IoError(path.string() + ": bad payload kind");
        e.kind = static_cast<PayloadKind>(kind);
        e.source = read_pod<std::uint64_t>(in);
        entries.push_back(std::move(e));
    }
    std::vector<double> row(dimension);
    for (IndexEntry& e : entries) {
        if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(dimension * sizeof(double)))) {
            throw IoError("vector index file is truncated");
        }
        index.add(std::move(e.key), e.kind, e.source, row);
    }
    return index;
}

std::vector<std::string> function_keys(const RepoIndex& index) {
    std::map<std::string, std::size_t> totals;
    for (const ApiFunction& fn : index.functions) ++totals[fn.qualified_name()];
    std::map<std::string, std::size_t> seen;
    std::vector<std::string> keys;
    keys.reserve(index.functions.size());
    for (const ApiFunction& fn : index.functions) {
        std::string name = fn.qualified_name();
        if (totals[name] > 1) name += "#" + std::to_string(++seen[name]);
        keys.push_back(std::move(name));
    }
    return keys;
}

std::string embedding_text(const ApiFunction& fn, bool with_signature) {
    std::string text = fn.qualified_name();
    if (!with_signature) return text;
    text += '(';
    for (std::size_t i = 0; i < fn.parameters.size(); ++i) {
        if (i) text += ", ";
        text += fn.parameters[i].name;
        if (fn.parameters[i].declared_type) text += ": " + *fn.parameters[i].declared_type;
    }
    text += ')';
    if (fn.return_type) text += " -> " + *fn.return_type;
    return text;
}

VectorIndex build_vector_index(const RepoIndex& index, Embedder& embedder, const VectorIndexOptions& options) {
    if (index.functions.empty() && index.entities.empty()) throw EmptyRepoError("nothing to embed: index is empty");

    struct Pending {
        std::string key;
        PayloadKind kind;
        std::size_t source;
        std::string text;
    };
    std::vector<Pending> pending;
    const std::vector<std::string> keys = function_keys(index);
    for (std::size_t i = 0; i < index.functions.size(); ++i) {
        pending.push_back({keys[i], PayloadKind::Function, i, embedding_text(index.functions[i], options.embed_signatures)});
    }
    for (std::size_t i = 0; i < index.entities.size(); ++i) {
        pending.push_back({index.entities[i].name, PayloadKind::Entity, i, index.entities[i].name});
    }

    std::optional<VectorIndex> vindex;
    if (embedder.dimension() > 0) vindex.emplace(embedder.id(), embedder.dimension());
    for (Pending& p : pending) {
        EmbeddingVector v = embed_named([&] { return embedder.embed(p.text); }, p.key);
        if (!vindex) vindex.emplace(embedder.id(), v.size());
        vindex->add(std::move(p.key), p.kind, p.source, v);
    }
    return std::move(*vindex);
}

}  // namespace lancekit
