#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lancekit {

/// L2-normalized vector. Stored vectors satisfy | ||v|| - 1 | < kUnitTolerance.
using EmbeddingVector = std::vector<double>;

inline constexpr double kUnitTolerance = 1e-6;
inline constexpr std::size_t kHashDimension = 256;

std::uint64_t fnv1a64(std::string_view bytes);

/// Lowercased pieces of `text`, split on `_`, `.`, digits, any other
/// non-letter, and lower-to-upper camel boundaries. Bytes >= 0x80 count as
/// letters so UTF-8 names stay whole.
std::vector<std::string> subtokens(std::string_view text);

/// Each subtoken followed by its codepoint trigrams.
std::vector<std::string> hash_features(std::string_view text);

/// Signed bucket counts before normalization; unsigned counts when the
/// signed ones cancel to all zeros.
std::vector<std::int64_t> hash_accumulator(std::string_view text);

/// Feature-hashing embedding of dimension kHashDimension. Throws
/// EmptyTextError when `text` has no subtokens.
EmbeddingVector embed_hash(std::string_view text);

/// Unit-length copy of `values`. Throws InvalidVectorError on zero or
/// non-finite input.
EmbeddingVector normalized(std::span<const double> values);

double l2_norm(std::span<const double> values);
double cosine(std::span<const double> a, std::span<const double> b);

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string id() const = 0;
    /// 0 when not known until the first embedding.
    virtual std::size_t dimension() const = 0;
    virtual EmbeddingVector embed(std::string_view text) = 0;
};

class HashEmbedder final : public Embedder {
public:
    std::string id() const override { return "hash-fnv1a-d256"; }
    std::size_t dimension() const override { return kHashDimension; }
    EmbeddingVector embed(std::string_view text) override { return embed_hash(text); }
};

}  // namespace lancekit
