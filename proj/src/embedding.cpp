#include "lancekit/embedding.hpp"

#include "lancekit/errors.hpp"
#include "lancekit/simd/dot.hpp"

#include <algorithm>
#include <cmath>

namespace lancekit {

namespace {

bool is_letter(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

bool is_lower(unsigned char c) { return c >= 'a' && c <= 'z'; }
bool is_upper(unsigned char c) { return c >= 'A' && c <= 'Z'; }

// Byte offsets at which UTF-8 codepoints start.
std::vector<std::size_t> codepoint_starts(std::string_view s) {
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) starts.push_back(i);
    }
    return starts;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<std::string> subtokens(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    unsigned char previous = 0;
    for (unsigned char c : text) {
        if (!is_letter(c)) {
            if (!current.empty()) out.push_back(std::move(current));
            current.clear();
            previous = 0;
            continue;
        }
        if (is_upper(c) && is_lower(previous) && !current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
        current.push_back(is_upper(c) ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
        previous = c;
    }
    if (!current.empty()) out.push_back(std::move(current));
    return out;
}

std::vector<std::string> hash_features(std::string_view text) {
    std::vector<std::string> features;
    for (const std::string& token : subtokens(text)) {
        features.push_back(token);
        std::vector<std::size_t> starts = codepoint_starts(token);
        starts.push_back(token.size());
        for (std::size_t i = 0; i + 3 < starts.size(); ++i) {
            features.push_back(token.substr(starts[i], starts[i + 3] - starts[i]));
        }
    }
    return features;
}

std::vector<std::int64_t> hash_accumulator(std::string_view text) {
    const std::vector<std::string> features = hash_features(text);
    std::vector<std::int64_t> acc(kHashDimension, 0);
    for (const std::string& feature : features) {
        const std::uint64_t h = fnv1a64(feature);
        acc[h % kHashDimension] += (h >> 63) ? -1 : 1;
    }
    if (std::any_of(acc.begin(), acc.end(), [](std::int64_t v) { return v != 0; })) return acc;
    // Every bucket cancelled: count features unsigned instead.
    for (const std::string& feature : features) ++acc[fnv1a64(feature) % kHashDimension];
    return acc;
}

EmbeddingVector embed_hash(std::string_view text) {
    if (subtokens(text).empty()) throw EmptyTextError("nothing to embed in \"" + std::string(text) + "\"");
    const std::vector<std::int64_t> acc = hash_accumulator(text);
    std::vector<double> values(acc.begin(), acc.end());
    return normalized(values);
}

double l2_norm(std::span<const double> values) {
    double sum = 0.0;
    for (double v : values) sum += v * v;
    return std::sqrt(sum);
}

EmbeddingVector normalized(std::span<const double> values) {
    for (double v : values) {
        if (!std::isfinite(v)) throw InvalidVectorError("vector has a non-finite component");
    }
    const double norm = l2_norm(values);
    if (norm == 0.0) throw InvalidVectorError("cannot normalize a zero vector");
    EmbeddingVector out(values.begin(), values.end());
    for (double& v : out) v /= norm;
    return out;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionMismatchError("dimensions differ: " + std::to_string(a.size()) + " vs " +
                                     std::to_string(b.size()));
    }
    const double na = l2_norm(a);
    const double nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0) throw InvalidVectorError("cosine of a zero vector");
    return simd::dot(a.data(), b.data(), a.size()) / (na * nb);
}

}  // namespace lancekit
