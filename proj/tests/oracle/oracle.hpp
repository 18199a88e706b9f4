#pragma once

// Reference implementations written separately from the library: codepoint
// decoding instead of byte scanning, long double arithmetic, no SIMD, full sort.

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace oracle {

using Vector = std::array<long double, 256>;

/// Feature-hashed embedding of `text`, unit length. Empty when the text has no letters.
std::vector<long double> embed(std::string_view text);

long double cosine(const std::vector<long double>& a, const std::vector<long double>& b);

/// Cosine rounded to the nine-decimal grid the library ranks on.
long double grid(long double similarity);

struct Ranked {
    std::string key;
    long double score;
};

/// Keys ranked against `probe_text`: score descending, then key ascending.
/// Each item is (key, text embedded for that key).
std::vector<Ranked> rank(std::string_view probe_text, const std::vector<std::pair<std::string, std::string>>& items);

/// Same ordering over ready-made vectors.
std::vector<Ranked> rank_vectors(const std::vector<long double>& probe,
                                 const std::vector<std::pair<std::string, std::vector<long double>>>& items);

/// `file<TAB>owner.name` lines; `#` starts a comment line.
std::set<std::pair<std::string, std::string>> read_manifest(const std::filesystem::path& path);

}  // namespace oracle
