#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace oracle {

namespace {

std::u32string decode(std::string_view utf8) {
    std::u32string out;
    std::size_t i = 0;
    while (i < utf8.size()) {
        const auto lead = static_cast<unsigned char>(utf8[i]);
        int extra = lead < 0x80 ? 0 : lead >= 0xF0 ? 3 : lead >= 0xE0 ? 2 : lead >= 0xC0 ? 1 : 0;
        char32_t cp = extra == 0 ? lead : lead & (0x3F >> extra);
        ++i;
        for (int n = 0; n < extra && i < utf8.size(); ++n, ++i) {
            cp = (cp << 6) | (static_cast<unsigned char>(utf8[i]) & 0x3F);
        }
        out.push_back(cp);
    }
    return out;
}

std::string encode(const std::u32string& text) {
    std::string out;
    for (char32_t cp : text) {
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
    }
    return out;
}

bool ascii_lower(char32_t c) { return c >= U'a' && c <= U'z'; }
bool ascii_upper(char32_t c) { return c >= U'A' && c <= U'Z'; }
bool letter(char32_t c) { return ascii_lower(c) || ascii_upper(c) || c >= 0x80; }

std::vector<std::u32string> words(std::string_view text) {
    const std::u32string cps = decode(text);
    std::vector<std::u32string> out;
    std::u32string word;
    auto flush = [&] {
        if (!word.empty()) out.push_back(word);
        word.clear();
    };
    for (std::size_t i = 0; i < cps.size(); ++i) {
        const char32_t c = cps[i];
        if (!letter(c)) {
            flush();
            continue;
        }
        if (ascii_upper(c) && i > 0 && ascii_lower(cps[i - 1])) flush();
        word.push_back(ascii_upper(c) ? c + 32 : c);
    }
    flush();
    return out;
}

std::uint64_t fnv(const std::string& bytes) {
    std::uint64_t state = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        state = (state ^ static_cast<unsigned char>(bytes[i])) * 0x100000001b3ULL;
    }
    return state;
}

}  // namespace

std::vector<long double> embed(std::string_view text) {
    std::vector<long double> v(256, 0.0L);
    std::vector<std::uint64_t> hashes;
    for (const std::u32string& word : words(text)) {
        std::vector<std::string> features{encode(word)};
        for (std::size_t i = 0; i + 3 <= word.size(); ++i) features.push_back(encode(word.substr(i, 3)));
        for (const std::string& f : features) hashes.push_back(fnv(f));
    }
    if (hashes.empty()) return {};
    for (std::uint64_t h : hashes) v[h % 256] += (h & 0x8000000000000000ULL) ? -1.0L : 1.0L;
    long double norm = 0.0L;
    for (long double x : v) norm += x * x;
    if (norm == 0.0L) {
        // Signs cancelled everywhere; fall back to plain counts.
        for (std::uint64_t h : hashes) v[h % 256] += 1.0L;
        for (long double x : v) norm += x * x;
    }
    norm = std::sqrt(norm);
    for (long double& x : v) x /= norm;
    return v;
}

long double cosine(const std::vector<long double>& a, const std::vector<long double>& b) {
    if (a.size() != b.size() || a.empty()) throw std::invalid_argument("cosine of mismatched vectors");
    long double dot = 0.0L;
    long double na = 0.0L;
    long double nb = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

long double grid(long double similarity) {
    const long double q = std::round(similarity * 1.0e9L) / 1.0e9L;
    return std::clamp(q, -1.0L, 1.0L);
}

std::vector<Ranked> rank_vectors(const std::vector<long double>& probe,
                                 const std::vector<std::pair<std::string, std::vector<long double>>>& items) {
    std::vector<Ranked> out;
    for (const auto& [key, vec] : items) out.push_back(Ranked{key, grid(cosine(probe, vec))});
    std::sort(out.begin(), out.end(), [](const Ranked& a, const Ranked& b) {
        return a.score != b.score ? a.score > b.score : a.key < b.key;
    });
    return out;
}

std::vector<Ranked> rank(std::string_view probe_text, const std::vector<std::pair<std::string, std::string>>& items) {
    std::vector<std::pair<std::string, std::vector<long double>>> vectors;
    for (const auto& [key, text] : items) vectors.emplace_back(key, embed(text));
    return rank_vectors(embed(probe_text), vectors);
}

std::set<std::pair<std::string, std::string>> read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing manifest " + path.string());
    std::set<std::pair<std::string, std::string>> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw std::runtime_error("bad manifest line: " + line);
        out.emplace(line.substr(0, tab), line.substr(tab + 1));
    }
    return out;
}

}  // namespace oracle
