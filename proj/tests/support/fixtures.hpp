#pragma once

#include "lancekit/embedding.hpp"
#include "lancekit/extractor.hpp"
#include "lancekit/vector_index.hpp"

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fixtures {

inline std::filesystem::path root() { return LANCEKIT_FIXTURE_DIR; }
inline std::filesystem::path python_repo() { return root() / "python_hotel"; }
inline std::filesystem::path java_repo() { return root() / "java_hotel"; }
inline std::filesystem::path tasks(const std::string& name) { return root() / "tasks" / name; }

inline constexpr const char* kPythonMain = "hotel_management_system.py";
inline constexpr const char* kJavaMain = "src/com/hotel/HotelManagementSystem.java";

inline std::string read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline lancekit::IndexOptions fixed_options() {
    lancekit::IndexOptions options;
    options.created_at = "2000-01-01T00:00:00Z";
    return options;
}

inline const lancekit::RepoIndex& python_index() {
    static const lancekit::RepoIndex index =
        lancekit::index_repository(python_repo(), lancekit::Language::Python, fixed_options());
    return index;
}

inline const lancekit::RepoIndex& java_index() {
    static const lancekit::RepoIndex index =
        lancekit::index_repository(java_repo(), lancekit::Language::Java, fixed_options());
    return index;
}

inline lancekit::HashEmbedder& hash_embedder() {
    static lancekit::HashEmbedder embedder;
    return embedder;
}

inline const lancekit::VectorIndex& python_vectors() {
    static const lancekit::VectorIndex vindex = lancekit::build_vector_index(python_index(), hash_embedder());
    return vindex;
}

inline const lancekit::VectorIndex& java_vectors() {
    static const lancekit::VectorIndex vindex = lancekit::build_vector_index(java_index(), hash_embedder());
    return vindex;
}

/// Byte offset just past `after`, searched from the start of the line holding `anchor`.
inline std::size_t offset_after(const std::string& content, const std::string& anchor, const std::string& after) {
    std::size_t at = content.find(anchor);
    if (at == std::string::npos) throw std::runtime_error("anchor not found: " + anchor);
    const std::size_t line = content.rfind('\n', at);
    const std::size_t start = line == std::string::npos ? 0 : line + 1;
    return content.find(after, start) + after.size();
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("lancekit-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace fixtures
