#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace lancekit {

/// Content-addressed string store. One file per (namespace, key); the key is
/// stored alongside the value and checked on read, so hash collisions miss
/// instead of returning the wrong value. Writers serialize on a lock file and
/// publish with an atomic rename.
class DiskCache {
public:
    explicit DiskCache(std::filesystem::path directory);

    std::optional<std::string> get(std::string_view space, std::string_view key) const;
    void put(std::string_view space, std::string_view key, std::string_view value) const;

    std::filesystem::path path_for(std::string_view space, std::string_view key) const;
    const std::filesystem::path& directory() const noexcept { return directory_; }

private:
    std::filesystem::path directory_;
};

}  // namespace lancekit
