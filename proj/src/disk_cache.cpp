#include "lancekit/disk_cache.hpp"

#include "lancekit/embedding.hpp"
#include "lancekit/errors.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace lancekit {

namespace {

std::string cache_id(std::string_view space, std::string_view key) {
    std::string joined(space);
    joined.push_back('\0');
    joined.append(key);
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(joined)));
    return hex;
}

class FileLock {
public:
    explicit FileLock(const std::filesystem::path& path) : fd_(::open(path.c_str(), O_CREAT | O_RDWR, 0644)) {
        if (fd_ < 0) throw IoError("cannot open lock file " + path.string());
        ::flock(fd_, LOCK_EX);
    }
    ~FileLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_;
};

}  // namespace

DiskCache::DiskCache(std::filesystem::path directory) : directory_(std::move(directory)) {
    std::error_code ec;
    std::filesystem::create_directories(directory_, ec);
    if (ec) throw IoError("cannot create cache directory " + directory_.string() + ": " + ec.message());
}

std::filesystem::path DiskCache::path_for(std::string_view space, std::string_view key) const {
    return directory_ / (cache_id(space, key) + ".json");
}

std::optional<std::string> DiskCache::get(std::string_view space, std::string_view key) const {
    std::ifstream in(path_for(space, key));
    if (!in) return std::nullopt;
    std::stringstream buffer;
    buffer << in.rdbuf();
    nlohmann::json record = nlohmann::json::parse(buffer.str(), nullptr, false);
    if (record.is_discarded() || !record.is_object()) return std::nullopt;
    if (record.value("space", "") != space || record.value("key", "") != key) return std::nullopt;
    if (!record.contains("value") || !record["value"].is_string()) return std::nullopt;
    return record["value"].get<std::string>();
}

void DiskCache::put(std::string_view space, std::string_view key, std::string_view value) const {
    nlohmann::ordered_json record;
    record["space"] = space;
    record["key"] = key;
    record["value"] = value;
    const std::filesystem::path target = path_for(space, key);
    FileLock lock(directory_ / ".lock");
    const std::filesystem::path temp = target.string() + ".tmp";
    {
        std::ofstream out(temp, std::ios::trunc);
        if (!out) throw IoError("cannot write " + temp.string());
        out << record.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
        if (!out) throw IoError("failed writing " + temp.string());
    }
    std::error_code ec;
    std::filesystem::rename(temp, target, ec);
    if (ec) throw IoError("cannot publish cache entry " + target.string() + ": " + ec.message());
}

}  // namespace lancekit
