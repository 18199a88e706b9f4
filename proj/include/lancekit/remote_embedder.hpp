#pragma once

#include "lancekit/disk_cache.hpp"
#include "lancekit/embedding.hpp"
#include "lancekit/http_client.hpp"

#include <atomic>
#include <optional>
#include <string>

namespace lancekit {

struct RemoteEmbedderConfig {
    std::string url;
    std::optional<std::string> key;
    std::string model = "text-embedding-ada-002";
    std::filesystem::path cache_dir = ".lancekit-cache";
    RetryPolicy retry;
    std::chrono::seconds timeout{60};

    /// Endpoint and key from LANCEKIT_EMBED_URL / LANCEKIT_EMBED_KEY.
    static RemoteEmbedderConfig from_env();
};

/// Embedding service client. Request `{model, input}`; accepts either
/// `{embedding: [...]}` or `{data: [{embedding: [...]}]}`. Every vector is
/// cached on disk under (model, text) and returned normalized.
class RemoteEmbedder final : public Embedder {
public:
    explicit RemoteEmbedder(RemoteEmbedderConfig config, HttpPost transport = {});

    std::string id() const override { return "remote:" + config_.model; }
    std::size_t dimension() const override { return dimension_; }
    EmbeddingVector embed(std::string_view text) override;

    std::size_t network_calls() const noexcept { return network_calls_.load(); }

private:
    RemoteEmbedderConfig config_;
    HttpPost transport_;
    DiskCache cache_;
    std::size_t dimension_ = 0;
    std::atomic<std::size_t> network_calls_{0};
};

}  // namespace lancekit
