#pragma once

#include "lancekit/disk_cache.hpp"
#include "lancekit/http_client.hpp"
#include "lancekit/prompt_builder.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>

namespace lancekit {

struct LlmResponse {
    std::string text;
    std::int64_t latency_ms = 0;
    std::string backend_id;
    bool from_cache = false;
};

class LlmClient {
public:
    virtual ~LlmClient() = default;
    virtual std::string id() const = 0;
    virtual double temperature() const { return 0.0; }
    virtual bool is_mock() const { return false; }
    virtual LlmResponse complete(const PromptBundle& bundle) = 0;
};

/// Offline client: answers with the top-ranked call, arguments named after
/// the candidate's own parameters.
class MockLlm final : public LlmClient {
public:
    std::string id() const override { return "mock"; }
    bool is_mock() const override { return true; }
    /// Throws EmptyContextError when the bundle offers no call.
    LlmResponse complete(const PromptBundle& bundle) override;
};

/// Spaces calls at least `1 / rate` seconds apart across threads.
class RateLimiter {
public:
    explicit RateLimiter(double requests_per_second);
    void acquire();

private:
    std::mutex mutex_;
    std::chrono::steady_clock::duration interval_;
    std::chrono::steady_clock::time_point next_;
};

struct ChatClientConfig {
    std::string url;
    std::optional<std::string> key;
    std::string model = "gpt-4-0613";
    double temperature = 0.0;
    std::filesystem::path cache_dir = ".lancekit-cache";
    /// Network calls allowed for this client; nullopt means unlimited.
    std::optional<std::size_t> max_calls;
    double requests_per_second = 2.0;
    RetryPolicy retry;
    std::chrono::seconds timeout{120};

    /// Endpoint and key from LANCEKIT_LLM_URL / LANCEKIT_LLM_KEY.
    static ChatClientConfig from_env();
};

/// Chat-completion client. Request `{model, temperature, messages}`, reply
/// `{choices: [{message: {content}}]}`. Replies are cached on disk keyed by
/// backend id and prompt hash; cache hits keep the original latency.
class RemoteChatClient final : public LlmClient {
public:
    explicit RemoteChatClient(ChatClientConfig config, HttpPost transport = {});

    std::string id() const override { return config_.model; }
    double temperature() const override { return config_.temperature; }
    LlmResponse complete(const PromptBundle& bundle) override;

    std::size_t network_calls() const noexcept { return network_calls_.load(); }
    /// Request body that `complete` would send.
    std::string request_body(const PromptBundle& bundle) const;

private:
    ChatClientConfig config_;
    HttpPost transport_;
    DiskCache cache_;
    RateLimiter limiter_;
    std::atomic<std::size_t> network_calls_{0};
};

/// Cache key for a prompt: FNV-1a of system and user text.
std::string prompt_hash(const PromptBundle& bundle);

}  // namespace lancekit
