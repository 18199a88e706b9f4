#include "lancekit/llm_gateway.hpp"

#include "lancekit/embedding.hpp"
#include "lancekit/errors.hpp"

#include <cstdio>
#include <json.hpp>
#include <thread>

namespace lancekit {

LlmResponse MockLlm::complete(const PromptBundle& bundle) {
    if (bundle.calls.empty()) throw EmptyContextError("the prompt offers no candidate call");
    return LlmResponse{bundle.calls.front().render(), 0, id(), false};
}

RateLimiter::RateLimiter(double requests_per_second)
    : interval_(requests_per_second > 0
                    ? std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(1.0 / requests_per_second))
                    : std::chrono::steady_clock::duration::zero()),
      next_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lock(mutex_);
        const auto now = std::chrono::steady_clock::now();
        slot = std::max(now, next_);
        next_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
}

ChatClientConfig ChatClientConfig::from_env() {
    ChatClientConfig config;
    config.url = env_value("LANCEKIT_LLM_URL").value_or("");
    config.key = env_value("LANCEKIT_LLM_KEY");
    return config;
}

std::string prompt_hash(const PromptBundle& bundle) {
    std::string joined = bundle.system_text;
    joined.push_back('\0');
    joined += bundle.user_text;
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(joined)));
    return hex;
}

RemoteChatClient::RemoteChatClient(ChatClientConfig config, HttpPost transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      cache_(config_.cache_dir),
      limiter_(config_.requests_per_second) {
    if (!transport_) {
        const auto timeout = config_.timeout;
        transport_ = [timeout](const std::string& url, const std::string& body, const HttpHeaders& headers) {
            return http_post_json(url, body, headers, timeout);
        };
    }
}

std::string RemoteChatClient::request_body(const PromptBundle& bundle) const {
    nlohmann::ordered_json messages = nlohmann::ordered_json::array();
    if (!bundle.system_text.empty()) messages.push_back({{"role", "system"}, {"content", bundle.system_text}});
    messages.push_back({{"role", "user"}, {"content", bundle.user_text}});
    nlohmann::ordered_json body{{"model", config_.model}, {"temperature", config_.temperature}, {"messages", messages}};
    return body.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

LlmResponse RemoteChatClient::complete(const PromptBundle& bundle) {
    if (bundle.user_text.empty()) throw EmptyContextError("empty prompt");
    const std::string space = "chat:" + id();
    const std::string key = prompt_hash(bundle);
    if (auto cached = cache_.get(space, key)) {
        nlohmann::json record = nlohmann::json::parse(*cached, nullptr, false);
        if (record.is_object() && record.contains("text") && record["text"].is_string()) {
            return LlmResponse{record["text"].get<std::string>(), record.value("latency_ms", std::int64_t{0}), id(),
                               true};
        }
    }
    if (config_.max_calls && network_calls_.load() >= *config_.max_calls) {
        throw BudgetExceededError("model call budget of " + std::to_string(*config_.max_calls) + " is used up");
    }
    if (!config_.key) throw AuthError("LANCEKIT_LLM_KEY is not set");
    if (config_.url.empty()) throw ServiceError("LANCEKIT_LLM_URL is not set");

    limiter_.acquire();
    ++network_calls_;
    const auto started = std::chrono::steady_clock::now();
    HttpHeaders headers{{"Authorization", "Bearer " + *config_.key}};
    HttpResponse response = post_with_retry(transport_, config_.url, request_body(bundle), headers, config_.retry);
    const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);

    nlohmann::json reply = nlohmann::json::parse(response.body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object() || !reply.contains("choices") || !reply["choices"].is_array() ||
        reply["choices"].empty()) {
        throw ServiceError("chat response has no choices");
    }
    const auto& message = reply["choices"][0]["message"];
    if (!message.is_object() || !message.contains("content") || !message["content"].is_string()) {
        throw ServiceError("chat response has no message content");
    }
    LlmResponse result{message["content"].get<std::string>(), std::max<std::int64_t>(0, latency.count()), id(), false};
    nlohmann::ordered_json record{{"text", result.text}, {"latency_ms", result.latency_ms}};
    cache_.put(space, key, record.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
    return result;
}

}  // namespace lancekit
