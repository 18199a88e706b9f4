#include "fixtures.hpp"
#include "scripted_transport.hpp"

#include "lancekit/context_engine.hpp"
#include "lancekit/errors.hpp"
#include "lancekit/llm_gateway.hpp"

#include <doctest.h>
#include <json.hpp>

#include <thread>

using namespace lancekit;

namespace {

PromptBundle bundle_with(std::vector<CallTemplate> calls) {
    PromptBundle bundle;
    bundle.system_text = "sys";
    bundle.user_text = "user";
    bundle.calls = std::move(calls);
    bundle.candidate_count = bundle.calls.size();
    return bundle;
}

}  // namespace

TEST_CASE("mock answers with the first offered call") {
    MockLlm mock;
    CHECK(mock.is_mock());
    CHECK(mock.id() == "mock");
    CHECK(mock.temperature() == 0.0);
    const PromptBundle bundle = bundle_with({CallTemplate{"tp", "sentiment_analysis", {"text"}},
                                            CallTemplate{"tp", "count_words", {"text"}}});
    const LlmResponse first = mock.complete(bundle);
    CHECK(first.text == "tp.sentiment_analysis(text)");
    CHECK(first.backend_id == "mock");
    CHECK_FALSE(first.from_cache);
    for (int i = 0; i < 50; ++i) CHECK(mock.complete(bundle).text == first.text);
    CHECK(mock.complete(bundle_with({CallTemplate{"", "f", {}}})).text == "f()");
    CHECK_THROWS_AS(mock.complete(bundle_with({})), EmptyContextError);
}

TEST_CASE("prompt hash covers both texts and is stable") {
    PromptBundle a = bundle_with({});
    PromptBundle b = a;
    CHECK(prompt_hash(a) == prompt_hash(b));
    CHECK(prompt_hash(a).size() == 16);
    b.user_text += " ";
    CHECK(prompt_hash(a) != prompt_hash(b));
    PromptBundle shifted = a;
    shifted.system_text = "sysu";
    shifted.user_text = "ser";
    CHECK(prompt_hash(a) != prompt_hash(shifted));
}

TEST_CASE("rate limiter spaces calls") {
    RateLimiter limiter(50.0);
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::thread> threads;
    for (int t = 0; t < 3; ++t) {
        threads.emplace_back([&] {
            for (int i = 0; i < 2; ++i) limiter.acquire();
        });
    }
    for (auto& thread : threads) thread.join();
    const auto elapsed = std::chrono::steady_clock::now() - start;
    // Six slots at 20 ms spacing: the last starts 100 ms after the first.
    CHECK(elapsed >= std::chrono::milliseconds(95));
    RateLimiter unlimited(0.0);
    const auto quick = std::chrono::steady_clock::now();
    for (int i = 0; i < 1000; ++i) unlimited.acquire();
    CHECK(std::chrono::steady_clock::now() - quick < std::chrono::seconds(1));
}

TEST_CASE("chat client reads its endpoint from the environment") {
    ::setenv("LANCEKIT_LLM_URL", "http://chat.invalid/v1", 1);
    ::setenv("LANCEKIT_LLM_KEY", "", 1);
    ChatClientConfig config = ChatClientConfig::from_env();
    CHECK(config.url == "http://chat.invalid/v1");
    CHECK_FALSE(config.key.has_value());
    ::setenv("LANCEKIT_LLM_KEY", "k", 1);
    CHECK(ChatClientConfig::from_env().key == std::optional<std::string>("k"));
    ::unsetenv("LANCEKIT_LLM_URL");
    ::unsetenv("LANCEKIT_LLM_KEY");
}

TEST_CASE("chat client serves a repeated prompt from disk") {
    fixtures::TempDir dir;
    fixtures::ScriptedTransport service{{HttpResponse{200, R"j({"choices":[{"message":{"content":"tp.f(x)"}}]})j", ""}}};
    ChatClientConfig config;
    config.url = "http://chat.invalid";
    config.key = "k";
    config.cache_dir = dir.path();
    config.requests_per_second = 0.0;
    const PromptBundle bundle = bundle_with({});
    {
        RemoteChatClient client(config, service.bind());
        CHECK_FALSE(client.complete(bundle).from_cache);
        CHECK(client.complete(bundle).from_cache);
        CHECK(client.network_calls() == 1);
    }
    RemoteChatClient fresh(config, service.bind());
    const LlmResponse replay = fresh.complete(bundle);
    CHECK(replay.from_cache);
    CHECK(replay.text == "tp.f(x)");
    CHECK(fresh.network_calls() == 0);
    CHECK(service.bodies.size() == 1);
    const auto body = nlohmann::json::parse(service.bodies.front());
    CHECK(body["messages"].size() == 2);
    CHECK(body["temperature"] == 0.0);
}
