#include "fixtures.hpp"
#include "scripted_transport.hpp"

#include "lancekit/disk_cache.hpp"
#include "lancekit/errors.hpp"
#include "lancekit/http_client.hpp"
#include "lancekit/llm_gateway.hpp"
#include "lancekit/remote_embedder.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <cmath>
#include <thread>

using namespace lancekit;
using nlohmann::json;
using fixtures::ScriptedTransport;

namespace {

RetryPolicy fast_retry() { return RetryPolicy{3, std::chrono::milliseconds(1), 2.0}; }

/// Local HTTP server on an ephemeral port.
class LocalServer {
public:
    explicit LocalServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server_.Post(".*", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LocalServer() {
        server_.stop();
        thread_.join();
    }
    std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

PromptBundle bundle(const std::string& user) {
    PromptBundle b;
    b.system_text = "system";
    b.user_text = user;
    b.candidate_count = 1;
    b.calls.push_back(CallTemplate{"tp", "tokenize", {"text"}});
    return b;
}

}  // namespace

TEST_CASE("disk cache stores per namespace and survives reopening") {
    fixtures::TempDir dir;
    {
        DiskCache cache(dir.path() / "c");
        CHECK_FALSE(cache.get("a", "k").has_value());
        cache.put("a", "k", "value one");
        cache.put("b", "k", "value two");
    }
    DiskCache cache(dir.path() / "c");
    CHECK(cache.get("a", "k") == "value one");
    CHECK(cache.get("b", "k") == "value two");
    fixtures::write(cache.path_for("a", "k"), "{corrupt");
    CHECK_FALSE(cache.get("a", "k").has_value());
}

TEST_CASE("disk cache tolerates concurrent writers") {
    fixtures::TempDir dir;
    DiskCache cache(dir.path());
    std::vector<std::thread> writers;
    for (int t = 0; t < 4; ++t) {
        writers.emplace_back([&cache, t] {
            for (int i = 0; i < 25; ++i) cache.put("ns", "key" + std::to_string(i), "v" + std::to_string(t));
        });
    }
    for (auto& w : writers) w.join();
    for (int i = 0; i < 25; ++i) CHECK(cache.get("ns", "key" + std::to_string(i)).has_value());
}

TEST_CASE("retry policy") {
    ScriptedTransport flaky{{HttpResponse{503, "", ""}, HttpResponse{0, "", "refused"}, HttpResponse{200, "ok", ""}}};
    CHECK(post_with_retry(flaky.bind(), "u", "{}", {}, fast_retry()).body == "ok");
    CHECK(flaky.bodies.size() == 3);

    ScriptedTransport down{{HttpResponse{500, "", ""}}};
    CHECK_THROWS_AS(post_with_retry(down.bind(), "u", "{}", {}, fast_retry()), ServiceError);
    CHECK(down.bodies.size() == 3);

    ScriptedTransport denied{{HttpResponse{401, "", ""}}};
    CHECK_THROWS_AS(post_with_retry(denied.bind(), "u", "{}", {}, fast_retry()), AuthError);
    CHECK(denied.bodies.size() == 1);

    ScriptedTransport bad{{HttpResponse{400, "", ""}}};
    CHECK_THROWS_AS(post_with_retry(bad.bind(), "u", "{}", {}, fast_retry()), ServiceError);
    CHECK(bad.bodies.size() == 1);
}

TEST_CASE("remote embedder normalizes, caches and needs a key") {
    fixtures::TempDir dir;
    ScriptedTransport service{{HttpResponse{200, R"({"embedding":[3.0, 4.0]})", ""}}};
    RemoteEmbedderConfig config;
    config.url = "http://embed.invalid/v1";
    config.key = "secret";
    config.cache_dir = dir.path();
    config.retry = fast_retry();
    RemoteEmbedder embedder(config, service.bind());
    const EmbeddingVector v = embedder.embed("payment");
    REQUIRE(v.size() == 2);
    CHECK(v[0] == doctest::Approx(0.6));
    CHECK(std::fabs(l2_norm(v) - 1.0) < kUnitTolerance);
    CHECK(embedder.network_calls() == 1);
    const json request = json::parse(service.bodies.at(0));
    CHECK(request["model"] == "text-embedding-ada-002");
    CHECK(request["input"] == "payment");

    RemoteEmbedderConfig offline = config;
    offline.key.reset();
    offline.url.clear();
    RemoteEmbedder cached(offline, service.bind());
    CHECK(cached.embed("payment") == v);
    CHECK(cached.network_calls() == 0);
    CHECK_THROWS_AS(cached.embed("something else"), AuthError);
    CHECK(service.bodies.size() == 1);
}

TEST_CASE("remote embedder accepts the list response shape") {
    fixtures::TempDir dir;
    ScriptedTransport service{{HttpResponse{200, R"({"data":[{"embedding":[0.0, 2.0]}]})", ""}}};
    RemoteEmbedderConfig config;
    config.url = "http://embed.invalid";
    config.key = "k";
    config.cache_dir = dir.path();
    RemoteEmbedder embedder(config, service.bind());
    CHECK(embedder.embed("x") == EmbeddingVector{0.0, 1.0});
    CHECK(embedder.dimension() == 2);
}

TEST_CASE("chat client: request shape, caching and budget") {
    fixtures::TempDir dir;
    ScriptedTransport service{{HttpResponse{200, R"j({"choices":[{"message":{"content":"tp.tokenize(text)"}}]})j", ""}}};
    ChatClientConfig config;
    config.url = "http://chat.invalid";
    config.key = "k";
    config.cache_dir = dir.path();
    config.retry = fast_retry();
    config.requests_per_second = 0;
    RemoteChatClient client(config, service.bind());
    CHECK(client.temperature() == 0.0);
    const LlmResponse first = client.complete(bundle("complete this"));
    CHECK(first.text == "tp.tokenize(text)");
    CHECK_FALSE(first.from_cache);
    CHECK(first.latency_ms >= 0);
    CHECK(first.backend_id == "gpt-4-0613");

    const json request = json::parse(service.bodies.at(0));
    CHECK(request["model"] == "gpt-4-0613");
    CHECK(request["temperature"] == 0.0);
    REQUIRE(request["messages"].size() == 2);
    CHECK(request["messages"][0]["role"] == "system");
    CHECK(request["messages"][1]["content"] == "complete this");

    ChatClientConfig no_budget = config;
    no_budget.max_calls = 0;
    RemoteChatClient replay(no_budget, service.bind());
    const LlmResponse again = replay.complete(bundle("complete this"));
    CHECK(again.text == first.text);
    CHECK(again.latency_ms == first.latency_ms);
    CHECK(again.from_cache);
    CHECK(replay.network_calls() == 0);
    CHECK_THROWS_AS(replay.complete(bundle("a new prompt")), BudgetExceededError);
    CHECK(service.bodies.size() == 1);

    ChatClientConfig keyless = config;
    keyless.key.reset();
    RemoteChatClient unauthorized(keyless, service.bind());
    CHECK_THROWS_AS(unauthorized.complete(bundle("another prompt")), AuthError);
}

TEST_CASE("chat client rejects malformed replies") {
    fixtures::TempDir dir;
    ScriptedTransport service{{HttpResponse{200, R"({"unexpected":true})", ""}}};
    ChatClientConfig config;
    config.url = "http://chat.invalid";
    config.key = "k";
    config.cache_dir = dir.path();
    config.requests_per_second = 0;
    RemoteChatClient client(config, service.bind());
    CHECK_THROWS_AS(client.complete(bundle("x")), ServiceError);
}

TEST_CASE("clients talk to a real HTTP endpoint") {
    std::atomic<int> hits{0};
    std::string auth;
    LocalServer server([&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        auth = req.get_header_value("Authorization");
        if (req.path == "/embed") {
            res.set_content(R"({"embedding":[1.0, 1.0, 0.0]})", "application/json");
        } else if (hits == 2) {
            res.status = 503;
        } else {
            res.set_content(R"j({"choices":[{"message":{"content":"pp.refund_payment(transaction_id)"}}]})j",
                            "application/json");
        }
    });
    fixtures::TempDir dir;
    RemoteEmbedderConfig embed_config;
    embed_config.url = server.url("/embed");
    embed_config.key = "ek";
    embed_config.cache_dir = dir.path();
    RemoteEmbedder embedder(embed_config);
    const EmbeddingVector v = embedder.embed("refund");
    CHECK(v[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(auth == "Bearer ek");

    ChatClientConfig chat_config;
    chat_config.url = server.url("/chat");
    chat_config.key = "ck";
    chat_config.cache_dir = dir.path();
    chat_config.retry = fast_retry();
    chat_config.requests_per_second = 0;
    RemoteChatClient chat(chat_config);
    CHECK(chat.complete(bundle("refund it")).text == "pp.refund_payment(transaction_id)");
    CHECK(hits == 3);
    CHECK(chat.network_calls() == 1);
}

TEST_CASE("unreachable endpoint is a service error") {
    ChatClientConfig config;
    config.url = "http://127.0.0.1:1/chat";
    config.key = "k";
    fixtures::TempDir dir;
    config.cache_dir = dir.path();
    config.retry = fast_retry();
    config.requests_per_second = 0;
    config.timeout = std::chrono::seconds(2);
    RemoteChatClient client(config);
    CHECK_THROWS_AS(client.complete(bundle("x")), ServiceError);
}

TEST_CASE("rate limiter spaces calls") {
    RateLimiter limiter(50.0);
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < 4; ++i) limiter.acquire();
    CHECK(std::chrono::steady_clock::now() - start >= std::chrono::milliseconds(55));
}
