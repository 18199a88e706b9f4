#include "lancekit/http_client.hpp"

#include "lancekit/errors.hpp"

#include <httplib.h>

#include <cstdlib>
#include <thread>

namespace lancekit {

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const std::size_t scheme = url.find("://");
    if (scheme == std::string::npos) throw ServiceError("malformed URL: " + url);
    const std::size_t slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

bool retryable(int status) { return status == 0 || status == 429 || status >= 500; }

}  // namespace

HttpResponse http_post_json(const std::string& url, const std::string& body, const HttpHeaders& headers,
                            std::chrono::seconds timeout) {
    const SplitUrl parts = split_url(url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (parts.origin.starts_with("https://")) {
        return HttpResponse{0, {}, "this build has no TLS support"};
    }
#endif
    httplib::Client client(parts.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers request_headers;
    for (const auto& [name, value] : headers) request_headers.emplace(name, value);
    auto result = client.Post(parts.path, request_headers, body, "application/json");
    if (!result) return HttpResponse{0, {}, httplib::to_string(result.error())};
    return HttpResponse{result->status, result->body, {}};
}

HttpResponse post_with_retry(const HttpPost& post, const std::string& url, const std::string& body,
                             const HttpHeaders& headers, const RetryPolicy& policy) {
    auto backoff = policy.initial_backoff;
    HttpResponse last;
    const int attempts = std::max(1, policy.attempts);
    for (int attempt = 1; attempt <= attempts; ++attempt) {
        last = post(url, body, headers);
        if (last.status == 401 || last.status == 403) {
            throw AuthError("service rejected credentials (HTTP " + std::to_string(last.status) + ")");
        }
        if (last.status >= 200 && last.status < 300) return last;
        if (!retryable(last.status)) break;
        if (attempt < attempts) {
            std::this_thread::sleep_for(backoff);
            backoff = std::chrono::milliseconds(static_cast<long long>(backoff.count() * policy.multiplier));
        }
    }
    std::string detail = last.status == 0 ? last.transport_error : "HTTP " + std::to_string(last.status);
    if (!last.body.empty()) detail += ": " + last.body.substr(0, 200);
    throw ServiceError("request to " + url + " failed: " + detail);
}

std::optional<std::string> env_value(const char* name) {
    const char* value = std::getenv(name);
    if (!value || !*value) return std::nullopt;
    return std::string(value);
}

}  // namespace lancekit
