#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lancekit {

struct HttpResponse {
    int status = 0;  // 0 when the request never got a response
    std::string body;
    std::string transport_error;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

/// POSTs a JSON body. Swappable so tests can count or fake requests.
using HttpPost = std::function<HttpResponse(const std::string& url, const std::string& body, const HttpHeaders&)>;

/// Default transport. `https://` URLs need the build to have found OpenSSL.
HttpResponse http_post_json(const std::string& url, const std::string& body, const HttpHeaders& headers,
                            std::chrono::seconds timeout = std::chrono::seconds(60));

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
};

/// Runs `post` until it returns a non-retryable status. Transport failures,
/// 429 and 5xx are retried with exponential backoff. 401/403 raise AuthError;
/// other failures raise ServiceError after the last attempt.
HttpResponse post_with_retry(const HttpPost& post, const std::string& url, const std::string& body,
                             const HttpHeaders& headers, const RetryPolicy& policy);

/// Reads an environment variable; empty values count as unset.
std::optional<std::string> env_value(const char* name);

}  // namespace lancekit
