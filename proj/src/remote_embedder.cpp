#include "lancekit/remote_embedder.hpp"

#include "lancekit/errors.hpp"

#include <json.hpp>

namespace lancekit {

namespace {

EmbeddingVector parse_vector(const nlohmann::json& values) {
    if (!values.is_array() || values.empty()) throw ServiceError("embedding response has no vector");
    EmbeddingVector v;
    v.reserve(values.size());
    for (const auto& x : values) {
        if (!x.is_number()) throw ServiceError("embedding response has a non-numeric component");
        v.push_back(x.get<double>());
    }
    return v;
}

EmbeddingVector vector_from_body(const std::string& body) {
    nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw ServiceError("embedding response is not a JSON object");
    if (doc.contains("embedding")) return parse_vector(doc["embedding"]);
    if (doc.contains("data") && doc["data"].is_array() && !doc["data"].empty() && doc["data"][0].is_object() &&
        doc["data"][0].contains("embedding")) {
        return parse_vector(doc["data"][0]["embedding"]);
    }
    throw ServiceError("embedding response has no `embedding` field");
}

}  // namespace

RemoteEmbedderConfig RemoteEmbedderConfig::from_env() {
    RemoteEmbedderConfig config;
    config.url = env_value("LANCEKIT_EMBED_URL").value_or("");
    config.key = env_value("LANCEKIT_EMBED_KEY");
    return config;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config, HttpPost transport)
    : config_(std::move(config)), transport_(std::move(transport)), cache_(config_.cache_dir) {
    if (!transport_) {
        const auto timeout = config_.timeout;
        transport_ = [timeout](const std::string& url, const std::string& body, const HttpHeaders& headers) {
            return http_post_json(url, body, headers, timeout);
        };
    }
}

EmbeddingVector RemoteEmbedder::embed(std::string_view text) {
    if (text.empty()) throw EmptyTextError("nothing to embed");
    const std::string space = "embed:" + config_.model;
    if (auto cached = cache_.get(space, text)) {
        nlohmann::json values = nlohmann::json::parse(*cached, nullptr, false);
        if (!values.is_discarded()) {
            EmbeddingVector v = normalized(parse_vector(values));
            dimension_ = v.size();
            return v;
        }
    }
    if (!config_.key) throw AuthError("LANCEKIT_EMBED_KEY is not set");
    if (config_.url.empty()) throw ServiceError("LANCEKIT_EMBED_URL is not set");

    nlohmann::ordered_json request{{"model", config_.model}, {"input", text}};
    HttpHeaders headers{{"Authorization", "Bearer " + *config_.key}};
    ++network_calls_;
    const std::string body = request.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    HttpResponse response = post_with_retry(transport_, config_.url, body, headers, config_.retry);

    EmbeddingVector v = normalized(vector_from_body(response.body));
    if (dimension_ != 0 && v.size() != dimension_) {
        throw DimensionMismatchError("embedding service changed dimension from " + std::to_string(dimension_) +
                                     " to " + std::to_string(v.size()));
    }
    dimension_ = v.size();
    cache_.put(space, text, nlohmann::json(v).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
    return v;
}

}  // namespace lancekit
