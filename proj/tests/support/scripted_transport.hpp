#pragma once

#include "lancekit/http_client.hpp"

#include <string>
#include <vector>

namespace fixtures {

/// Transport answering from a script of responses and recording requests.
struct ScriptedTransport {
    std::vector<lancekit::HttpResponse> script;
    std::vector<std::string> bodies;
    std::size_t next = 0;

    lancekit::HttpPost bind() {
        return [this](const std::string&, const std::string& body, const lancekit::HttpHeaders&) {
            bodies.push_back(body);
            return next < script.size() ? script[next++] : script.back();
        };
    }
};

}  // namespace fixtures
