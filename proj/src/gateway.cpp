#include "vpr/gateway.hpp"

#include <cmath>
#include <sstream>
#include <thread>
#include <utility>

#include <httplib.h>

#include "vpr/strings.hpp"

namespace vpr {

namespace {

struct SplitUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("malformed endpoint url: \"" + url + "\"");
    }
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == scheme_end + 3) {
        throw ConfigError("endpoint url has no host: \"" + url + "\"");
    }
    if (path_start == std::string::npos) {
        return SplitUrl{url, "/"};
    }
    return SplitUrl{url.substr(0, path_start), url.substr(path_start)};
}

httplib::Headers request_headers(const BackendConfig& config) {
    httplib::Headers headers;
    if (!config.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config.api_key);
    }
    return headers;
}

// One client per call; httplib clients are not safe for concurrent requests.
httplib::Result post_json(const BackendConfig& config, const std::string& url,
                          const nlohmann::json& body) {
    SplitUrl parts = split_url(url);
    httplib::Client client(parts.base);
    auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
    client.set_connection_timeout(std::max<long>(1, seconds.count()), 0);
    client.set_read_timeout(std::max<long>(1, seconds.count()), 0);
    return client.Post(parts.path, request_headers(config), body.dump(),
                       "application/json");
}

template <typename Call>
auto with_transport_retries(const BackendConfig& config, Call&& call) {
    for (int attempt = 0;; ++attempt) {
        try {
            return call();
        } catch (const TransportError&) {
            if (attempt >= config.retry_limit) throw;
            auto delay = config.retry_backoff * (1LL << attempt);
            if (delay.count() > 0) std::this_thread::sleep_for(delay);
        }
    }
}

void validate_request(const ChatRequest& request) {
    if (request.temperature < 0.0 || request.temperature > 2.0) {
        throw Error("chat request temperature out of [0, 2]");
    }
    if (request.max_tokens < 1) {
        throw Error("chat request max_tokens must be >= 1");
    }
}

}  // namespace

ChatResponse chat(ChatBackend& backend, const ChatRequest& request,
                  const BackendConfig& config) {
    validate_request(request);
    return with_transport_retries(config, [&] {
        auto start = std::chrono::steady_clock::now();
        ChatResponse response = backend.complete(request);
        response.backend_latency = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start);
        if (response.content.empty()) {
            throw EmptyCompletionError("backend returned an empty completion");
        }
        return response;
    });
}

std::vector<EmbeddingVector> embed(EmbeddingBackend& backend,
                                   const std::vector<std::string>& texts,
                                   const BackendConfig& config) {
    if (texts.empty()) throw EmptyInputError("embed: texts list is empty");
    for (const std::string& text : texts) {
        if (trim(text).empty()) throw EmptyInputError("embed: blank text in batch");
    }
    auto vectors = with_transport_retries(config, [&] { return backend.embed_batch(texts); });
    if (vectors.size() != texts.size()) {
        throw BackendError("embedding backend returned " + std::to_string(vectors.size()) +
                           " vectors for " + std::to_string(texts.size()) + " texts");
    }
    const std::size_t dimension = vectors.front().dimension();
    for (const EmbeddingVector& v : vectors) {
        if (v.dimension() != dimension || dimension == 0) {
            throw DimensionMismatchError("embedding backend returned inconsistent dimensions");
        }
        for (double x : v.values) {
            if (!std::isfinite(x)) throw BackendError("embedding contains a non-finite value");
        }
    }
    return vectors;
}

nlohmann::json extract_json_object(const std::string& raw) {
    // Drop pure fence lines; "```json" glued to prose is harmless to the scan.
    std::string text;
    text.reserve(raw.size());
    std::istringstream lines(raw);
    std::string line;
    while (std::getline(lines, line)) {
        if (trim(line).rfind("```", 0) == 0) continue;
        text += line;
        text += '\n';
    }

    auto open = text.find('{');
    if (open == std::string::npos) throw NoJsonFoundError("no JSON object in output");

    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (escaped) {
                escaped = false;
            } else if (c == '\\') {
                escaped = true;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) {
                try {
                    return nlohmann::json::parse(text.substr(open, i - open + 1));
                } catch (const nlohmann::json::exception& e) {
                    throw MalformedJsonError(std::string("invalid JSON object: ") + e.what());
                }
            }
        }
    }
    throw MalformedJsonError("unbalanced JSON object in output");
}

// ---------------------------------------------------------------------------
// HTTP backends
// ---------------------------------------------------------------------------

HttpChatBackend::HttpChatBackend(BackendConfig config) : config_(std::move(config)) {}

ChatResponse HttpChatBackend::complete(const ChatRequest& request) {
    nlohmann::json messages = nlohmann::json::array();
    if (!request.system_prompt.empty()) {
        messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
    }
    messages.push_back({{"role", "user"}, {"content", request.user_message}});
    nlohmann::json body{{"model", request.model_id.empty() ? config_.chat_model : request.model_id},
                        {"messages", messages},
                        {"temperature", request.temperature},
                        {"max_tokens", request.max_tokens}};

    auto result = post_json(config_, config_.chat_endpoint_url, body);
    if (!result) {
        throw TransportError("chat endpoint unreachable: " + httplib::to_string(result.error()));
    }
    if (result->status < 200 || result->status >= 300) {
        throw BackendError("chat endpoint returned status " + std::to_string(result->status));
    }
    try {
        auto j = nlohmann::json::parse(result->body);
        return ChatResponse{j.at("choices").at(0).at("message").at("content").get<std::string>(),
                            std::chrono::milliseconds{0}};
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("unusable chat response body: ") + e.what());
    }
}

HttpEmbeddingBackend::HttpEmbeddingBackend(BackendConfig config)
    : config_(std::move(config)) {}

std::vector<EmbeddingVector> HttpEmbeddingBackend::embed_batch(
    const std::vector<std::string>& texts) {
    nlohmann::json body{{"model", config_.embedding_model}, {"input", texts}};

    auto result = post_json(config_, config_.embedding_endpoint_url, body);
    if (!result) {
        throw TransportError("embedding endpoint unreachable: " +
                             httplib::to_string(result.error()));
    }
    if (result->status < 200 || result->status >= 300) {
        throw BackendError("embedding endpoint returned status " +
                           std::to_string(result->status));
    }
    try {
        auto j = nlohmann::json::parse(result->body);
        std::vector<EmbeddingVector> vectors;
        vectors.reserve(j.at("data").size());
        for (const auto& item : j.at("data")) {
            vectors.push_back(EmbeddingVector{item.at("embedding").get<std::vector<double>>()});
        }
        return vectors;
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("unusable embedding response body: ") + e.what());
    }
}

}  // namespace vpr
