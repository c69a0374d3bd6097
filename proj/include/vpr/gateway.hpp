#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vpr/errors.hpp"

namespace vpr {

struct ChatRequest {
    std::string system_prompt;  // omitted from the wire when empty
    std::string user_message;
    double temperature = 0.0;  // must stay in [0, 2]
    int max_tokens = 1024;
    std::string model_id;
};

struct ChatResponse {
    std::string content;  // verbatim, never post-edited at this layer
    std::chrono::milliseconds backend_latency{0};
};

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dimension() const { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

struct BackendConfig {
    std::string chat_endpoint_url;
    std::string embedding_endpoint_url;
    std::string api_key;  // empty means unset; the harness fills it from the environment
    int retry_limit = 3;
    std::chrono::milliseconds timeout{30000};
    std::chrono::milliseconds retry_backoff{500};  // doubles per retry
    std::string chat_model = "deepseek-v3.2";
    std::string embedding_model = "bge-m3";
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
    // True when responses are a fixed replay stream that must be consumed in
    // call order (scripted backends). Callers then avoid concurrent calls.
    virtual bool ordered_replay() const { return false; }
};

class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual std::vector<EmbeddingVector> embed_batch(
        const std::vector<std::string>& texts) = 0;
};

// Submits the request, retrying transport errors up to config.retry_limit
// times with exponential backoff, and stamps the measured latency.
// Throws TransportError, BackendError, EmptyCompletionError.
ChatResponse chat(ChatBackend& backend, const ChatRequest& request,
                  const BackendConfig& config);

// Embeds all texts in one batch, preserving order. Validates that every text
// is non-empty and that the returned vectors share one finite dimension.
std::vector<EmbeddingVector> embed(EmbeddingBackend& backend,
                                   const std::vector<std::string>& texts,
                                   const BackendConfig& config);

// Returns the first balanced top-level {...} block parsed as JSON. Fence-only
// lines (```) are dropped before scanning. Throws NoJsonFoundError or
// MalformedJsonError.
nlohmann::json extract_json_object(const std::string& raw);

// Chat-completion convention: POST {model, messages, temperature, max_tokens},
// content read from choices[0].message.content.
class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(BackendConfig config);
    ChatResponse complete(const ChatRequest& request) override;

private:
    BackendConfig config_;
};

// Embedding convention: POST {model, input}, vectors read from data[i].embedding.
class HttpEmbeddingBackend : public EmbeddingBackend {
public:
    explicit HttpEmbeddingBackend(BackendConfig config);
    std::vector<EmbeddingVector> embed_batch(
        const std::vector<std::string>& texts) override;

private:
    BackendConfig config_;
};

}  // namespace vpr
