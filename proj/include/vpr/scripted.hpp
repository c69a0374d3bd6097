#pragma once

#include <cstddef>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vpr/gateway.hpp"

namespace vpr {

// One canned backend turn: a completion or a simulated failure.
struct ScriptEntry {
    enum class Kind { Content, TransportFailure, BackendFailure };

    Kind kind = Kind::Content;
    std::string content;

    static ScriptEntry text(std::string s) {
        return ScriptEntry{Kind::Content, std::move(s)};
    }
    static ScriptEntry transport_failure() {
        return ScriptEntry{Kind::TransportFailure, {}};
    }
    static ScriptEntry backend_failure() {
        return ScriptEntry{Kind::BackendFailure, {}};
    }
};

std::vector<ScriptEntry> script_from_strings(const std::vector<std::string>& responses);

// Array of entries: a plain string, or {"error": "transport"|"backend"},
// or {"content": "..."}.
std::vector<ScriptEntry> script_from_json(const nlohmann::json& array);

// Serves canned responses in order and records every request for assertions.
// Access is serialized internally; exhaustion raises ScriptExhaustedError.
class ScriptedChatBackend : public ChatBackend {
public:
    // Throws EmptyInputError on an empty script.
    explicit ScriptedChatBackend(std::vector<ScriptEntry> script);

    ChatResponse complete(const ChatRequest& request) override;
    bool ordered_replay() const override { return true; }

    std::vector<ChatRequest> requests() const;
    std::size_t served() const;
    std::size_t remaining() const;

private:
    mutable std::mutex mutex_;
    std::vector<ScriptEntry> script_;
    std::vector<ChatRequest> requests_;
    std::size_t next_ = 0;
};

// Deterministic offline embedder: case-folded letter counts plus digit,
// whitespace and other buckets. Any non-empty text embeds to a non-zero vector.
class CharFrequencyEmbeddingBackend : public EmbeddingBackend {
public:
    static constexpr std::size_t kDimension = 29;

    std::vector<EmbeddingVector> embed_batch(
        const std::vector<std::string>& texts) override;

    static EmbeddingVector embed_one(const std::string& text);
};

// Explicit text -> vector table for tests; unknown texts fall back to the
// default vector when one is set, otherwise raise BackendError.
class FixedEmbeddingBackend : public EmbeddingBackend {
public:
    void set(std::string text, std::vector<double> values);
    void set_default(std::vector<double> values);

    std::vector<EmbeddingVector> embed_batch(
        const std::vector<std::string>& texts) override;

private:
    std::vector<std::pair<std::string, std::vector<double>>> table_;
    std::vector<double> default_values_;
    bool has_default_ = false;
};

}  // namespace vpr
