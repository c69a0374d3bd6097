#include "vpr/scripted.hpp"

#include <cctype>
#include <utility>

namespace vpr {

std::vector<ScriptEntry> script_from_strings(const std::vector<std::string>& responses) {
    std::vector<ScriptEntry> script;
    script.reserve(responses.size());
    for (const std::string& response : responses) {
        script.push_back(ScriptEntry::text(response));
    }
    return script;
}

std::vector<ScriptEntry> script_from_json(const nlohmann::json& array) {
    if (!array.is_array()) throw ConfigError("script must be a JSON array");
    std::vector<ScriptEntry> script;
    script.reserve(array.size());
    for (const auto& item : array) {
        if (item.is_string()) {
            script.push_back(ScriptEntry::text(item.get<std::string>()));
        } else if (item.is_object() && item.contains("error")) {
            const auto kind = item.at("error").get<std::string>();
            if (kind == "transport") {
                script.push_back(ScriptEntry::transport_failure());
            } else if (kind == "backend") {
                script.push_back(ScriptEntry::backend_failure());
            } else {
                throw ConfigError("unknown script error kind: \"" + kind + "\"");
            }
        } else if (item.is_object() && item.contains("content")) {
            script.push_back(ScriptEntry::text(item.at("content").get<std::string>()));
        } else {
            throw ConfigError("script entry must be a string or an {error}/{content} object");
        }
    }
    return script;
}

ScriptedChatBackend::ScriptedChatBackend(std::vector<ScriptEntry> script)
    : script_(std::move(script)) {
    if (script_.empty()) throw EmptyInputError("scripted backend needs a non-empty script");
}

ChatResponse ScriptedChatBackend::complete(const ChatRequest& request) {
    std::lock_guard<std::mutex> lock(mutex_);
    requests_.push_back(request);
    if (next_ >= script_.size()) {
        throw ScriptExhaustedError("script exhausted after " +
                                   std::to_string(script_.size()) + " responses");
    }
    const ScriptEntry& entry = script_[next_++];
    switch (entry.kind) {
        case ScriptEntry::Kind::TransportFailure:
            throw TransportError("scripted transport failure");
        case ScriptEntry::Kind::BackendFailure:
            throw BackendError("scripted backend failure");
        case ScriptEntry::Kind::Content:
            break;
    }
    return ChatResponse{entry.content, std::chrono::milliseconds{0}};
}

std::vector<ChatRequest> ScriptedChatBackend::requests() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return requests_;
}

std::size_t ScriptedChatBackend::served() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return next_;
}

std::size_t ScriptedChatBackend::remaining() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return script_.size() - next_;
}

EmbeddingVector CharFrequencyEmbeddingBackend::embed_one(const std::string& text) {
    std::vector<double> values(kDimension, 0.0);
    for (char c : text) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::isalpha(uc)) {
            values[static_cast<std::size_t>(std::tolower(uc) - 'a')] += 1.0;
        } else if (std::isdigit(uc)) {
            values[26] += 1.0;
        } else if (std::isspace(uc)) {
            values[27] += 1.0;
        } else {
            values[28] += 1.0;
        }
    }
    return EmbeddingVector{std::move(values)};
}

std::vector<EmbeddingVector> CharFrequencyEmbeddingBackend::embed_batch(
    const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> vectors;
    vectors.reserve(texts.size());
    for (const std::string& text : texts) vectors.push_back(embed_one(text));
    return vectors;
}

void FixedEmbeddingBackend::set(std::string text, std::vector<double> values) {
    table_.emplace_back(std::move(text), std::move(values));
}

void FixedEmbeddingBackend::set_default(std::vector<double> values) {
    default_values_ = std::move(values);
    has_default_ = true;
}

std::vector<EmbeddingVector> FixedEmbeddingBackend::embed_batch(
    const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> vectors;
    vectors.reserve(texts.size());
    for (const std::string& text : texts) {
        bool found = false;
        for (const auto& [key, values] : table_) {
            if (key == text) {
                vectors.push_back(EmbeddingVector{values});
                found = true;
                break;
            }
        }
        if (!found) {
            if (!has_default_) throw BackendError("no fixed embedding for \"" + text + "\"");
            vectors.push_back(EmbeddingVector{default_values_});
        }
    }
    return vectors;
}

}  // namespace vpr
