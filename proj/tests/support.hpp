#pragma once

#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "vpr/pipeline.hpp"
#include "vpr/scripted.hpp"

namespace vpr::test {

inline BackendConfig fast_config() {
    BackendConfig config;
    config.retry_backoff = std::chrono::milliseconds{0};
    return config;
}

// Scripted chat + deterministic embeddings, ready for agent and pipeline tests.
struct Fixture {
    std::shared_ptr<ScriptedChatBackend> chat;
    BackendConfig config = fast_config();
    TemplateSet templates = TemplateSet::builtin();
    AgentSettings settings;

    explicit Fixture(std::vector<ScriptEntry> script)
        : chat(std::make_shared<ScriptedChatBackend>(std::move(script))) {}
    explicit Fixture(const std::vector<std::string>& responses)
        : Fixture(script_from_strings(responses)) {}

    AgentRuntime rt() const { return AgentRuntime{*chat, config, templates, settings}; }

    PipelineBackends backends() const {
        return PipelineBackends{chat, std::make_shared<CharFrequencyEmbeddingBackend>(),
                                config, templates, settings};
    }
};

inline std::string fixture_path(const std::string& name) {
    return std::string(VPR_TEST_DATA_DIR) + "/" + name;
}

inline std::vector<ScriptEntry> load_fixture_script(const std::string& name) {
    std::ifstream in(fixture_path(name));
    nlohmann::json j;
    in >> j;
    return script_from_json(j.at("responses"));
}

}  // namespace vpr::test
