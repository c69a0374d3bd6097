#pragma once

#include <string>
#include <vector>

#include "vpr/gateway.hpp"
#include "vpr/templates.hpp"
#include "vpr/types.hpp"

namespace vpr {

// Routing reference data: per-tag diagnostic definition, representative
// example and tie-breaking priority (1 = highest).
struct TaxonomyEntry {
    ScenarioTag tag = ScenarioTag::NonDifficult;
    std::string definition;
    std::string example_prompt;
    int priority_rank = 11;
};

const std::vector<TaxonomyEntry>& taxonomy();
const TaxonomyEntry& taxonomy_entry(ScenarioTag tag);

// Atoms the validator flagged MS (missing) or CT (contradicted).
struct VerificationIssues {
    std::vector<Atom> missing;
    std::vector<Atom> contradicted;

    bool empty() const { return missing.empty() && contradicted.empty(); }
};

VerificationIssues collect_issues(const std::vector<EntailmentJudgment>& judgments);
nlohmann::json issues_to_json(const VerificationIssues& issues);

struct AgentParams {
    std::string model_id;  // empty -> BackendConfig::chat_model
    double temperature = 0.0;
    int max_tokens = 1024;
};

struct AgentSettings {
    // Classification and extraction run cold; generation keeps some diversity.
    AgentParams router{{}, 0.0, 1024};
    AgentParams policy{{}, 0.7, 1024};
    AgentParams refiner{{}, 0.7, 1024};
    AgentParams atomizer{{}, 0.0, 1024};
    AgentParams validator{{}, 0.0, 1024};
    AgentParams reviser{{}, 0.7, 1024};
    bool validator_include_refined_prompt = false;
    int max_attempts = 3;  // total attempts per agent call on parse failures
};

// Everything an agent call needs; agents themselves are stateless.
struct AgentRuntime {
    ChatBackend& chat_backend;
    const BackendConfig& backend;
    const TemplateSet& templates;
    const AgentSettings& settings;
};

struct PolicyOutcome {
    Policy policy;
    std::string raw_response;
};

struct RefineOutcome {
    RefinedPrompt prompt;
    std::string raw_response;
};

struct AtomizeOutcome {
    AtomDictionary dictionary;
    std::vector<std::string> dropped;  // atoms that failed verbatim or length checks
    std::string raw_response;
};

struct ValidateOutcome {
    EntailmentJudgment judgment;
    std::string raw_response;
};

// Stage I. Never aborts on unparsable output: after the attempt budget the
// decision falls back to Non-difficult with the fallback flag set.
RoutingDecision route_scenario(const UserPrompt& prompt, const AgentRuntime& rt);

// Stage II. Requires taxonomy.tag == decision.tag. Retries schema violations,
// then throws PolicySchemaError.
PolicyOutcome synthesize_policy(const UserPrompt& prompt, const RoutingDecision& decision,
                                const TaxonomyEntry& taxonomy, const AgentRuntime& rt);

// Stage III. Strips code fences and wrapping quotes; round = 1.
RefineOutcome refine_prompt(const UserPrompt& prompt, const Policy& policy,
                            const AgentRuntime& rt);

// Stage IV-A. Atoms that are not case-sensitive substrings of the prompt (or
// exceed 4 words) are dropped; when that loses more than half of the returned
// atoms the whole call is retried once.
AtomizeOutcome atomize(const UserPrompt& prompt, const AgentRuntime& rt);

// Stage IV-D. Unparsable output degrades to MS after the attempt budget, so
// a broken validator triggers revision instead of silently passing.
ValidateOutcome validate_entailment(const EvidencePair& pair, const AgentRuntime& rt,
                                    const std::string& refined_text = {});

// Stage V. Requires non-empty issues; round increments.
RefineOutcome revise(const UserPrompt& prompt, const RefinedPrompt& refined,
                     const VerificationIssues& issues, const AgentRuntime& rt);

}  // namespace vpr
