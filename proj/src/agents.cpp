#include "vpr/agents.hpp"

#include <algorithm>
#include <utility>

#include "vpr/strings.hpp"

namespace vpr {

namespace {

constexpr std::size_t kRouterReasonWords = 20;
constexpr std::size_t kValidatorReasonWords = 25;

ChatRequest make_request(const AgentParams& params, const BackendConfig& backend,
                         std::string system, std::string user) {
    ChatRequest request;
    request.system_prompt = std::move(system);
    request.user_message = std::move(user);
    request.temperature = params.temperature;
    request.max_tokens = params.max_tokens;
    request.model_id = params.model_id.empty() ? backend.chat_model : params.model_id;
    return request;
}

// Refiner and reviser must output only the prompt text; models still like to
// add fences or wrapping quotes.
std::string strip_completion(const std::string& raw) {
    std::string text = trim(raw);
    if (text.find("```") != std::string::npos) {
        std::string kept;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            auto eol = text.find('\n', pos);
            std::string line = text.substr(pos, eol == std::string::npos ? eol : eol - pos);
            if (trim(line).rfind("```", 0) != 0) {
                if (!kept.empty()) kept += '\n';
                kept += line;
            }
            if (eol == std::string::npos) break;
            pos = eol + 1;
        }
        text = trim(kept);
    }
    if (text.size() >= 2 && ((text.front() == '"' && text.back() == '"') ||
                             (text.front() == '\'' && text.back() == '\''))) {
        text = trim(text.substr(1, text.size() - 2));
    }
    return text;
}

}  // namespace

VerificationIssues collect_issues(const std::vector<EntailmentJudgment>& judgments) {
    VerificationIssues issues;
    for (const EntailmentJudgment& judgment : judgments) {
        if (judgment.label == EntailmentLabel::MS) {
            issues.missing.push_back(judgment.pair.atom);
        } else if (judgment.label == EntailmentLabel::CT) {
            issues.contradicted.push_back(judgment.pair.atom);
        }
    }
    return issues;
}

nlohmann::json issues_to_json(const VerificationIssues& issues) {
    return nlohmann::json{{"MS", issues.missing}, {"CT", issues.contradicted}};
}

RoutingDecision route_scenario(const UserPrompt& prompt, const AgentRuntime& rt) {
    const std::string filled =
        fill_template(rt.templates.router, {{"P_in", prompt.text}});
    std::string last_raw;
    for (int attempt = 0; attempt < rt.settings.max_attempts; ++attempt) {
        ChatResponse response;
        try {
            response = chat(rt.chat_backend,
                            make_request(rt.settings.router, rt.backend, {}, filled),
                            rt.backend);
        } catch (const EmptyCompletionError&) {
            continue;
        }
        last_raw = response.content;
        try {
            const auto j = extract_json_object(response.content);
            RoutingDecision decision;
            decision.tag = canonicalize_tag(j.at("label").get<std::string>());
            decision.reason =
                truncate_words(collapse_whitespace(j.value("reason", std::string{})),
                               kRouterReasonWords, &decision.reason_truncated);
            decision.raw_response = response.content;
            return decision;
        } catch (const nlohmann::json::exception&) {
        } catch (const Error&) {
        }
    }
    // Conservative fallback: unusable router output routes as Non-difficult.
    RoutingDecision decision;
    decision.tag = ScenarioTag::NonDifficult;
    decision.reason = "router output unusable; fell back to Non-difficult";
    decision.raw_response = last_raw;
    decision.fallback = true;
    return decision;
}

PolicyOutcome synthesize_policy(const UserPrompt& prompt, const RoutingDecision& decision,
                                const TaxonomyEntry& taxonomy, const AgentRuntime& rt) {
    if (taxonomy.tag != decision.tag) {
        throw Error("policy synthesis needs the taxonomy entry of the routed tag");
    }
    const std::string filled =
        fill_template(rt.templates.policy, {{"p_user", prompt.text},
                                            {"y_hat", to_label(decision.tag)},
                                            {"y_def", taxonomy.definition}});
    for (int attempt = 0; attempt < rt.settings.max_attempts; ++attempt) {
        ChatResponse response;
        try {
            response = chat(rt.chat_backend,
                            make_request(rt.settings.policy, rt.backend, {}, filled),
                            rt.backend);
        } catch (const EmptyCompletionError&) {
            continue;
        }
        try {
            const auto j = extract_json_object(response.content);
            const auto& body = j.at("policy");
            Policy policy;  // any extra keys are dropped here
            policy.intent = body.at("intent").get<std::string>();
            policy.principles = body.at("principles").get<std::string>();
            policy.rules = body.at("rules").get<std::string>();
            if (trim(policy.intent).empty() || trim(policy.principles).empty() ||
                trim(policy.rules).empty()) {
                throw PolicySchemaError("policy fields must be non-empty");
            }
            return PolicyOutcome{std::move(policy), response.content};
        } catch (const nlohmann::json::exception&) {
        } catch (const Error&) {
        }
    }
    throw PolicySchemaError("policy output failed schema validation after " +
                            std::to_string(rt.settings.max_attempts) + " attempts");
}

RefineOutcome refine_prompt(const UserPrompt& prompt, const Policy& policy,
                            const AgentRuntime& rt) {
    const std::string filled =
        fill_template(rt.templates.refiner, {{"user_input", prompt.text},
                                             {"intent", policy.intent},
                                             {"principles", policy.principles},
                                             {"rules", policy.rules}});
    const ChatResponse response =
        chat(rt.chat_backend, make_request(rt.settings.refiner, rt.backend, {}, filled),
             rt.backend);
    const std::string text = strip_completion(response.content);
    if (text.empty()) throw EmptyCompletionError("refiner returned no prompt text");
    return RefineOutcome{RefinedPrompt{text, 1}, response.content};
}

namespace {

struct SanitizedAtoms {
    AtomDictionary dictionary;
    std::vector<std::string> dropped;
    std::size_t returned = 0;
};

SanitizedAtoms sanitize_atoms(const nlohmann::json& j, const std::string& prompt_text) {
    SanitizedAtoms result;
    for (AtomCategory category : all_atom_categories()) {
        const std::string& name = to_string(category);
        if (!j.contains(name)) continue;
        const auto& field = j.at(name);
        if (!field.is_array()) throw AtomSchemaError("field \"" + name + "\" is not a list");
        auto& kept = result.dictionary.field(category);
        for (const auto& item : field) {
            if (!item.is_string()) {
                throw AtomSchemaError("field \"" + name + "\" holds a non-string atom");
            }
            ++result.returned;
            const std::string atom = trim(item.get<std::string>());
            const std::size_t words = word_count(atom);
            if (atom.empty() || words > 4 ||
                prompt_text.find(atom) == std::string::npos) {
                result.dropped.push_back(atom);
                continue;
            }
            if (std::find(kept.begin(), kept.end(), atom) != kept.end()) continue;
            kept.push_back(atom);
        }
    }
    return result;
}

struct AtomizeAttempt {
    AtomizeOutcome outcome;
    std::size_t returned = 0;  // atoms the model emitted, duplicates included
};

AtomizeAttempt atomize_once(const UserPrompt& prompt, const AgentRuntime& rt) {
    for (int attempt = 0; attempt < rt.settings.max_attempts; ++attempt) {
        ChatResponse response;
        try {
            response = chat(rt.chat_backend,
                            make_request(rt.settings.atomizer, rt.backend,
                                         rt.templates.atomizer, prompt.text),
                            rt.backend);
        } catch (const EmptyCompletionError&) {
            continue;
        }
        try {
            SanitizedAtoms sanitized =
                sanitize_atoms(extract_json_object(response.content), prompt.text);
            AtomizeAttempt result;
            result.outcome.dictionary = std::move(sanitized.dictionary);
            result.outcome.dropped = std::move(sanitized.dropped);
            result.outcome.raw_response = response.content;
            result.returned = sanitized.returned;
            return result;
        } catch (const nlohmann::json::exception&) {
        } catch (const Error&) {
        }
    }
    throw AtomSchemaError("atomizer output failed schema validation after " +
                          std::to_string(rt.settings.max_attempts) + " attempts");
}

bool lost_most_atoms(const AtomizeAttempt& attempt) {
    return attempt.returned > 0 &&
           attempt.outcome.dropped.size() * 2 > attempt.returned;
}

}  // namespace

AtomizeOutcome atomize(const UserPrompt& prompt, const AgentRuntime& rt) {
    AtomizeAttempt attempt = atomize_once(prompt, rt);
    if (lost_most_atoms(attempt)) {
        attempt = atomize_once(prompt, rt);
    }
    return std::move(attempt.outcome);
}

ValidateOutcome validate_entailment(const EvidencePair& pair, const AgentRuntime& rt,
                                    const std::string& refined_text) {
    std::string payload = "ATOM:\ncategory: " + to_string(pair.atom.category) +
                          "\ntext: " + pair.atom.text + "\n\nEVIDENCE:\n" +
                          pair.chunk.text;
    if (rt.settings.validator_include_refined_prompt && !refined_text.empty()) {
        payload += "\n\nREFINED PROMPT:\n" + refined_text;
    }
    std::string last_raw;
    for (int attempt = 0; attempt < rt.settings.max_attempts; ++attempt) {
        ChatResponse response;
        try {
            response = chat(rt.chat_backend,
                            make_request(rt.settings.validator, rt.backend,
                                         rt.templates.validator, payload),
                            rt.backend);
        } catch (const EmptyCompletionError&) {
            continue;
        }
        last_raw = response.content;
        try {
            const auto j = extract_json_object(response.content);
            EntailmentJudgment judgment;
            judgment.pair = pair;
            judgment.label =
                entailment_label_from_string(j.at("label").get<std::string>());
            judgment.reason =
                truncate_words(collapse_whitespace(j.value("reason", std::string{})),
                               kValidatorReasonWords);
            return ValidateOutcome{std::move(judgment), response.content};
        } catch (const nlohmann::json::exception&) {
        } catch (const Error&) {
        }
    }
    // Fail toward revision: an unverifiable atom counts as missing.
    EntailmentJudgment judgment;
    judgment.pair = pair;
    judgment.label = EntailmentLabel::MS;
    judgment.reason = "validator output unusable; defaulted to MS";
    judgment.degraded = true;
    return ValidateOutcome{std::move(judgment), last_raw};
}

RefineOutcome revise(const UserPrompt& prompt, const RefinedPrompt& refined,
                     const VerificationIssues& issues, const AgentRuntime& rt) {
    if (issues.empty()) throw EmptyInputError("revise needs at least one flagged atom");
    const std::string filled = fill_template(
        rt.templates.reviser,
        {{"original_prompt", prompt.text},
         {"refined_prompt", refined.text},
         {"json.dumps(payload, ensure_ascii=False, indent=2)",
          issues_to_json(issues).dump(2)}});
    const ChatResponse response =
        chat(rt.chat_backend, make_request(rt.settings.reviser, rt.backend, {}, filled),
             rt.backend);
    const std::string text = strip_completion(response.content);
    if (text.empty()) throw EmptyCompletionError("reviser returned no prompt text");
    return RefineOutcome{RefinedPrompt{text, refined.round + 1}, response.content};
}

}  // namespace vpr
