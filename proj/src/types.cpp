#include "vpr/types.hpp"

#include <utility>

#include "vpr/strings.hpp"

namespace vpr {

// ---------------------------------------------------------------------------
// ScenarioTag
// ---------------------------------------------------------------------------

const std::array<ScenarioTag, kScenarioTagCount>& all_scenario_tags() {
    static const std::array<ScenarioTag, kScenarioTagCount> tags = {
        ScenarioTag::AbstractDescriptions, ScenarioTag::ComplexSpatialRelations,
        ScenarioTag::MultiElementScenes,   ScenarioTag::FineGrainedAppearance,
        ScenarioTag::TemporalConsistency,  ScenarioTag::StylisticHybrids,
        ScenarioTag::CausalityPhysics,     ScenarioTag::CameraMotion,
        ScenarioTag::ObjectInteraction,    ScenarioTag::SceneTransitions,
        ScenarioTag::NonDifficult,
    };
    return tags;
}

const std::string& to_label(ScenarioTag tag) {
    static const std::array<std::string, kScenarioTagCount> labels = {
        "Abstract Descriptions", "Complex Spatial Relations", "Multi-Element Scenes",
        "Fine-Grained Appearance", "Temporal Consistency", "Stylistic Hybrids",
        "Causality & Physics", "Camera Motion", "Object Interaction",
        "Scene Transitions", "Non-difficult",
    };
    return labels[static_cast<std::size_t>(tag)];
}

ScenarioTag canonicalize_tag(const std::string& raw) {
    const std::string needle = to_lower(collapse_whitespace(raw));
    for (ScenarioTag tag : all_scenario_tags()) {
        if (needle == to_lower(to_label(tag))) return tag;
    }
    throw UnknownTagError("unknown scenario tag: \"" + raw + "\"");
}

// ---------------------------------------------------------------------------
// UserPrompt
// ---------------------------------------------------------------------------

UserPrompt::UserPrompt(std::string t) : text(std::move(t)) {
    if (trim(text).empty()) throw EmptyInputError("user prompt is empty");
}

// ---------------------------------------------------------------------------
// Atoms
// ---------------------------------------------------------------------------

const std::array<AtomCategory, kAtomCategoryCount>& all_atom_categories() {
    static const std::array<AtomCategory, kAtomCategoryCount> categories = {
        AtomCategory::Characters, AtomCategory::Objects, AtomCategory::Actions,
        AtomCategory::Locations, AtomCategory::Scenery,
    };
    return categories;
}

const std::string& to_string(AtomCategory category) {
    static const std::array<std::string, kAtomCategoryCount> names = {
        "characters", "objects", "actions", "locations", "scenery",
    };
    return names[static_cast<std::size_t>(category)];
}

AtomCategory atom_category_from_string(const std::string& s) {
    for (AtomCategory category : all_atom_categories()) {
        if (s == to_string(category)) return category;
    }
    throw Error("unknown atom category: \"" + s + "\"");
}

const std::vector<std::string>& AtomDictionary::field(AtomCategory category) const {
    switch (category) {
        case AtomCategory::Characters: return characters;
        case AtomCategory::Objects: return objects;
        case AtomCategory::Actions: return actions;
        case AtomCategory::Locations: return locations;
        case AtomCategory::Scenery: return scenery;
    }
    throw Error("invalid atom category");
}

std::vector<std::string>& AtomDictionary::field(AtomCategory category) {
    return const_cast<std::vector<std::string>&>(
        static_cast<const AtomDictionary*>(this)->field(category));
}

std::size_t AtomDictionary::total() const {
    return characters.size() + objects.size() + actions.size() + locations.size() +
           scenery.size();
}

std::vector<Atom> flatten_atoms(const AtomDictionary& dict) {
    std::vector<Atom> atoms;
    atoms.reserve(dict.total());
    int index = 0;
    for (AtomCategory category : all_atom_categories()) {
        for (const std::string& text : dict.field(category)) {
            atoms.push_back(Atom{category, text, index++});
        }
    }
    return atoms;
}

// ---------------------------------------------------------------------------
// Entailment
// ---------------------------------------------------------------------------

const std::string& to_string(EntailmentLabel label) {
    static const std::array<std::string, 3> names = {"ET", "MS", "CT"};
    return names[static_cast<std::size_t>(label)];
}

EntailmentLabel entailment_label_from_string(const std::string& s) {
    if (s == "ET") return EntailmentLabel::ET;
    if (s == "MS") return EntailmentLabel::MS;
    if (s == "CT") return EntailmentLabel::CT;
    throw Error("unknown entailment label: \"" + s + "\"");
}

double VerificationMetrics::coverage() const {
    if (degenerate || n_atoms == 0) return 1.0;
    return static_cast<double>(n_et) / static_cast<double>(n_atoms);
}

double VerificationMetrics::contradiction() const {
    if (degenerate || n_atoms == 0) return 0.0;
    return static_cast<double>(n_ct) / static_cast<double>(n_atoms);
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const UserPrompt& v) {
    j = nlohmann::json{{"text", v.text}};
}

void from_json(const nlohmann::json& j, UserPrompt& v) {
    j.at("text").get_to(v.text);
}

void to_json(nlohmann::json& j, const RoutingDecision& v) {
    j = nlohmann::json{{"label", to_label(v.tag)},
                       {"reason", v.reason},
                       {"raw_response", v.raw_response},
                       {"fallback", v.fallback},
                       {"reason_truncated", v.reason_truncated}};
}

void from_json(const nlohmann::json& j, RoutingDecision& v) {
    v.tag = canonicalize_tag(j.at("label").get<std::string>());
    j.at("reason").get_to(v.reason);
    v.raw_response = j.value("raw_response", std::string{});
    v.fallback = j.value("fallback", false);
    v.reason_truncated = j.value("reason_truncated", false);
}

void to_json(nlohmann::json& j, const Policy& v) {
    j = nlohmann::json{
        {"intent", v.intent}, {"principles", v.principles}, {"rules", v.rules}};
}

void from_json(const nlohmann::json& j, Policy& v) {
    j.at("intent").get_to(v.intent);
    j.at("principles").get_to(v.principles);
    j.at("rules").get_to(v.rules);
}

void to_json(nlohmann::json& j, const RefinedPrompt& v) {
    j = nlohmann::json{{"text", v.text}, {"round", v.round}};
}

void from_json(const nlohmann::json& j, RefinedPrompt& v) {
    j.at("text").get_to(v.text);
    j.at("round").get_to(v.round);
}

void to_json(nlohmann::json& j, const AtomDictionary& v) {
    j = nlohmann::json{{"characters", v.characters},
                       {"objects", v.objects},
                       {"actions", v.actions},
                       {"locations", v.locations},
                       {"scenery", v.scenery}};
}

void from_json(const nlohmann::json& j, AtomDictionary& v) {
    v.characters = j.value("characters", std::vector<std::string>{});
    v.objects = j.value("objects", std::vector<std::string>{});
    v.actions = j.value("actions", std::vector<std::string>{});
    v.locations = j.value("locations", std::vector<std::string>{});
    v.scenery = j.value("scenery", std::vector<std::string>{});
}

void to_json(nlohmann::json& j, const Atom& v) {
    j = nlohmann::json{
        {"category", to_string(v.category)}, {"text", v.text}, {"index", v.index}};
}

void from_json(const nlohmann::json& j, Atom& v) {
    v.category = atom_category_from_string(j.at("category").get<std::string>());
    j.at("text").get_to(v.text);
    j.at("index").get_to(v.index);
}

void to_json(nlohmann::json& j, const Chunk& v) {
    j = nlohmann::json{{"text", v.text}, {"index", v.index}};
}

void from_json(const nlohmann::json& j, Chunk& v) {
    j.at("text").get_to(v.text);
    j.at("index").get_to(v.index);
}

void to_json(nlohmann::json& j, const EvidencePair& v) {
    j = nlohmann::json{
        {"atom", v.atom}, {"chunk", v.chunk}, {"similarity", v.similarity}};
}

void from_json(const nlohmann::json& j, EvidencePair& v) {
    j.at("atom").get_to(v.atom);
    j.at("chunk").get_to(v.chunk);
    j.at("similarity").get_to(v.similarity);
}

void to_json(nlohmann::json& j, const EntailmentJudgment& v) {
    j = nlohmann::json{{"pair", v.pair},
                       {"label", to_string(v.label)},
                       {"reason", v.reason},
                       {"degraded", v.degraded}};
}

void from_json(const nlohmann::json& j, EntailmentJudgment& v) {
    j.at("pair").get_to(v.pair);
    v.label = entailment_label_from_string(j.at("label").get<std::string>());
    j.at("reason").get_to(v.reason);
    v.degraded = j.value("degraded", false);
}

void to_json(nlohmann::json& j, const VerificationMetrics& v) {
    j = nlohmann::json{{"coverage", v.coverage()},
                       {"contradiction", v.contradiction()},
                       {"n_atoms", v.n_atoms},
                       {"n_et", v.n_et},
                       {"n_ms", v.n_ms},
                       {"n_ct", v.n_ct},
                       {"degenerate", v.degenerate}};
}

void from_json(const nlohmann::json& j, VerificationMetrics& v) {
    j.at("n_atoms").get_to(v.n_atoms);
    j.at("n_et").get_to(v.n_et);
    j.at("n_ms").get_to(v.n_ms);
    j.at("n_ct").get_to(v.n_ct);
    v.degenerate = j.value("degenerate", false);
}

void to_json(nlohmann::json& j, const VerificationReport& v) {
    j = nlohmann::json{
        {"judgments", v.judgments}, {"metrics", v.metrics}, {"accepted", v.accepted}};
}

void from_json(const nlohmann::json& j, VerificationReport& v) {
    j.at("judgments").get_to(v.judgments);
    j.at("metrics").get_to(v.metrics);
    j.at("accepted").get_to(v.accepted);
}

void to_json(nlohmann::json& j, const TraceRound& v) {
    j = nlohmann::json{{"prompt", v.prompt},
                       {"report", v.report},
                       {"chunks", v.chunks},
                       {"similarity", v.similarity},
                       {"validator_raw", v.validator_raw},
                       {"reviser_raw", v.reviser_raw}};
}

void from_json(const nlohmann::json& j, TraceRound& v) {
    j.at("prompt").get_to(v.prompt);
    j.at("report").get_to(v.report);
    v.chunks = j.value("chunks", std::vector<Chunk>{});
    v.similarity = j.value("similarity", std::vector<std::vector<double>>{});
    v.validator_raw = j.value("validator_raw", std::vector<std::string>{});
    v.reviser_raw = j.value("reviser_raw", std::string{});
}

void to_json(nlohmann::json& j, const RefinementTrace& v) {
    j = nlohmann::json{{"user_prompt", v.user_prompt},
                       {"routing", v.routing},
                       {"policy", v.policy},
                       {"atom_dictionary", v.atom_dictionary},
                       {"atoms", v.atoms},
                       {"dropped_atoms", v.dropped_atoms},
                       {"rounds", v.rounds},
                       {"final", v.final_prompt},
                       {"accepted", v.accepted},
                       {"rounds_used", v.rounds_used},
                       {"policy_raw", v.policy_raw},
                       {"refiner_raw", v.refiner_raw},
                       {"atomizer_raw", v.atomizer_raw}};
}

void from_json(const nlohmann::json& j, RefinementTrace& v) {
    j.at("user_prompt").get_to(v.user_prompt);
    j.at("routing").get_to(v.routing);
    j.at("policy").get_to(v.policy);
    j.at("atom_dictionary").get_to(v.atom_dictionary);
    j.at("atoms").get_to(v.atoms);
    v.dropped_atoms = j.value("dropped_atoms", std::vector<std::string>{});
    j.at("rounds").get_to(v.rounds);
    j.at("final").get_to(v.final_prompt);
    j.at("accepted").get_to(v.accepted);
    j.at("rounds_used").get_to(v.rounds_used);
    v.policy_raw = j.value("policy_raw", std::string{});
    v.refiner_raw = j.value("refiner_raw", std::string{});
    v.atomizer_raw = j.value("atomizer_raw", std::string{});
}

nlohmann::json trace_to_json(const RefinementTrace& trace, TraceVerbosity verbosity) {
    if (verbosity == TraceVerbosity::Full) {
        return nlohmann::json(trace);
    }
    nlohmann::json rounds = nlohmann::json::array();
    for (const TraceRound& round : trace.rounds) {
        rounds.push_back({{"round", round.prompt.round},
                          {"coverage", round.report.metrics.coverage()},
                          {"contradiction", round.report.metrics.contradiction()}});
    }
    return nlohmann::json{{"label", to_label(trace.routing.tag)},
                          {"rounds_used", trace.rounds_used},
                          {"rounds", rounds},
                          {"accepted", trace.accepted},
                          {"final", trace.final_prompt.text}};
}

}  // namespace vpr
