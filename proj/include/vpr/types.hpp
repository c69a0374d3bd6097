#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vpr/errors.hpp"

namespace vpr {

// ---------------------------------------------------------------------------
// Scenario routing
// ---------------------------------------------------------------------------

// The 11 canonical routing labels: ten complex-scenario categories plus the
// conservative Non-difficult fallback.
enum class ScenarioTag {
    AbstractDescriptions,
    ComplexSpatialRelations,
    MultiElementScenes,
    FineGrainedAppearance,
    TemporalConsistency,
    StylisticHybrids,
    CausalityPhysics,
    CameraMotion,
    ObjectInteraction,
    SceneTransitions,
    NonDifficult,
};

inline constexpr std::size_t kScenarioTagCount = 11;

const std::array<ScenarioTag, kScenarioTagCount>& all_scenario_tags();
const std::string& to_label(ScenarioTag tag);

// Maps a raw label to its canonical tag. Matching is case-insensitive after
// trimming and collapsing internal whitespace, so "non-difficult" and
// "Non-difficult" both canonicalize. Throws UnknownTagError otherwise.
ScenarioTag canonicalize_tag(const std::string& raw);

// ---------------------------------------------------------------------------
// Core prompt types
// ---------------------------------------------------------------------------

struct UserPrompt {
    std::string text;

    UserPrompt() = default;
    // Throws EmptyInputError when text is empty after trimming.
    explicit UserPrompt(std::string t);
};

struct RoutingDecision {
    ScenarioTag tag = ScenarioTag::NonDifficult;
    std::string reason;  // normalized and capped at 20 words
    std::string raw_response;
    bool fallback = false;          // router output never parsed into a known tag
    bool reason_truncated = false;  // reason exceeded the 20-word cap
};

struct Policy {
    std::string intent;
    std::string principles;
    std::string rules;
};

struct RefinedPrompt {
    std::string text;
    int round = 1;  // 1 = initial rewrite, +1 per revision
};

// ---------------------------------------------------------------------------
// Atoms and verification
// ---------------------------------------------------------------------------

enum class AtomCategory { Characters, Objects, Actions, Locations, Scenery };

inline constexpr std::size_t kAtomCategoryCount = 5;

const std::array<AtomCategory, kAtomCategoryCount>& all_atom_categories();
const std::string& to_string(AtomCategory category);
AtomCategory atom_category_from_string(const std::string& s);

// Field-wise verbatim atoms of a user prompt.
struct AtomDictionary {
    std::vector<std::string> characters;
    std::vector<std::string> objects;
    std::vector<std::string> actions;
    std::vector<std::string> locations;
    std::vector<std::string> scenery;

    const std::vector<std::string>& field(AtomCategory category) const;
    std::vector<std::string>& field(AtomCategory category);
    std::size_t total() const;
};

struct Atom {
    AtomCategory category = AtomCategory::Characters;
    std::string text;
    int index = 0;  // dense position in the flattened list

    bool operator==(const Atom&) const = default;
};

// Flattens in fixed field order (characters, objects, actions, locations,
// scenery), preserving within-field order and assigning dense indices 0..n-1.
std::vector<Atom> flatten_atoms(const AtomDictionary& dict);

struct Chunk {
    std::string text;
    int index = 0;

    bool operator==(const Chunk&) const = default;
};

struct EvidencePair {
    Atom atom;
    Chunk chunk;
    double similarity = 0.0;  // cosine similarity at the argmax chunk
};

enum class EntailmentLabel { ET, MS, CT };

const std::string& to_string(EntailmentLabel label);
EntailmentLabel entailment_label_from_string(const std::string& s);

struct EntailmentJudgment {
    EvidencePair pair;
    EntailmentLabel label = EntailmentLabel::MS;
    std::string reason;     // capped at 25 words
    bool degraded = false;  // validator output never parsed; defaulted to MS
};

// Counts are the state; the rates are derived exactly from them.
struct VerificationMetrics {
    int n_atoms = 0;
    int n_et = 0;
    int n_ms = 0;
    int n_ct = 0;
    bool degenerate = false;  // no atoms to verify

    double coverage() const;       // 1.0 when degenerate
    double contradiction() const;  // 0.0 when degenerate
};

struct VerificationReport {
    std::vector<EntailmentJudgment> judgments;  // in atom-index order
    VerificationMetrics metrics;
    bool accepted = false;
};

// ---------------------------------------------------------------------------
// Trace
// ---------------------------------------------------------------------------

enum class TraceVerbosity { Summary, Full };

struct TraceRound {
    RefinedPrompt prompt;
    VerificationReport report;
    // Artifacts surfaced only in full-verbosity traces.
    std::vector<Chunk> chunks;
    std::vector<std::vector<double>> similarity;  // atoms x chunks
    std::vector<std::string> validator_raw;
    std::string reviser_raw;  // raw output that produced the next round, empty on the last
};

struct RefinementTrace {
    UserPrompt user_prompt;
    RoutingDecision routing;
    Policy policy;
    AtomDictionary atom_dictionary;
    std::vector<Atom> atoms;                 // flattened, fixed across rounds
    std::vector<std::string> dropped_atoms;  // atomizer output that failed validation
    std::vector<TraceRound> rounds;
    RefinedPrompt final_prompt;
    bool accepted = false;
    int rounds_used = 0;
    std::string policy_raw;
    std::string refiner_raw;
    std::string atomizer_raw;
};

// Summary keeps the per-round rates and the outcome; Full adds chunks,
// similarity matrices, raw agent responses and complete reports.
nlohmann::json trace_to_json(const RefinementTrace& trace, TraceVerbosity verbosity);

// ---------------------------------------------------------------------------
// JSON serialization (canonical field names)
// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const UserPrompt& v);
void from_json(const nlohmann::json& j, UserPrompt& v);
void to_json(nlohmann::json& j, const RoutingDecision& v);
void from_json(const nlohmann::json& j, RoutingDecision& v);
void to_json(nlohmann::json& j, const Policy& v);
void from_json(const nlohmann::json& j, Policy& v);
void to_json(nlohmann::json& j, const RefinedPrompt& v);
void from_json(const nlohmann::json& j, RefinedPrompt& v);
void to_json(nlohmann::json& j, const AtomDictionary& v);
void from_json(const nlohmann::json& j, AtomDictionary& v);
void to_json(nlohmann::json& j, const Atom& v);
void from_json(const nlohmann::json& j, Atom& v);
void to_json(nlohmann::json& j, const Chunk& v);
void from_json(const nlohmann::json& j, Chunk& v);
void to_json(nlohmann::json& j, const EvidencePair& v);
void from_json(const nlohmann::json& j, EvidencePair& v);
void to_json(nlohmann::json& j, const EntailmentJudgment& v);
void from_json(const nlohmann::json& j, EntailmentJudgment& v);
void to_json(nlohmann::json& j, const VerificationMetrics& v);
void from_json(const nlohmann::json& j, VerificationMetrics& v);
void to_json(nlohmann::json& j, const VerificationReport& v);
void from_json(const nlohmann::json& j, VerificationReport& v);
void to_json(nlohmann::json& j, const TraceRound& v);
void from_json(const nlohmann::json& j, TraceRound& v);
void to_json(nlohmann::json& j, const RefinementTrace& v);
void from_json(const nlohmann::json& j, RefinementTrace& v);

}  // namespace vpr
