#include "vpr/agents.hpp"

namespace vpr {

// Definitions and examples mirror the router template so the policy agent is
// conditioned on the same wording the router classifies against.
const std::vector<TaxonomyEntry>& taxonomy() {
    static const std::vector<TaxonomyEntry> entries = {
        {ScenarioTag::AbstractDescriptions,
         "metaphorical/symbolic/abstract intent; requires semantic grounding beyond "
         "literal objects.",
         "Hope dances in a field of forgotten dreams.", 1},
        {ScenarioTag::ComplexSpatialRelations,
         "explicit geometric relations (left/right/between/center/above/behind) that "
         "must be satisfied.",
         "A cat sits between a dog and a parrot hovering above them.", 2},
        {ScenarioTag::MultiElementScenes,
         "high visual density; many salient entities/objects; preserving completeness "
         "and counts.",
         "Ten performers dance under fireworks in a crowded plaza.", 3},
        {ScenarioTag::FineGrainedAppearance,
         "identity/textures/text/small details/materials are essential.",
         "A close-up of a cracked porcelain cup with visible glaze texture.", 4},
        {ScenarioTag::TemporalConsistency,
         "time evolution or long-range continuity is central (blooming, melting, state "
         "progression).",
         "A flower bud slowly opens into full bloom.", 5},
        {ScenarioTag::StylisticHybrids,
         "multiple distinct styles must co-exist coherently (e.g., oil painting + "
         "cyberpunk).",
         "A medieval castle rendered in cyberpunk neon style.", 6},
        {ScenarioTag::CausalityPhysics,
         "cause-effect chains or physically plausible dynamics are required (falling, "
         "shattering, splashing).",
         "A glass is pushed off a table and shatters on the floor.", 7},
        {ScenarioTag::CameraMotion,
         "camera trajectory is central (pan/tilt/zoom/orbit/tracking shot).",
         "The camera slowly pans across a busy marketplace.", 8},
        {ScenarioTag::ObjectInteraction,
         "explicit contact/manipulation between entities (pick up/pour/collide/grasp), "
         "interaction-driven motion/occlusion.",
         "A person pours water into a cup and places it down.", 9},
        {ScenarioTag::SceneTransitions,
         "multi-shot structure, cuts, or transitions are essential.",
         "The scene cuts from a city street to a quiet bedroom at night.", 10},
        {ScenarioTag::NonDifficult, "none of the above applies.",
         "A child runs across a field.", 11},
    };
    return entries;
}

const TaxonomyEntry& taxonomy_entry(ScenarioTag tag) {
    for (const TaxonomyEntry& entry : taxonomy()) {
        if (entry.tag == tag) return entry;
    }
    throw Error("no taxonomy entry for tag");
}

}  // namespace vpr
