#pragma once

#include <memory>

#include "vpr/agents.hpp"
#include "vpr/gateway.hpp"
#include "vpr/templates.hpp"
#include "vpr/types.hpp"
#include "vpr/verify.hpp"

namespace vpr {

struct PipelineConfig {
    int max_rounds = 5;
    ChunkerConfig chunker;
    int validator_parallelism = 4;
    TraceVerbosity trace_verbosity = TraceVerbosity::Summary;
};

struct PipelineBackends {
    std::shared_ptr<ChatBackend> chat;
    std::shared_ptr<EmbeddingBackend> embedding;
    BackendConfig config;
    TemplateSet templates = TemplateSet::builtin();
    AgentSettings agents;
};

// One verification round over the fixed atom list: chunk, match, validate,
// score, decide. Judgments come back in atom-index order regardless of
// validator concurrency. When artifacts is given, chunks / similarity /
// raw validator outputs are recorded into it.
VerificationReport run_verification_round(const std::vector<Atom>& atoms,
                                          const RefinedPrompt& refined,
                                          const PipelineConfig& config,
                                          const PipelineBackends& backends,
                                          TraceRound* artifacts = nullptr);

// Runs the full five-stage pipeline: route, synthesize policy, refine, then
// verify-and-revise until strict acceptance or the round budget runs out.
// The atom dictionary is computed once from the user prompt and held fixed.
// Hard agent errors raise PipelineError carrying the partial trace; loop
// exhaustion is not an error (the trace returns with accepted = false).
RefinementTrace run_pipeline(const UserPrompt& prompt, const PipelineConfig& config,
                             const PipelineBackends& backends);

}  // namespace vpr
