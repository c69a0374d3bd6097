#include "vpr/pipeline.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace vpr {

namespace {

void validate_config(const PipelineConfig& config) {
    if (config.max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
    if (config.validator_parallelism < 1) {
        throw ConfigError("validator_parallelism must be >= 1");
    }
    if (config.chunker.min_words_per_chunk < 1) {
        throw ConfigError("min_words_per_chunk must be >= 1");
    }
}

// Validates every pair, filling judgments/raws by atom position. Scripted
// backends replay a fixed response stream, so they are consumed strictly in
// atom order; everything else fans out across a bounded pool.
void validate_pairs(const std::vector<EvidencePair>& pairs, const AgentRuntime& rt,
                    const std::string& refined_text, int parallelism,
                    std::vector<EntailmentJudgment>& judgments,
                    std::vector<std::string>& raws) {
    const std::size_t n = pairs.size();
    judgments.resize(n);
    raws.resize(n);
    if (parallelism <= 1 || rt.chat_backend.ordered_replay() || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            ValidateOutcome outcome = validate_entailment(pairs[i], rt, refined_text);
            judgments[i] = std::move(outcome.judgment);
            raws[i] = std::move(outcome.raw_response);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                ValidateOutcome outcome = validate_entailment(pairs[i], rt, refined_text);
                judgments[i] = std::move(outcome.judgment);
                raws[i] = std::move(outcome.raw_response);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(parallelism), n);
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

VerificationReport run_verification_round(const std::vector<Atom>& atoms,
                                          const RefinedPrompt& refined,
                                          const PipelineConfig& config,
                                          const PipelineBackends& backends,
                                          TraceRound* artifacts) {
    const std::vector<Chunk> chunks = chunk(refined.text, config.chunker);
    if (artifacts) artifacts->chunks = chunks;

    VerificationReport report;
    if (atoms.empty()) {
        // Nothing to verify: flagged degenerate acceptance.
        report.metrics = compute_metrics({});
        report.accepted = check_acceptance(report.metrics);
        return report;
    }

    SimilarityMatrix matrix;
    const std::vector<EvidencePair> pairs =
        match_atoms(atoms, chunks, *backends.embedding, backends.config, &matrix);
    if (artifacts) artifacts->similarity = matrix.rows();

    AgentRuntime rt{*backends.chat, backends.config, backends.templates, backends.agents};
    std::vector<std::string> raws;
    validate_pairs(pairs, rt, refined.text, config.validator_parallelism,
                   report.judgments, raws);
    if (artifacts) artifacts->validator_raw = std::move(raws);

    report.metrics = compute_metrics(report.judgments);
    report.accepted = check_acceptance(report.metrics);
    return report;
}

RefinementTrace run_pipeline(const UserPrompt& prompt, const PipelineConfig& config,
                             const PipelineBackends& backends) {
    validate_config(config);
    if (!backends.chat || !backends.embedding) {
        throw ConfigError("pipeline needs both a chat and an embedding backend");
    }

    RefinementTrace trace;
    trace.user_prompt = prompt;
    const AgentRuntime rt{*backends.chat, backends.config, backends.templates,
                          backends.agents};
    try {
        trace.routing = route_scenario(prompt, rt);

        PolicyOutcome policy =
            synthesize_policy(prompt, trace.routing, taxonomy_entry(trace.routing.tag), rt);
        trace.policy = std::move(policy.policy);
        trace.policy_raw = std::move(policy.raw_response);

        RefineOutcome refined = refine_prompt(prompt, trace.policy, rt);
        trace.refiner_raw = std::move(refined.raw_response);
        RefinedPrompt current = std::move(refined.prompt);

        // Atomic constraints are extracted once and stay fixed across rounds.
        AtomizeOutcome atomized = atomize(prompt, rt);
        trace.atom_dictionary = std::move(atomized.dictionary);
        trace.dropped_atoms = std::move(atomized.dropped);
        trace.atomizer_raw = std::move(atomized.raw_response);
        trace.atoms = flatten_atoms(trace.atom_dictionary);

        for (int round = 1; round <= config.max_rounds; ++round) {
            TraceRound record;
            record.prompt = current;
            record.report =
                run_verification_round(trace.atoms, current, config, backends, &record);
            trace.rounds.push_back(std::move(record));

            if (trace.rounds.back().report.accepted) {
                trace.accepted = true;
                break;
            }
            if (round == config.max_rounds) break;

            const VerificationIssues issues =
                collect_issues(trace.rounds.back().report.judgments);
            if (issues.empty()) break;  // unreachable under strict acceptance

            RefineOutcome revised = revise(prompt, current, issues, rt);
            trace.rounds.back().reviser_raw = std::move(revised.raw_response);
            current = std::move(revised.prompt);
        }

        trace.rounds_used = static_cast<int>(trace.rounds.size());
        trace.final_prompt = trace.rounds.back().prompt;
        return trace;
    } catch (const PipelineError&) {
        throw;
    } catch (const Error& e) {
        trace.rounds_used = static_cast<int>(trace.rounds.size());
        if (!trace.rounds.empty()) trace.final_prompt = trace.rounds.back().prompt;
        throw PipelineError(e.what(), trace_to_json(trace, TraceVerbosity::Full));
    }
}

}  // namespace vpr
