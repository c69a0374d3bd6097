#pragma once

#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "vpr/pipeline.hpp"

namespace vpr {

// One line of a batch input file.
struct BatchRecord {
    std::string id;
    std::string prompt;
};

// One line of a batch output file. A non-empty error marks a record that
// failed without aborting the batch.
struct BatchResult {
    int schema_version = 1;
    std::string id;
    std::string original_prompt;
    std::string refined_prompt;
    std::string tag;
    int rounds_used = 0;
    double coverage = 0.0;
    double contradiction = 0.0;
    bool accepted = false;
    bool router_fallback = false;
    int degraded_validations = 0;
    bool degenerate_atoms = false;
    std::string error;

    bool ok() const { return error.empty(); }
};

void to_json(nlohmann::json& j, const BatchRecord& v);
void from_json(const nlohmann::json& j, BatchRecord& v);
void to_json(nlohmann::json& j, const BatchResult& v);
void from_json(const nlohmann::json& j, BatchResult& v);

struct RoundStatsEntry {
    int count = 0;
    double proportion = 0.0;
};

// Histogram of rounds_used over completed results; proportions sum to 1.
struct RoundStats {
    std::map<int, RoundStatsEntry> histogram;
    int total = 0;
};

RoundStats compute_round_stats(const std::vector<BatchResult>& results);

// Buckets word counts into [k*width, (k+1)*width), keyed by bucket start.
std::map<int, int> word_length_histogram(const std::vector<std::string>& texts,
                                         int bucket_width = 5);

// Round statistics, acceptance rate, tag distribution and original-vs-refined
// length histograms, as printed by the stats subcommand.
std::string format_stats_report(const std::vector<BatchResult>& results);

// One JSON config document: backend, pipeline, chunker and per-agent overrides.
struct HarnessConfig {
    BackendConfig backend;
    PipelineConfig pipeline;
    AgentSettings agents;
    std::string backend_mode = "http";  // "http" | "scripted"
    std::string scripted_path;
    std::string templates_dir;  // optional override of the built-in templates
    std::string api_key_env = "VPR_API_KEY";
};

HarnessConfig harness_config_from_json(const nlohmann::json& j);
HarnessConfig load_harness_config(const std::string& path);  // throws ConfigError

struct CliOptions {
    std::string config_path;
    std::string backend;  // endpoint url, or scripted:<path>
    std::string prompt;
    std::string input_path;
    std::string output_path;
    std::string trace_path;
    int max_rounds = 0;       // 0 = keep config value
    int chunk_threshold = 0;  // 0 = keep config value
    int workers = 0;          // 0 = default 4
    std::string verbosity;    // "", "summary", "full"
};

// Exit codes: 0 accepted, 2 round budget exhausted without acceptance,
// 1 hard error (bad config, backend failure).
int cmd_refine(const CliOptions& options, std::ostream& out, std::ostream& err);

// Runs every record with bounded worker concurrency, emitting one result line
// per input line in input order; per-record failures become error records.
int cmd_batch(const CliOptions& options, std::ostream& out, std::ostream& err);

int cmd_stats(const CliOptions& options, std::ostream& out, std::ostream& err);

}  // namespace vpr
