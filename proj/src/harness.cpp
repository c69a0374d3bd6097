#include "vpr/harness.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>
#include <utility>

#include "vpr/scripted.hpp"
#include "vpr/strings.hpp"

namespace vpr {

// ---------------------------------------------------------------------------
// Batch record / result serialization
// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const BatchRecord& v) {
    j = nlohmann::json{{"id", v.id}, {"prompt", v.prompt}};
}

void from_json(const nlohmann::json& j, BatchRecord& v) {
    j.at("id").get_to(v.id);
    j.at("prompt").get_to(v.prompt);
}

void to_json(nlohmann::json& j, const BatchResult& v) {
    j = nlohmann::json{{"schema_version", v.schema_version},
                       {"id", v.id},
                       {"original_prompt", v.original_prompt},
                       {"refined_prompt", v.refined_prompt},
                       {"tag", v.tag},
                       {"rounds_used", v.rounds_used},
                       {"coverage", v.coverage},
                       {"contradiction", v.contradiction},
                       {"accepted", v.accepted},
                       {"router_fallback", v.router_fallback},
                       {"degraded_validations", v.degraded_validations},
                       {"degenerate_atoms", v.degenerate_atoms}};
    if (!v.error.empty()) j["error"] = v.error;
}

void from_json(const nlohmann::json& j, BatchResult& v) {
    v.schema_version = j.value("schema_version", 1);
    v.id = j.value("id", std::string{});
    v.original_prompt = j.value("original_prompt", std::string{});
    v.refined_prompt = j.value("refined_prompt", std::string{});
    v.tag = j.value("tag", std::string{});
    v.rounds_used = j.value("rounds_used", 0);
    v.coverage = j.value("coverage", 0.0);
    v.contradiction = j.value("contradiction", 0.0);
    v.accepted = j.value("accepted", false);
    v.router_fallback = j.value("router_fallback", false);
    v.degraded_validations = j.value("degraded_validations", 0);
    v.degenerate_atoms = j.value("degenerate_atoms", false);
    v.error = j.value("error", std::string{});
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

RoundStats compute_round_stats(const std::vector<BatchResult>& results) {
    RoundStats stats;
    for (const BatchResult& result : results) {
        if (!result.ok() || result.rounds_used < 1) continue;
        ++stats.histogram[result.rounds_used].count;
        ++stats.total;
    }
    for (auto& [rounds, entry] : stats.histogram) {
        entry.proportion = static_cast<double>(entry.count) / stats.total;
    }
    return stats;
}

std::map<int, int> word_length_histogram(const std::vector<std::string>& texts,
                                         int bucket_width) {
    std::map<int, int> histogram;
    for (const std::string& text : texts) {
        const int words = static_cast<int>(word_count(text));
        ++histogram[(words / bucket_width) * bucket_width];
    }
    return histogram;
}

namespace {

std::string fmt_pct(double fraction) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << fraction * 100.0 << "%";
    return out.str();
}

}  // namespace

std::string format_stats_report(const std::vector<BatchResult>& results) {
    std::ostringstream out;
    int errors = 0;
    int accepted = 0;
    std::map<std::string, int> tags;
    std::vector<std::string> originals;
    std::vector<std::string> refined;
    for (const BatchResult& result : results) {
        if (!result.ok()) {
            ++errors;
            continue;
        }
        if (result.accepted) ++accepted;
        ++tags[result.tag];
        originals.push_back(result.original_prompt);
        refined.push_back(result.refined_prompt);
    }
    const int completed = static_cast<int>(results.size()) - errors;

    out << "results: " << results.size() << " (errors: " << errors << ")\n";
    if (completed > 0) {
        out << "accepted: " << accepted << " ("
            << fmt_pct(static_cast<double>(accepted) / completed) << ")\n";
    }

    const RoundStats rounds = compute_round_stats(results);
    out << "rounds used:\n";
    for (const auto& [count, entry] : rounds.histogram) {
        out << "  " << count << ": " << entry.count << " (" << fmt_pct(entry.proportion)
            << ")\n";
    }

    out << "scenario tags:\n";
    for (const auto& [tag, count] : tags) {
        out << "  " << tag << ": " << count << " ("
            << fmt_pct(static_cast<double>(count) / completed) << ")\n";
    }

    const auto original_hist = word_length_histogram(originals);
    const auto refined_hist = word_length_histogram(refined);
    out << "prompt length (words, bucket width 5): original | refined\n";
    int max_bucket = 0;
    for (const auto& [bucket, _] : original_hist) max_bucket = std::max(max_bucket, bucket);
    for (const auto& [bucket, _] : refined_hist) max_bucket = std::max(max_bucket, bucket);
    for (int bucket = 0; bucket <= max_bucket; bucket += 5) {
        const auto o = original_hist.find(bucket);
        const auto r = refined_hist.find(bucket);
        out << "  [" << bucket << "," << bucket + 5
            << "): " << (o == original_hist.end() ? 0 : o->second) << " | "
            << (r == refined_hist.end() ? 0 : r->second) << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

namespace {

void read_agent_params(const nlohmann::json& j, const std::string& name,
                       AgentParams& params) {
    if (!j.contains(name)) return;
    const auto& a = j.at(name);
    params.model_id = a.value("model", params.model_id);
    params.temperature = a.value("temperature", params.temperature);
    params.max_tokens = a.value("max_tokens", params.max_tokens);
}

}  // namespace

HarnessConfig harness_config_from_json(const nlohmann::json& j) {
    HarnessConfig config;
    if (j.contains("backend")) {
        const auto& b = j.at("backend");
        config.backend.chat_endpoint_url =
            b.value("chat_endpoint_url", config.backend.chat_endpoint_url);
        config.backend.embedding_endpoint_url =
            b.value("embedding_endpoint_url", config.backend.embedding_endpoint_url);
        config.backend.api_key = b.value("api_key", config.backend.api_key);
        config.backend.retry_limit = b.value("retry_limit", config.backend.retry_limit);
        config.backend.timeout =
            std::chrono::milliseconds{b.value("timeout_ms", config.backend.timeout.count())};
        config.backend.retry_backoff = std::chrono::milliseconds{
            b.value("retry_backoff_ms", config.backend.retry_backoff.count())};
        config.backend.chat_model = b.value("chat_model", config.backend.chat_model);
        config.backend.embedding_model =
            b.value("embedding_model", config.backend.embedding_model);
        config.api_key_env = b.value("api_key_env", config.api_key_env);
        config.backend_mode = b.value("mode", config.backend_mode);
        config.scripted_path = b.value("scripted_path", config.scripted_path);
    }
    if (j.contains("pipeline")) {
        const auto& p = j.at("pipeline");
        config.pipeline.max_rounds = p.value("max_rounds", config.pipeline.max_rounds);
        config.pipeline.validator_parallelism =
            p.value("validator_parallelism", config.pipeline.validator_parallelism);
        const std::string verbosity = p.value("trace_verbosity", std::string{"summary"});
        if (verbosity == "full") {
            config.pipeline.trace_verbosity = TraceVerbosity::Full;
        } else if (verbosity == "summary") {
            config.pipeline.trace_verbosity = TraceVerbosity::Summary;
        } else {
            throw ConfigError("trace_verbosity must be \"summary\" or \"full\"");
        }
    }
    if (j.contains("chunker")) {
        config.pipeline.chunker.min_words_per_chunk = j.at("chunker").value(
            "min_words_per_chunk", config.pipeline.chunker.min_words_per_chunk);
    }
    if (j.contains("agents")) {
        const auto& a = j.at("agents");
        read_agent_params(a, "router", config.agents.router);
        read_agent_params(a, "policy", config.agents.policy);
        read_agent_params(a, "refiner", config.agents.refiner);
        read_agent_params(a, "atomizer", config.agents.atomizer);
        read_agent_params(a, "validator", config.agents.validator);
        read_agent_params(a, "reviser", config.agents.reviser);
        config.agents.validator_include_refined_prompt =
            a.value("validator_include_refined_prompt",
                    config.agents.validator_include_refined_prompt);
        config.agents.max_attempts = a.value("max_attempts", config.agents.max_attempts);
    }
    config.templates_dir = j.value("templates_dir", config.templates_dir);
    return config;
}

HarnessConfig load_harness_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    try {
        nlohmann::json j;
        in >> j;
        return harness_config_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid config file " + path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Backend wiring
// ---------------------------------------------------------------------------

namespace {

struct ScriptedFile {
    std::vector<ScriptEntry> default_script;
    std::map<std::string, std::vector<ScriptEntry>> per_record;
};

ScriptedFile load_scripted_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read scripted backend file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid scripted backend file " + path + ": " + e.what());
    }
    ScriptedFile file;
    if (j.is_array()) {
        file.default_script = script_from_json(j);
        return file;
    }
    if (j.contains("responses")) file.default_script = script_from_json(j.at("responses"));
    if (j.contains("default")) file.default_script = script_from_json(j.at("default"));
    if (j.contains("per_record")) {
        for (const auto& [id, script] : j.at("per_record").items()) {
            file.per_record[id] = script_from_json(script);
        }
    }
    if (file.default_script.empty() && file.per_record.empty()) {
        throw ConfigError("scripted backend file has no responses: " + path);
    }
    return file;
}

using BackendFactory = std::function<PipelineBackends(const std::string& record_id)>;

struct Runtime {
    HarnessConfig config;
    BackendFactory factory;
};

Runtime build_runtime(const CliOptions& options) {
    HarnessConfig config = options.config_path.empty()
                               ? HarnessConfig{}
                               : load_harness_config(options.config_path);

    if (!options.backend.empty()) {
        if (options.backend.rfind("scripted:", 0) == 0) {
            config.backend_mode = "scripted";
            config.scripted_path = options.backend.substr(9);
        } else {
            config.backend_mode = "http";
            config.backend.chat_endpoint_url = options.backend;
        }
    }
    if (options.max_rounds > 0) config.pipeline.max_rounds = options.max_rounds;
    if (options.chunk_threshold > 0) {
        config.pipeline.chunker.min_words_per_chunk = options.chunk_threshold;
    }
    if (!options.verbosity.empty()) {
        if (options.verbosity == "full") {
            config.pipeline.trace_verbosity = TraceVerbosity::Full;
        } else if (options.verbosity == "summary") {
            config.pipeline.trace_verbosity = TraceVerbosity::Summary;
        } else {
            throw ConfigError("--verbosity must be summary or full");
        }
    }
    if (config.backend.api_key.empty()) {
        if (const char* key = std::getenv(config.api_key_env.c_str())) {
            config.backend.api_key = key;
        }
    }

    TemplateSet templates = config.templates_dir.empty()
                                ? TemplateSet::builtin()
                                : TemplateSet::load_dir(config.templates_dir);

    Runtime runtime;
    if (config.backend_mode == "scripted") {
        if (config.scripted_path.empty()) {
            throw ConfigError("scripted backend selected but no script path given");
        }
        auto file = std::make_shared<ScriptedFile>(load_scripted_file(config.scripted_path));
        runtime.factory = [config, templates, file](const std::string& record_id) {
            const auto it = file->per_record.find(record_id);
            const auto& script =
                it != file->per_record.end() ? it->second : file->default_script;
            if (script.empty()) {
                throw ConfigError("no script for record \"" + record_id + "\"");
            }
            return PipelineBackends{std::make_shared<ScriptedChatBackend>(script),
                                    std::make_shared<CharFrequencyEmbeddingBackend>(),
                                    config.backend, templates, config.agents};
        };
    } else if (config.backend_mode == "http") {
        if (config.backend.chat_endpoint_url.empty()) {
            throw ConfigError("no chat endpoint configured (set --backend or the config file)");
        }
        if (config.backend.embedding_endpoint_url.empty()) {
            // Chat-completion endpoints usually have an /embeddings sibling.
            const std::string& url = config.backend.chat_endpoint_url;
            const std::string tail = "/chat/completions";
            if (url.size() > tail.size() &&
                url.compare(url.size() - tail.size(), tail.size(), tail) == 0) {
                config.backend.embedding_endpoint_url =
                    url.substr(0, url.size() - tail.size()) + "/embeddings";
            } else {
                throw ConfigError(
                    "no embedding endpoint configured (set backend.embedding_endpoint_url)");
            }
        }
        auto chat_backend = std::make_shared<HttpChatBackend>(config.backend);
        auto embedding_backend = std::make_shared<HttpEmbeddingBackend>(config.backend);
        runtime.factory = [config, templates, chat_backend,
                           embedding_backend](const std::string&) {
            return PipelineBackends{chat_backend, embedding_backend, config.backend,
                                    templates, config.agents};
        };
    } else {
        throw ConfigError("unknown backend mode: \"" + config.backend_mode + "\"");
    }
    runtime.config = std::move(config);
    return runtime;
}

BatchResult result_from_trace(const BatchRecord& record, const RefinementTrace& trace) {
    BatchResult result;
    result.id = record.id;
    result.original_prompt = record.prompt;
    result.refined_prompt = trace.final_prompt.text;
    result.tag = to_label(trace.routing.tag);
    result.rounds_used = trace.rounds_used;
    if (!trace.rounds.empty()) {
        result.coverage = trace.rounds.back().report.metrics.coverage();
        result.contradiction = trace.rounds.back().report.metrics.contradiction();
    }
    result.accepted = trace.accepted;
    result.router_fallback = trace.routing.fallback;
    for (const TraceRound& round : trace.rounds) {
        for (const EntailmentJudgment& judgment : round.report.judgments) {
            if (judgment.degraded) ++result.degraded_validations;
        }
    }
    result.degenerate_atoms = trace.atoms.empty();
    return result;
}

}  // namespace

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_refine(const CliOptions& options, std::ostream& out, std::ostream& err) {
    try {
        const Runtime runtime = build_runtime(options);
        const UserPrompt prompt(options.prompt);
        const PipelineBackends backends = runtime.factory("");
        const RefinementTrace trace =
            run_pipeline(prompt, runtime.config.pipeline, backends);
        out << trace.final_prompt.text << "\n";
        if (!options.trace_path.empty()) {
            std::ofstream trace_out(options.trace_path);
            if (!trace_out) throw ConfigError("cannot write trace file: " + options.trace_path);
            trace_out << trace_to_json(trace, runtime.config.pipeline.trace_verbosity).dump(2)
                      << "\n";
        }
        return trace.accepted ? 0 : 2;
    } catch (const PipelineError& e) {
        err << "error: " << e.what() << "\n";
        if (!options.trace_path.empty()) {
            std::ofstream trace_out(options.trace_path);
            if (trace_out) trace_out << e.partial_trace.dump(2) << "\n";
        }
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_batch(const CliOptions& options, std::ostream& out, std::ostream& err) {
    Runtime runtime;
    std::vector<std::string> lines;
    try {
        runtime = build_runtime(options);
        std::ifstream in(options.input_path);
        if (!in) throw ConfigError("cannot read batch input: " + options.input_path);
        std::string line;
        while (std::getline(in, line)) {
            if (!trim(line).empty()) lines.push_back(line);
        }
        if (lines.empty()) throw ConfigError("batch input holds no records");
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    std::vector<BatchResult> results(lines.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= lines.size()) return;
            BatchRecord record;
            record.id = "line-" + std::to_string(i + 1);
            try {
                record = nlohmann::json::parse(lines[i]).get<BatchRecord>();
                if (trim(record.prompt).empty()) throw ConfigError("prompt is empty");
                const RefinementTrace trace = run_pipeline(
                    UserPrompt(record.prompt), runtime.config.pipeline,
                    runtime.factory(record.id));
                results[i] = result_from_trace(record, trace);
            } catch (const std::exception& e) {
                // Per-record isolation: one bad record never aborts the batch.
                BatchResult failure;
                failure.id = record.id;
                failure.original_prompt = record.prompt;
                failure.error = e.what();
                results[i] = std::move(failure);
            }
        }
    };
    const std::size_t workers =
        std::min<std::size_t>(options.workers > 0 ? options.workers : 4, lines.size());
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    try {
        std::ostream* sink = &out;
        std::ofstream file;
        if (!options.output_path.empty()) {
            file.open(options.output_path);
            if (!file) throw ConfigError("cannot write batch output: " + options.output_path);
            sink = &file;
        }
        for (const BatchResult& result : results) {
            *sink << nlohmann::json(result).dump() << "\n";
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int cmd_stats(const CliOptions& options, std::ostream& out, std::ostream& err) {
    std::ifstream in(options.input_path);
    if (!in) {
        err << "error: cannot read results file: " << options.input_path << "\n";
        return 1;
    }
    std::vector<BatchResult> results;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        try {
            results.push_back(nlohmann::json::parse(line).get<BatchResult>());
        } catch (const std::exception& e) {
            err << "error: bad result line " << line_number << ": " << e.what() << "\n";
            return 1;
        }
    }
    if (results.empty()) {
        err << "error: no results in " << options.input_path << "\n";
        return 1;
    }
    out << format_stats_report(results);
    return 0;
}

}  // namespace vpr
