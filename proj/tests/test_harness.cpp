#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <sys/wait.h>
#include <thread>

#include <httplib.h>

#include "vpr/scripted.hpp"

#include "vpr/harness.hpp"

#include "support.hpp"

using namespace vpr;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;

    TempDir() {
        path = fs::temp_directory_path() /
               ("vpr-test-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }

    std::string file(const std::string& name, const std::string& content) const {
        const fs::path p = path / name;
        std::ofstream out(p);
        out << content;
        return p.string();
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// Per-record script: router, policy, refiner, atomizer, then one ET validator.
nlohmann::json accept_script() {
    return nlohmann::json::array(
        {R"({"label": "Non-difficult", "reason": "plain"})",
         R"({"policy": {"intent": "i", "principles": "p", "rules": "r"}})",
         "A small cat sits quietly on a wooden floor in soft light.",
         R"({"characters": ["cat"], "objects": [], "actions": [], "locations": [], "scenery": []})",
         R"({"label": "ET", "reason": "supported"})"});
}

}  // namespace

TEST_CASE("batch processes every record in order with one result line each") {
    TempDir dir;
    const std::string script =
        dir.file("script.json", nlohmann::json{{"responses", accept_script()}}.dump());
    const std::string input = dir.file(
        "in.jsonl",
        R"({"id": "a", "prompt": "A cat."})" "\n"
        R"({"id": "b", "prompt": "A dog."})" "\n"
        R"({"id": "c", "prompt": "A bird."})" "\n");
    const std::string output = (dir.path / "out.jsonl").string();

    CliOptions options;
    options.backend = "scripted:" + script;
    options.input_path = input;
    options.output_path = output;

    std::ostringstream out, err;
    CHECK(cmd_batch(options, out, err) == 0);

    std::ifstream results(output);
    std::string line;
    std::vector<BatchResult> parsed;
    while (std::getline(results, line)) {
        parsed.push_back(nlohmann::json::parse(line).get<BatchResult>());
    }
    REQUIRE(parsed.size() == 3);
    CHECK(parsed[0].id == "a");
    CHECK(parsed[1].id == "b");
    CHECK(parsed[2].id == "c");
    for (const auto& result : parsed) {
        CHECK(result.ok());
        CHECK(result.accepted);
        CHECK(result.rounds_used == 1);
        CHECK(result.coverage == 1.0);
        CHECK(result.schema_version == 1);
    }
}

TEST_CASE("a malformed batch line becomes an error record without aborting") {
    TempDir dir;
    const std::string script =
        dir.file("script.json", nlohmann::json{{"responses", accept_script()}}.dump());
    const std::string input = dir.file("in.jsonl",
                                       R"({"id": "a", "prompt": "A cat."})" "\n"
                                       "this is not json\n"
                                       R"({"id": "c", "prompt": "A bird."})" "\n");

    CliOptions options;
    options.backend = "scripted:" + script;
    options.input_path = input;
    options.output_path = (dir.path / "out.jsonl").string();

    std::ostringstream out, err;
    CHECK(cmd_batch(options, out, err) == 0);

    std::ifstream results(options.output_path);
    std::string line;
    std::vector<BatchResult> parsed;
    while (std::getline(results, line)) {
        parsed.push_back(nlohmann::json::parse(line).get<BatchResult>());
    }
    REQUIRE(parsed.size() == 3);
    CHECK(parsed[0].ok());
    CHECK_FALSE(parsed[1].ok());
    CHECK(parsed[1].id == "line-2");
    CHECK(parsed[2].ok());
}

TEST_CASE("worker count never changes batch output content") {
    TempDir dir;
    const std::string script =
        dir.file("script.json", nlohmann::json{{"responses", accept_script()}}.dump());
    std::string records;
    for (int i = 0; i < 12; ++i) {
        records += nlohmann::json{{"id", "r" + std::to_string(i)},
                                  {"prompt", "Prompt number " + std::to_string(i)}}
                       .dump() +
                   "\n";
    }
    const std::string input = dir.file("in.jsonl", records);

    auto run_with_workers = [&](int workers) {
        CliOptions options;
        options.backend = "scripted:" + script;
        options.input_path = input;
        options.output_path = (dir.path / ("out" + std::to_string(workers))).string();
        options.workers = workers;
        std::ostringstream out, err;
        REQUIRE(cmd_batch(options, out, err) == 0);
        return read_file(options.output_path);
    };
    CHECK(run_with_workers(1) == run_with_workers(4));
    CHECK(run_with_workers(4) == run_with_workers(8));
}

TEST_CASE("per-record scripts drive per-record outcomes") {
    TempDir dir;
    nlohmann::json two_round = nlohmann::json::array(
        {R"({"label": "Non-difficult", "reason": "plain"})",
         R"({"policy": {"intent": "i", "principles": "p", "rules": "r"}})",
         "A small cat sits quietly on a wooden floor in soft light.",
         R"({"characters": ["cat"], "objects": [], "actions": [], "locations": [], "scenery": []})",
         R"({"label": "MS", "reason": "missing"})",
         "A small cat sits quietly and visibly on the floor in light.",
         R"({"label": "ET", "reason": "supported"})"});
    const std::string script = dir.file(
        "script.json", nlohmann::json{{"default", accept_script()},
                                      {"per_record", {{"slow", two_round}}}}
                           .dump());
    const std::string input = dir.file("in.jsonl",
                                       R"({"id": "fast", "prompt": "A cat."})" "\n"
                                       R"({"id": "slow", "prompt": "A cat."})" "\n");

    CliOptions options;
    options.backend = "scripted:" + script;
    options.input_path = input;
    options.output_path = (dir.path / "out.jsonl").string();
    std::ostringstream out, err;
    REQUIRE(cmd_batch(options, out, err) == 0);

    std::ifstream results(options.output_path);
    std::string line;
    std::getline(results, line);
    CHECK(nlohmann::json::parse(line).get<BatchResult>().rounds_used == 1);
    std::getline(results, line);
    CHECK(nlohmann::json::parse(line).get<BatchResult>().rounds_used == 2);
}

TEST_CASE("a 946-record batch reproduces the expected round proportions") {
    TempDir dir;
    // Per-record scripts: 818 accept on round 1, 118 on round 2, 10 on round 3.
    auto script_for_rounds = [](int rounds) {
        nlohmann::json script = nlohmann::json::array(
            {R"({"label": "Non-difficult", "reason": "plain"})",
             R"({"policy": {"intent": "i", "principles": "p", "rules": "r"}})",
             "A small cat sits quietly on a wooden floor in soft light.",
             R"({"characters": ["cat"], "objects": [], "actions": [], "locations": [], "scenery": []})"});
        for (int r = 1; r < rounds; ++r) {
            script.push_back(R"({"label": "MS", "reason": "missing"})");
            script.push_back("Revision " + std::to_string(r) + " of the cat scene.");
        }
        script.push_back(R"({"label": "ET", "reason": "supported"})");
        return script;
    };

    nlohmann::json per_record = nlohmann::json::object();
    std::string records;
    int next_id = 0;
    auto add_records = [&](int count, int rounds) {
        for (int k = 0; k < count; ++k) {
            const std::string id = "p" + std::to_string(next_id++);
            per_record[id] = script_for_rounds(rounds);
            records += nlohmann::json{{"id", id}, {"prompt", "A cat."}}.dump() + "\n";
        }
    };
    add_records(818, 1);
    add_records(118, 2);
    add_records(10, 3);

    const std::string script =
        dir.file("script.json", nlohmann::json{{"per_record", per_record}}.dump());
    CliOptions options;
    options.backend = "scripted:" + script;
    options.input_path = dir.file("in.jsonl", records);
    options.output_path = (dir.path / "out.jsonl").string();
    options.workers = 8;
    std::ostringstream out, err;
    REQUIRE(cmd_batch(options, out, err) == 0);

    CliOptions stats_options;
    stats_options.input_path = options.output_path;
    std::ostringstream report, stats_err;
    REQUIRE(cmd_stats(stats_options, report, stats_err) == 0);
    CHECK(report.str().find("results: 946") != std::string::npos);
    CHECK(report.str().find("1: 818 (86.47%)") != std::string::npos);
    CHECK(report.str().find("2: 118 (12.47%)") != std::string::npos);
    CHECK(report.str().find("3: 10 (1.06%)") != std::string::npos);
}

TEST_CASE("round stats histogram counts and proportions") {
    std::vector<BatchResult> results(3);
    results[0].rounds_used = 1;
    results[1].rounds_used = 1;
    results[2].rounds_used = 2;

    const RoundStats stats = compute_round_stats(results);
    CHECK(stats.total == 3);
    CHECK(stats.histogram.at(1).count == 2);
    CHECK(stats.histogram.at(2).count == 1);
    CHECK(stats.histogram.at(1).proportion == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(stats.histogram.at(2).proportion == doctest::Approx(1.0 / 3).epsilon(1e-12));

    double sum = 0.0;
    for (const auto& [_, entry] : stats.histogram) sum += entry.proportion;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    const std::string report = format_stats_report(results);
    CHECK(report.find("1: 2 (66.67%)") != std::string::npos);
    CHECK(report.find("2: 1 (33.33%)") != std::string::npos);
}

TEST_CASE("stats on an empty or missing results file is an error") {
    TempDir dir;
    CliOptions missing;
    missing.input_path = (dir.path / "nope.jsonl").string();
    std::ostringstream out, err;
    CHECK(cmd_stats(missing, out, err) == 1);

    CliOptions empty;
    empty.input_path = dir.file("empty.jsonl", "");
    std::ostringstream out2, err2;
    CHECK(cmd_stats(empty, out2, err2) == 1);
    CHECK(err2.str().find("no results") != std::string::npos);
}

TEST_CASE("stats reports length histograms with 5-word buckets") {
    std::vector<BatchResult> results(2);
    results[0].rounds_used = 1;
    results[0].original_prompt = "one two three";              // 3 words -> [0,5)
    results[0].refined_prompt = "a b c d e f g";               // 7 words -> [5,10)
    results[1].rounds_used = 1;
    results[1].original_prompt = "one two three four five six";  // 6 -> [5,10)
    results[1].refined_prompt = "a b c d e f g h i j k l";        // 12 -> [10,15)

    const auto histogram = word_length_histogram(
        {results[0].original_prompt, results[1].original_prompt});
    CHECK(histogram.at(0) == 1);
    CHECK(histogram.at(5) == 1);

    const std::string report = format_stats_report(results);
    CHECK(report.find("[0,5): 1 | 0") != std::string::npos);
    CHECK(report.find("[5,10): 1 | 1") != std::string::npos);
    CHECK(report.find("[10,15): 0 | 1") != std::string::npos);
}

TEST_CASE("cmd_refine replays the case study end to end") {
    CliOptions options;
    options.prompt = "hope blooming in the dark";
    options.backend = "scripted:" + vpr::test::fixture_path("casestudy.json");
    TempDir dir;
    options.trace_path = (dir.path / "trace.json").string();
    options.verbosity = "summary";

    std::ostringstream out, err;
    CHECK(cmd_refine(options, out, err) == 0);
    CHECK(out.str().find("as if from nowhere") != std::string::npos);

    const auto trace = nlohmann::json::parse(read_file(options.trace_path));
    CHECK(trace.at("rounds_used") == 3);
    CHECK(trace.at("accepted") == true);
}

TEST_CASE("the chunk-threshold flag reshapes the evidence units") {
    auto chunks_in_round_one = [](int threshold) {
        CliOptions options;
        options.prompt = "hope blooming in the dark";
        options.backend = "scripted:" + vpr::test::fixture_path("casestudy.json");
        options.verbosity = "full";
        options.chunk_threshold = threshold;
        TempDir dir;
        options.trace_path = (dir.path / "trace.json").string();
        std::ostringstream out, err;
        REQUIRE(cmd_refine(options, out, err) == 0);
        const auto trace = nlohmann::json::parse(read_file(options.trace_path));
        return trace.at("rounds").at(0).at("chunks").size();
    };
    // The replayed refined prompt has two long sentences: separate chunks at
    // the default threshold, merged into one under a huge threshold.
    CHECK(chunks_in_round_one(8) == 2);
    CHECK(chunks_in_round_one(50) == 1);
}

TEST_CASE("cmd_refine exits 2 when the budget runs out unaccepted") {
    CliOptions options;
    options.prompt = "A cat.";
    options.backend = "scripted:" + vpr::test::fixture_path("never_accept.json");
    options.max_rounds = 2;
    std::ostringstream out, err;
    CHECK(cmd_refine(options, out, err) == 2);
}

TEST_CASE("cmd_refine exits 1 on a missing config file") {
    CliOptions options;
    options.prompt = "A cat.";
    options.config_path = "/nonexistent/config.json";
    std::ostringstream out, err;
    CHECK(cmd_refine(options, out, err) == 1);
    CHECK(err.str().find("error:") != std::string::npos);
}

TEST_CASE("cmd_refine exits 1 without any backend") {
    CliOptions options;
    options.prompt = "A cat.";
    std::ostringstream out, err;
    CHECK(cmd_refine(options, out, err) == 1);
}

TEST_CASE("config files override defaults") {
    TempDir dir;
    const std::string path = dir.file("config.json", R"({
        "backend": {
            "chat_endpoint_url": "http://example.test/v1/chat/completions",
            "embedding_endpoint_url": "http://example.test/v1/embeddings",
            "retry_limit": 7,
            "chat_model": "my-chat",
            "embedding_model": "my-embed"
        },
        "pipeline": {"max_rounds": 9, "validator_parallelism": 2, "trace_verbosity": "full"},
        "chunker": {"min_words_per_chunk": 3},
        "agents": {
            "router": {"temperature": 0.5, "model": "router-model"},
            "validator_include_refined_prompt": true
        }
    })");
    const HarnessConfig config = load_harness_config(path);
    CHECK(config.backend.retry_limit == 7);
    CHECK(config.backend.chat_model == "my-chat");
    CHECK(config.backend.embedding_model == "my-embed");
    CHECK(config.pipeline.max_rounds == 9);
    CHECK(config.pipeline.validator_parallelism == 2);
    CHECK(config.pipeline.trace_verbosity == TraceVerbosity::Full);
    CHECK(config.pipeline.chunker.min_words_per_chunk == 3);
    CHECK(config.agents.router.temperature == 0.5);
    CHECK(config.agents.router.model_id == "router-model");
    CHECK(config.agents.validator_include_refined_prompt);
    // Untouched defaults survive.
    CHECK(config.agents.policy.temperature == 0.7);
    CHECK(config.agents.atomizer.temperature == 0.0);
}

TEST_CASE("cmd_refine drives a full pipeline over live HTTP backends") {
    // Queue-served chat endpoint plus a deterministic embeddings endpoint.
    httplib::Server server;
    std::vector<std::string> responses = {
        R"({"label": "Non-difficult", "reason": "plain"})",
        R"({"policy": {"intent": "i", "principles": "p", "rules": "r"}})",
        "A small cat sits quietly on a wooden floor in soft light.",
        R"({"characters": ["cat"], "objects": [], "actions": [], "locations": [], "scenery": []})",
        R"({"label": "ET", "reason": "supported"})"};
    std::mutex mutex;
    std::size_t next = 0;
    std::string seen_auth;
    server.Post("/v1/chat/completions",
                [&](const httplib::Request& req, httplib::Response& res) {
                    std::lock_guard<std::mutex> lock(mutex);
                    seen_auth = req.get_header_value("Authorization");
                    const std::string content =
                        next < responses.size() ? responses[next++] : "";
                    res.set_content(
                        nlohmann::json{{"choices",
                                        {{{"message", {{"content", content}}}}}}}
                            .dump(),
                        "application/json");
                });
    server.Post("/v1/embeddings", [](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        nlohmann::json data = nlohmann::json::array();
        for (const auto& text : body.at("input")) {
            const auto v = vpr::CharFrequencyEmbeddingBackend::embed_one(
                text.get<std::string>());
            data.push_back({{"embedding", v.values}});
        }
        res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    TempDir dir;
    const std::string base = "http://127.0.0.1:" + std::to_string(port);

    setenv("VPR_API_KEY", "env-key", 1);
    CliOptions options;
    options.prompt = "A cat.";
    // The /embeddings sibling of the chat endpoint is derived automatically.
    options.backend = base + "/v1/chat/completions";
    std::ostringstream out, err;
    CHECK(cmd_refine(options, out, err) == 0);
    CHECK(out.str().find("A small cat sits quietly") != std::string::npos);
    CHECK(seen_auth == "Bearer env-key");
    unsetenv("VPR_API_KEY");

    server.stop();
    thread.join();
}

TEST_CASE("the installed binary wires the subcommands") {
    TempDir dir;
    const std::string out_file = (dir.path / "stdout.txt").string();
    const std::string command = std::string(VPR_CLI_PATH) +
                                " refine --prompt \"hope blooming in the dark\"" +
                                " --backend scripted:" +
                                vpr::test::fixture_path("casestudy.json") + " > " +
                                out_file + " 2>/dev/null";
    const int status = std::system(command.c_str());
    REQUIRE(status != -1);
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(read_file(out_file).find("as if from nowhere") != std::string::npos);

    const std::string bad = std::string(VPR_CLI_PATH) + " refine --prompt x 2>/dev/null";
    const int bad_status = std::system(bad.c_str());
    CHECK(WEXITSTATUS(bad_status) == 1);
}
