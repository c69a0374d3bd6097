#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vpr/harness.hpp"

namespace {

void add_common_flags(CLI::App* cmd, vpr::CliOptions& options) {
    cmd->add_option("--config", options.config_path, "JSON config file");
    cmd->add_option("--backend", options.backend,
                    "chat endpoint url, or scripted:<path> for a canned-response file");
    cmd->add_option("--max-rounds", options.max_rounds,
                    "maximum verification rounds (default 5)");
    cmd->add_option("--chunk-threshold", options.chunk_threshold,
                    "minimum words per chunk (default 8)");
    cmd->add_option("--verbosity", options.verbosity, "trace verbosity: summary | full");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scenario-routed prompt refinement pipeline for text-to-video models"};
    app.require_subcommand(1);

    vpr::CliOptions options;

    CLI::App* refine = app.add_subcommand("refine", "Refine a single prompt");
    refine->add_option("--prompt", options.prompt, "user prompt text")->required();
    refine->add_option("--trace", options.trace_path, "write the trace JSON to this file");
    add_common_flags(refine, options);

    CLI::App* batch =
        app.add_subcommand("batch", "Refine every record of a line-delimited JSON file");
    batch->add_option("--input", options.input_path, "input file, one {id, prompt} per line")
        ->required();
    batch->add_option("--output", options.output_path,
                      "output file, one result per line (stdout when omitted)");
    batch->add_option("--workers", options.workers, "concurrent pipelines (default 4)");
    add_common_flags(batch, options);

    CLI::App* stats = app.add_subcommand("stats", "Summarize a batch results file");
    stats->add_option("--input", options.input_path, "results file from the batch command")
        ->required();

    CLI11_PARSE(app, argc, argv);

    if (refine->parsed()) return vpr::cmd_refine(options, std::cout, std::cerr);
    if (batch->parsed()) return vpr::cmd_batch(options, std::cout, std::cerr);
    return vpr::cmd_stats(options, std::cout, std::cerr);
}
