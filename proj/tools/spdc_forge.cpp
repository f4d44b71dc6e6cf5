#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "spdc/io.hpp"
#include "spdc/parallel.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Spatial purity engine for SPDC sources"};
    app.set_version_flag("--version", spdc::library_version());
    app.require_subcommand(1, 1);

    spdc::cli::RunOptions opts;
    std::uint64_t seed = 0;
    double tolerance = 0.0;
    unsigned threads = 0;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"metrics", "Purity, coupling, heralding and rate for each configured case"},
        {"scan", "Metric scans over beam parameters, lengths or series order"},
        {"optimize-crystal", "Cosine-series crystal optimization"},
        {"optimize-pump", "Pump-mode optimization over an LG range"},
        {"pole", "Synthesize a domain sequence for a target phase matching"},
        {"verify-plan", "Check a domain plan against its target"}};
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opts.config, "Run spec (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out, "Output directory")->capture_default_str();
        sub->add_option("--seed", seed, "Random seed (overrides the config)");
        sub->add_option("--threads", threads, "Worker thread cap (0: all cores)");
        sub->add_option("--tolerance", tolerance, "Relative tolerance for mode decomposition")
            ->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : spdc::cli::kExitConfig;
    }

    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed") > 0)
        opts.seed = seed;
    if (sub->count("--tolerance") > 0)
        opts.tolerance = tolerance;
    if (threads > 0)
        spdc::set_thread_count(threads);
    return spdc::cli::run(sub->get_name(), opts, std::cerr);
}
