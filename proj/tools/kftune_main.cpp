#include "kftune/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Kalman filter noise tuning by consistency-driven Bayesian optimization"};
    app.require_subcommand(1);

    kftune::cli::Options opts;
    std::uint64_t seed = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "override sim.seed");
        sub->add_option("--threads", opts.threads, "Monte Carlo worker threads")->check(CLI::Range(1, 256));
        sub->add_flag("--quiet", opts.quiet, "suppress progress output");
    };

    auto* tune = app.add_subcommand("tune", "run the configured tuner(s)");
    auto* sweep = app.add_subcommand("sweep", "evaluate the cost on a parameter grid");
    auto* check = app.add_subcommand("check", "chi-square consistency check at fixed parameters");
    auto* list = app.add_subcommand("list-systems", "print the benchmark systems");
    for (auto* sub : {tune, sweep, check}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    for (auto* sub : {tune, sweep, check}) {
        if (sub->parsed() && sub->count("--seed") > 0) opts.seed = seed;
    }
    if (list->parsed()) return kftune::cli::cmd_list_systems(std::cout);
    if (tune->parsed()) return kftune::cli::cmd_tune(opts, std::cerr);
    if (sweep->parsed()) return kftune::cli::cmd_sweep(opts, std::cerr);
    return kftune::cli::cmd_check(opts, std::cerr);
}
