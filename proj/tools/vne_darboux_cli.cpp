#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vne/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Darboux-dressed solutions of the nonlinear von Neumann equation"};
    app.require_subcommand(1);

    double tol_scale = 1.0;
    bool seed_dump = false;
    app.add_option("--tol-scale", tol_scale, "Multiply every tolerance by this factor");
    app.add_flag("--seed-dump", seed_dump, "Print the resolved seed matrices");

    std::string run_config;
    std::string run_out;
    CLI::App* run = app.add_subcommand("run", "Run one scenario");
    run->add_option("config", run_config, "Scenario JSON")->required();
    run->add_option("--out", run_out, "Output directory")->required();

    std::string sweep_config;
    std::string sweep_out;
    std::string param;
    std::vector<std::string> values;
    int jobs = 1;
    CLI::App* sweep = app.add_subcommand("sweep", "Run a scenario over a list of parameter values");
    sweep->add_option("config", sweep_config, "Base scenario JSON")->required();
    sweep->add_option("--param", param, "mu, t_max or a")->required();
    sweep->add_option("--values", values, "Comma separated values")->delimiter(',');
    sweep->add_option("--out", sweep_out, "Output directory")->required();
    sweep->add_option("--jobs", jobs, "Parallel sweep points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : vne::kExitSchema;
    }

    if (*run) {
        vne::RunOptions options;
        options.tol_scale = tol_scale;
        options.seed_dump = seed_dump;
        return vne::run_command(run_config, run_out, options, std::cout, std::cerr);
    }
    std::vector<std::string> cleaned;
    for (const std::string& v : values)
        if (!v.empty()) cleaned.push_back(v);
    vne::SweepOptions options;
    options.tol_scale = tol_scale;
    options.jobs = jobs;
    return vne::sweep_command(sweep_config, param, cleaned, sweep_out, options, std::cout,
                              std::cerr);
}
