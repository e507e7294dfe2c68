#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "naifs/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Entropy, pressure and specification experiments for non-autonomous iterated function systems"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    unsigned threads = 0;
    std::size_t budget = 0;
    auto* run = app.add_subcommand("run", "Run the experiment described by a TOML config");
    run->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);
    auto* out_opt = run->add_option("--out", out, "Output directory (overrides the config)");
    auto* threads_opt = run->add_option("--threads", threads, "Worker threads; affects wall time only")->check(CLI::PositiveNumber);
    auto* budget_opt = run->add_option("--budget", budget, "Word budget per (m, n)")->check(CLI::PositiveNumber);

    std::string dir;
    auto* rep = app.add_subcommand("report", "Merge the manifests under a directory");
    rep->add_option("dir", dir, "Directory holding run outputs")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : naifs::exit_config;
    }

    if (*run) {
        naifs::RunOverrides ov;
        if (*out_opt) ov.out = out;
        if (*threads_opt) ov.threads = threads;
        if (*budget_opt) ov.budget = budget;
        return naifs::run_command(config, ov, std::cout, std::cerr);
    }
    return naifs::report_command(dir, std::cout, std::cerr);
}
