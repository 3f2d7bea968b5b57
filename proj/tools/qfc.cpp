// qfc: scenario runner for the frequency-conversion simulator.
//   qfc list
//   qfc validate --config FILE
//   qfc run SCENARIO [--config FILE] [--out DIR] [--seed N] [--plot] [--parallel N]
// Exit codes: 0 ok, 1 configuration/validation error, 2 runtime error.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qfc/scenario.hpp"

namespace {

void print_errors(const std::vector<qfc::ConfigError>& errors, const std::string& path) {
    for (const auto& e : errors)
        std::fprintf(stderr, "%s:%s\n", path.empty() ? "config" : path.c_str(),
                     e.format().c_str());
}

std::optional<qfc::Scenario> resolve(const std::string& name_arg,
                                     const std::string& config_path,
                                     std::vector<qfc::ConfigError>& errors) {
    std::optional<qfc::Config> cfg;
    if (!config_path.empty()) {
        cfg = qfc::Config::parse_file(config_path, errors);
        if (!errors.empty()) return std::nullopt;
    }
    std::optional<std::string> builtin;
    if (!name_arg.empty()) builtin = name_arg;
    return qfc::load_scenario(builtin, cfg ? &*cfg : nullptr, errors);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"frequency-conversion experiment simulator"};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list", "list builtin scenarios");

    std::string validate_config;
    auto* validate = app.add_subcommand("validate", "check a config file without running");
    validate->add_option("--config", validate_config, "config file to validate")
        ->required();

    std::string run_name, run_config, run_out = "out";
    std::optional<std::uint64_t> run_seed;
    bool run_plot = false;
    int run_parallel = 1;
    auto* run = app.add_subcommand("run", "run a scenario");
    run->add_option("scenario", run_name, "builtin scenario name");
    run->add_option("--config", run_config, "config file with overrides");
    run->add_option("--out", run_out, "output directory (default: out/<scenario>)");
    run->add_option("--seed", run_seed, "override the scenario seed");
    run->add_flag("--plot", run_plot, "also write SVG charts");
    run->add_option("--parallel", run_parallel, "worker threads for sweep points")
        ->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        for (const auto& s : qfc::builtin_scenarios())
            std::printf("%-22s %s\n", s.name, s.description);
        return 0;
    }

    if (validate->parsed()) {
        std::vector<qfc::ConfigError> errors;
        auto scenario = resolve("", validate_config, errors);
        if (!scenario) {
            print_errors(errors, validate_config);
            return 1;
        }
        std::printf("ok: scenario '%s', seed %llu\n", scenario->name.c_str(),
                    static_cast<unsigned long long>(scenario->seed));
        return 0;
    }

    std::vector<qfc::ConfigError> errors;
    auto scenario = resolve(run_name, run_config, errors);
    if (!scenario) {
        print_errors(errors, run_config);
        return 1;
    }
    if (run_seed) scenario->seed = *run_seed;
    const std::string out_dir =
        run->count("--out") ? run_out : "out/" + scenario->name;
    try {
        const auto written = qfc::run_scenario(*scenario, out_dir, run_plot, run_parallel);
        for (const auto& f : written) std::printf("wrote %s\n", f.c_str());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
