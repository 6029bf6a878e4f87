#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nsinflow/acceptance.hpp"
#include "nsinflow/commands.hpp"
#include "nsinflow/config.hpp"
#include "nsinflow/errors.hpp"

namespace {

std::string kebab(std::string key) {
    for (char& c : key)
        if (c == '_') c = '-';
    return key;
}

// Registers --config plus one string flag per config key on a subcommand.
struct ConfigFlags {
    std::string config_path;
    std::map<std::string, std::string> values;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
        for (const auto& key : nsinflow::cli::config_keys())
            app->add_option("--" + kebab(key), values[key], "overrides config key '" + key + "'");
    }

    nsinflow::cli::RunConfig resolve(const CLI::App* app) const {
        std::map<std::string, std::string> merged;
        if (!config_path.empty()) merged = nsinflow::cli::read_config_file(config_path);
        for (const auto& key : nsinflow::cli::config_keys())
            if (app->get_option("--" + kebab(key))->count() > 0) merged[key] = values.at(key);
        return nsinflow::cli::resolve_config(merged);
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Radial isentropic Navier-Stokes inflow: stationary profiles, perturbed evolution and checks"};
    app.require_subcommand(1);

    ConfigFlags stationary_flags, evolve_flags;
    auto* stationary = app.add_subcommand("stationary", "solve for the stationary profile");
    stationary_flags.attach(stationary);
    auto* evolve = app.add_subcommand("evolve", "run the perturbed time evolution");
    evolve_flags.attach(evolve);

    nsinflow::acceptance::SuiteOptions suite;
    auto* verify = app.add_subcommand("verify", "run the acceptance suite");
    verify->add_option("--only", suite.only, "criterion names or ids to run");
    verify->add_option("--work-dir", suite.work_dir, "scratch directory for the determinism check");

    std::string plot_dir;
    auto* plot = app.add_subcommand("plot", "write a gnuplot script for a run directory");
    plot->add_option("dir", plot_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : nsinflow::cli::kExitUsage;
    }

    try {
        if (*stationary) return nsinflow::cli::cmd_stationary(stationary_flags.resolve(stationary), std::cerr);
        if (*evolve) return nsinflow::cli::cmd_evolve(evolve_flags.resolve(evolve), std::cerr);
        if (*verify) return nsinflow::acceptance::cmd_verify(suite, std::cout);
        if (*plot) return nsinflow::cli::cmd_plot(plot_dir, std::cerr);
    } catch (const nsinflow::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return nsinflow::cli::kExitUsage;
    }
    return nsinflow::cli::kExitUsage;
}
