#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "percept/config.hpp"
#include "percept/scenarios.hpp"

namespace {

int run_command(const std::string& config_path, const std::string& seed_override,
                const std::string& out_override) {
    percept::ExperimentConfig cfg = percept::load_config(config_path);
    if (!seed_override.empty()) cfg.seed = std::stoull(seed_override);
    if (!out_override.empty()) cfg.output_dir = out_override;

    const percept::RunArtifacts artifacts = percept::run_scenario(cfg);
    std::cout << "scenario " << cfg.scenario << " seed " << cfg.seed << '\n';
    for (const auto& path : artifacts.csv_files) std::cout << "csv " << path.string() << '\n';
    std::cout << "summary " << artifacts.summary_path.string() << '\n';
    std::cout << "config_echo " << artifacts.config_echo_path.string() << '\n';
    for (const auto& [key, value] : artifacts.summary)
        std::cout << "  " << key << '=' << value << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"percept: self-organizing retina, depth and cochlea experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string seed_override;
    std::string out_override;
    auto* run = app.add_subcommand("run", "run a scenario described by a config file");
    run->add_option("--config", config_path, "path to the JSON config")->required();
    run->add_option("--seed", seed_override, "override the config's seed");
    run->add_option("--out", out_override, "override the config's output directory");

    auto* list = app.add_subcommand("list-scenarios", "print the available scenario names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (list->parsed()) {
            for (const auto& name : percept::scenario_names()) std::cout << name << '\n';
            return 0;
        }
        return run_command(config_path, seed_override, out_override);
    } catch (const percept::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
