#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "anderson/config.hpp"
#include "anderson/error.hpp"
#include "anderson/runner.hpp"

namespace {

constexpr int kValidation = 2;
constexpr int kNonConvergence = 3;

}  // namespace

int main(int argc, char** argv) {
    using namespace anderson;
    CLI::App app{"Anderson model toolkit: spectra, PAM moments, IDS, variational bounds and Tauberian transforms"};
    app.set_version_flag("--version", std::string(cli::kVersion));
    std::string command, config_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    app.add_option("command", command, "spectrum | pam | ids | bounds | tauber | report")
        ->required()
        ->check(CLI::IsMember(cli::kCommands));
    app.add_option("--config", config_path, "experiment file")->required();
    app.add_option("--seed", seed, "overrides the seed in the config");
    app.add_option("--out", out_dir, "output directory (overrides the config)");
    app.add_option("--workers", workers, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kValidation;
    }

    auto config = cli::load_config(config_path);
    std::vector<std::string> violations;
    if (!config.command.empty() && config.command != command)
        violations.push_back("command: config file is for '" + config.command + "' but '" + command + "' was requested");
    config = cli::with_override(config, "command", command);
    if (seed) config = cli::with_override(config, "seed", std::to_string(*seed));
    if (workers) config = cli::with_override(config, "workers", std::to_string(*workers));
    if (!out_dir.empty()) config = cli::with_override(config, "output", out_dir);
    for (auto& v : cli::validate(config)) violations.push_back(std::move(v));
    if (!violations.empty()) {
        std::cerr << "invalid configuration:\n";
        for (const auto& v : violations) std::cerr << "  " << v << '\n';
        return kValidation;
    }

    try {
        const auto manifest = cli::run(config, config.output);
        for (const auto& o : manifest.outputs) std::cout << o.sha256 << "  " << o.name << '\n';
        return 0;
    } catch (const ConvergenceError& e) {
        std::cerr << "non-convergence: " << e.what() << " (achieved " << e.achieved() << ")\n";
        return kNonConvergence;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const CapExceeded& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
