#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "ftmimo/config.hpp"
#include "ftmimo/experiments.hpp"
#include "ftmimo/faults.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitCrash = 2;

}  // namespace

int main(int argc, char** argv) {
    using namespace ftmimo;

    CLI::App app{"Checksum-protected massive-MIMO detection on an emulated undervolted accelerator"};
    std::string config_path;
    std::optional<std::string> experiment;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    bool plot = false;
    app.add_option("--config", config_path, "YAML experiment configuration")->check(CLI::ExistingFile);
    app.add_option("--experiment", experiment, "overhead-sweep | undervolt-sweep | ber-snr | cost-table");
    app.add_option("--seed", seed, "master RNG seed");
    app.add_option("--out", out, "output CSV path");
    app.add_flag("--plot", plot, "also write SVG charts next to the CSV");
    app.add_option("--threads", threads, "worker threads for sweep points")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInvalid;
    }

    config::ExperimentConfig cfg;
    try {
        if (!config_path.empty()) cfg = config::load_file(config_path);
        if (experiment) {
            const auto e = config::parse_experiment(*experiment);
            if (!e) throw config::ConfigError("--experiment: unknown experiment '" + *experiment + "'", "experiment");
            cfg.experiment = *e;
        }
        if (seed) cfg.seed = *seed;
        if (out) cfg.out = *out;
        if (threads) cfg.threads = *threads;
        if (plot) cfg.plot = true;
        cfg.validate();
    } catch (const config::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    }

    try {
        const auto result = experiments::run(cfg);
        for (const auto& path : experiments::write_outputs(result, cfg)) std::cerr << "wrote " << path << '\n';
        if (result.crashed) {
            std::cerr << "error: emulated device crashed during the sweep; partial results kept\n";
            return kExitCrash;
        }
    } catch (const faults::DeviceCrash& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitCrash;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    return kExitOk;
}
