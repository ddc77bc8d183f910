#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ftmimo/faults.hpp"
#include "ftmimo/linksim.hpp"

namespace ftmimo::config {

/// Invalid configuration. The message names the field and, when the value
/// came from a file, its line.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& message, std::string field = {})
        : std::runtime_error(message), field_(std::move(field)) {}

    /// Dotted field path such as "detector.nt"; empty for syntax errors.
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class Experiment { OverheadSweep, UndervoltSweep, BerSnr, CostTable };

std::optional<Experiment> parse_experiment(std::string_view name);
std::string_view to_string(Experiment e) noexcept;

struct ExperimentConfig {
    Experiment experiment = Experiment::CostTable;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string out = "results.csv";
    bool plot = false;

    // detector
    std::size_t nt = 8;
    std::size_t nr = 64;
    std::size_t iters = 3;
    double epsilon_abs = 0.0;
    double epsilon_rel = 1e-6;

    // link
    double snr_db = 10.0;
    linksim::Scheme scheme = linksim::Scheme::Qpsk;
    std::size_t trials = 1000;

    // accelerator
    std::size_t tile = 16;
    std::array<double, 4> bit_weights = faults::FaultModel{}.bit_distribution;

    // overhead-sweep and cost-table grids
    std::vector<std::size_t> nt_list{4, 6, 8, 10, 12};
    std::vector<std::size_t> nr_list{64};
    std::vector<std::size_t> iters_list{3};
    std::vector<double> alpha_list{0.0, 1.0};
    std::size_t repeats = 100;

    // undervolt-sweep
    std::string profile = "100MHz";
    double v_start = 1.0;
    double v_stop = 0.74;
    double v_step = 0.01;
    std::vector<faults::VoltageProfile> profiles = faults::builtin_profiles();
    faults::PowerModel power{};

    // ber-snr
    std::vector<double> snr_list{-10, -8, -6, -4, -2, 0, 2, 4, 6, 8, 10};

    /// Throws ConfigError when a value is out of range or a referenced
    /// profile does not exist.
    void validate() const;

    const faults::VoltageProfile& selected_profile() const;
    /// Voltages from v_start down to v_stop inclusive, rounded to 1 uV.
    std::vector<double> voltages() const;

    /// Canonical text of every field that affects results (not threads,
    /// output paths or plotting).
    std::string canonical() const;
    /// FNV-1a 64 of canonical(), as 16 hex digits.
    std::string hash() const;
};

ExperimentConfig load_file(const std::string& path);
ExperimentConfig load_string(const std::string& text, const std::string& origin = "<string>");

}  // namespace ftmimo::config
