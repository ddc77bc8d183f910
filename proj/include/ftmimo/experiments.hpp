#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ftmimo/config.hpp"
#include "ftmimo/csv.hpp"
#include "ftmimo/svg.hpp"

namespace ftmimo::experiments {

struct Plot {
    std::string suffix;  ///< appended to the output stem, e.g. "ber"
    svg::Chart chart;
};

struct SweepResult {
    explicit SweepResult(csv::Table t) : table(std::move(t)) {}

    csv::Table table;
    bool crashed = false;               ///< a sweep point hit the crash voltage
    std::optional<csv::Table> timing;   ///< wall-clock measurements, not deterministic
    std::vector<Plot> plots;
};

/// Comment line written above every CSV header.
std::string provenance(const config::ExperimentConfig& cfg);

SweepResult run_overhead_sweep(const config::ExperimentConfig& cfg);
SweepResult run_undervolt_sweep(const config::ExperimentConfig& cfg);
SweepResult run_ber_snr(const config::ExperimentConfig& cfg);
SweepResult run_cost_table(const config::ExperimentConfig& cfg);

/// Dispatches on cfg.experiment.
SweepResult run(const config::ExperimentConfig& cfg);

/// Writes cfg.out, the "<stem>_timing.csv" sidecar if present, and with
/// cfg.plot one "<stem>_<suffix>.svg" per plot. Returns the paths written.
std::vector<std::string> write_outputs(const SweepResult& result, const config::ExperimentConfig& cfg);

/// Runs body(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace ftmimo::experiments
