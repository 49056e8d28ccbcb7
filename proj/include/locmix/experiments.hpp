#pragma once

// Config-driven experiments: each writes one CSV (and optionally one SVG)
// and reports its built-in cross-checks.

#include "locmix/config.hpp"
#include "locmix/csv.hpp"
#include "locmix/svg.hpp"

#include <string>
#include <vector>

namespace locmix {

struct RunOptions {
    std::string out_dir = ".";
    bool plots = true;
};

struct CrossCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunResult {
    CsvTable table{{"empty"}};
    std::vector<std::string> files;
    std::vector<CrossCheck> checks;
    PlotSpec plot;
    std::vector<PlotSeries> series;
};

/// Runs the experiment, writes its artifacts under options.out_dir.
/// Config problems raise ConfigError, numerical ones NumericalError.
RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Runs without writing anything.
RunResult compute_experiment(const ExperimentConfig& config);

/// D_V(k): closed form when available, otherwise a periodogram over 64
/// segments of 2^14 values.
double spectral_density_value(const PotentialProcess& process, double k);

}  // namespace locmix
