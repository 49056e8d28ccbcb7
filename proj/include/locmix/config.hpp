#pragma once

// Experiment configuration: flat INI with [experiment], [process] and
// [parameters] sections.

#include "locmix/potential.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace locmix {

enum class ExperimentKind {
    LyapunovScan,
    BandCenterScaling,
    BandEdgeScaling,
    NearEdgeScaling,
    DensityCompare,
    SpectralDensity,
    Moments,
    NormGrowth,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::LyapunovScan;
    std::uint64_t seed = 1;
    std::string output;  ///< CSV file name; defaults to <experiment>.csv
    PotentialProcess process;

    std::vector<double> lambdas;
    std::vector<double> energies;
    std::vector<double> ks;
    std::vector<double> times;
    std::vector<std::size_t> horizons;

    double lambda = 1.0;
    double energy = 0.5;
    double epsilon = 0.0;
    double eta = 1.0;
    double q = 2.0;
    double beta = 2.5;

    std::string setting = "band_edge";
    std::optional<double> d0;
    std::optional<double> dpi;
    double orbit_lambda = 0.01;

    std::size_t steps = 1'000'000;
    std::size_t replicas = 8;
    std::size_t renorm_every = 64;
    std::size_t grid = 512;
    std::size_t bins = 128;
    std::size_t orbit_steps = 0;
    std::size_t size = 2001;
    std::size_t samples = 2000;
    std::size_t segment_length = 4096;
    std::size_t segments = 64;

    bool operator==(const ExperimentConfig&) const = default;

    std::string output_name() const;
};

/// Parses and validates; every problem is a ConfigError.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// FNV-1a of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Range and consistency checks run before any computation.
void validate_config(const ExperimentConfig& config);

}  // namespace locmix
