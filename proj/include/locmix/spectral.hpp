#pragma once

// Spectral density D_V(k) and the correlation form <g1, g2>_Omega.

#include "locmix/potential.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>

namespace locmix {

enum class DensityMethod { Periodogram, AutocovSum, ExactMarkov, ExactMovingAverage };

std::string to_string(DensityMethod method);

struct SpectralDensityEstimate {
    double k = 0.0;
    double value = 0.0;
    double std_error = 0.0;
    DensityMethod method = DensityMethod::Periodogram;
};

/// Mean over `segments` independent streams of (1/N)|sum_{n<N} e^{ikn} V_n|^2,
/// with the standard error taken from the spread across segments.
SpectralDensityEstimate periodogram_density(const PotentialProcess& process, double k,
                                            std::size_t segment_len, std::size_t segments);

/// Same estimator over consecutive non-overlapping segments of `data`.
SpectralDensityEstimate periodogram_density(std::span<const double> data, double k,
                                            std::size_t segment_len);

/// C(0) + 2 sum_{m=1}^{M} cos(km) C(m) from an autocovariance table.
SpectralDensityEstimate autocov_sum_density(std::span<const double> covariances, double k);

/// sum_n e^{ikn} C(n) for a finite chain, via the resolvent of the transition
/// operator restricted to mean-zero functions. Throws ConfigError for a
/// reducible chain and NumericalError when e^{-ik} is an eigenvalue.
double exact_markov_density(const MarkovParams& chain, double k);

/// Var(V) (1 - a^2) / (1 - 2a cos k + a^2).
double exact_moving_average_density(double rate, double k);

/// Closed-form D_V(k) for every kind except IntermittentMap.
std::optional<double> exact_density(const PotentialProcess& process, double k);

/// A function of the potential window (V_n, ..., V_{n+width-1}).
struct WindowFunction {
    std::size_t width = 1;
    std::function<double(std::span<const double>)> eval;
};

WindowFunction potential_value();
/// V o S - V.
WindowFunction cocycle_partner();

struct CorrelationFormResult {
    double value = 0.0;
    std::size_t cutoff = 0;
    /// Bound on the omitted tail (exponential profile) or magnitude of the
    /// extrapolated tail already added to `value` (power-law profile). Empty
    /// when no mixing profile was declared.
    std::optional<double> tail;
};

/// Cutoff M adapted to a mixing profile: ceil(40/rate) for exponential
/// decay, 10^4 for power-law decay.
std::size_t default_cutoff(const MixingProfile& profile);

/// <g1,g2>_Omega = E(g1 g2) + 2 sum_{m=1}^{M} E(g1 . g2 o S^m), with
/// expectations replaced by averages over `data`. A declared power-law
/// profile with exponent <= 1 is a divergence error (std::domain_error).
CorrelationFormResult correlation_form(const WindowFunction& g1, const WindowFunction& g2,
                                       std::span<const double> data, std::size_t cutoff,
                                       const std::optional<MixingProfile>& declared = std::nullopt);

CorrelationFormResult correlation_form(const WindowFunction& g1, const WindowFunction& g2,
                                       const PotentialProcess& process, std::size_t cutoff,
                                       std::size_t n,
                                       const std::optional<MixingProfile>& declared = std::nullopt);

}  // namespace locmix
