#pragma once

// Finite-volume Jacobi operators, wave-packet moments M_T^q and the
// logarithmic-growth check.

#include "locmix/errors.hpp"
#include "locmix/potential.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace locmix {

/// Hard-wall tridiagonal operator on sites -(L-1)/2 .. (L-1)/2 with unit
/// off-diagonal and diagonal lambda V_n.
struct JacobiOperator {
    std::size_t size = 0;
    std::vector<double> diagonal;
    std::vector<double> off_diagonal;
    std::size_t origin = 0;  ///< index of site 0
};

/// L must be odd and >= 3 (std::invalid_argument).
JacobiOperator build_operator(const PotentialProcess& process, double lambda, std::size_t size,
                              std::uint64_t stream_id = 0);

struct Spectrum {
    std::vector<double> values;   ///< ascending
    std::vector<double> vectors;  ///< column-major, size x size
};

Spectrum diagonalize(const JacobiOperator& op);

class BoxTooSmallError : public NumericalError {
public:
    BoxTooSmallError(const std::string& what, std::size_t suggested)
        : NumericalError(what), suggested_size(suggested) {}
    std::size_t suggested_size;
};

struct MomentOptions {
    std::size_t quadrature_nodes = 200;
    double t_max_factor = 8.0;
    std::size_t wall_margin = 10;
    /// Probability allowed within `wall_margin` sites of either wall when the
    /// ballistic wavefront has reached them.
    double wall_tolerance = 1e-6;
    std::uint64_t stream_base = 0;
};

struct MomentSeries {
    double q = 2.0;
    double lambda = 0.0;
    std::size_t size = 0;
    std::size_t replicas = 0;
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> std_error;
    /// e^{-t_max/T} times the largest moment seen on the quadrature nodes.
    std::vector<double> truncation_error;
    /// Replica-averaged <psi_t|X|psi_t>, smoothed like the moments.
    std::vector<double> mean_position;
    double max_norm_error = 0.0;
    double max_energy_drift = 0.0;
    double max_wall_weight = 0.0;
};

/// M_T^q = int_0^inf dt/T e^{-t/T} E <0|e^{iHt}|X|^q e^{-iHt}|0>, by full
/// diagonalization and Gauss-Legendre quadrature on [0, t_max_factor T].
/// Throws BoxTooSmallError when the wavefront can reach the walls and the
/// evolved state actually carries weight there.
MomentSeries moment_series(const PotentialProcess& process, double lambda, std::size_t size, double q,
                           std::span<const double> times, std::size_t replicas, const MomentOptions& options = {});

struct GrowthReport {
    double beta = 0.0;
    /// max_T (M_T - (log T)^{q beta}) over the whole series.
    double c_full = 0.0;
    /// Same over the lower half of the log-T range.
    double c_fit = 0.0;
    /// The lower-half constant still bounds the upper half.
    bool pass = false;
    double worst_excess = 0.0;
};

/// log T is clamped at 0 below T = 1. beta <= 2 or a series spanning less
/// than two decades raises std::invalid_argument.
GrowthReport log_growth_check(const MomentSeries& series, double beta);

/// Log-log least-squares slope of values vs times.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace locmix
