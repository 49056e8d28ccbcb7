#pragma once

// Stationary, centered potential sequences V(S^n omega) with a known or
// estimable mixing profile.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace locmix {

enum class ProcessKind { IID, MarkovChain, MovingAverageShift, IntermittentMap, Cocycle };

std::string to_string(ProcessKind kind);
ProcessKind process_kind_from_string(const std::string& name);

/// Independent draws from a finite distribution. The observable is
/// recentred by the distribution mean.
struct IidParams {
    std::vector<double> values{-1.0, 1.0};
    std::vector<double> weights{0.5, 0.5};

    bool operator==(const IidParams&) const = default;
};

/// Finite-state chain; V(state) = values[state] minus the stationary mean.
struct MarkovParams {
    std::vector<std::vector<double>> transition;
    std::vector<double> values;

    bool operator==(const MarkovParams&) const = default;
};

/// V(omega) = sum_{k>=0} rate^k (sigma_k - 1/2) over fair i.i.d. bits,
/// truncated once rate^k < 1e-14.
struct MovingAverageParams {
    double rate = 0.5;

    bool operator==(const MovingAverageParams&) const = default;
};

/// Pomeau-Manneville orbit x -> x(1 + x^z) mod 1, V = x - (pilot-orbit mean).
/// Correlations decay like m^{-(1/z - 1)}.
struct IntermittentParams {
    double z = 0.25;
    std::size_t pilot_length = 2'000'000;

    bool operator==(const IntermittentParams&) const = default;
};

/// V = v o S - v with v(omega) = scale * sigma_0 on fair i.i.d. bits.
struct CocycleParams {
    double scale = 1.0;

    bool operator==(const CocycleParams&) const = default;
};

using ProcessParams =
    std::variant<IidParams, MarkovParams, MovingAverageParams, IntermittentParams, CocycleParams>;

struct PotentialProcess {
    ProcessParams params = IidParams{};
    std::uint64_t seed = 0;
    /// Discarded initial steps; defaults to 10^4 for chain and map
    /// processes and 0 otherwise.
    std::optional<std::size_t> burn_in;

    bool operator==(const PotentialProcess&) const = default;

    ProcessKind kind() const;
    std::size_t effective_burn_in() const;

    /// Throws ConfigError on a non-stochastic matrix, reducible chain,
    /// rate outside (0,1), etc.
    void validate() const;

    static PotentialProcess bernoulli(std::uint64_t seed);
    static PotentialProcess two_state_markov(double flip_probability, std::uint64_t seed);
    static PotentialProcess moving_average(double rate, std::uint64_t seed);
    static PotentialProcess intermittent(double z, std::uint64_t seed);
    static PotentialProcess cocycle(double scale, std::uint64_t seed);
};

/// Stationary law of an irreducible finite chain (power iteration on the
/// Cesaro average, so periodic chains are handled).
std::vector<double> stationary_distribution(const MarkovParams& chain);

/// Exact Var(V) where a closed form exists (all kinds but IntermittentMap).
std::optional<double> exact_variance(const PotentialProcess& process);

/// Largest |V| over the support, used for spectrum and speed bounds.
double sup_norm(const PotentialProcess& process);

/// Sequential generator for one stream of a process. Stream ids select
/// independent realizations; the same (process, stream id) always yields
/// the same values.
class PotentialStream {
public:
    PotentialStream(const PotentialProcess& process, std::uint64_t stream_id);
    ~PotentialStream();
    PotentialStream(PotentialStream&&) noexcept;
    PotentialStream& operator=(PotentialStream&&) noexcept;

    void fill(std::span<double> out);
    double next();

    struct State;

private:
    std::unique_ptr<State> state_;
};

/// V(S^0 omega), ..., V(S^{n-1} omega) after burn-in.
std::vector<double> sample_stream(const PotentialProcess& process, std::size_t n,
                                  std::uint64_t stream_id = 0);

/// Empirical C(m) = (1/(n-m)) sum_i V_i V_{i+m}, m = 0..lag_max.
std::vector<double> autocovariance(std::span<const double> data, std::size_t lag_max);
std::vector<double> autocovariance(const PotentialProcess& process, std::size_t lag_max,
                                   std::size_t n);

enum class DecayKind { Exponential, PowerLaw };

struct MixingProfile {
    DecayKind kind = DecayKind::Exponential;
    /// Rate for exponential decay, alpha for power-law decay. NaN if white.
    double exponent = 0.0;
    double constant = 1.0;
    /// No lag at or beyond 1 rose above the noise floor.
    bool white = false;
    std::size_t lags_used = 0;
    double residual = 0.0;
};

/// Least-squares fits of log|C(m)| against m and against log m over the
/// leading run of lags m >= 1 with |C(m)| > noise_floor; the better fit wins.
/// Fewer than 10 usable lags (but at least one) is an argument error.
MixingProfile fit_mixing_exponent(std::span<const double> covariances, double noise_floor = 0.0);

}  // namespace locmix
