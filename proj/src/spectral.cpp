#include "locmix/spectral.hpp"

#include "locmix/errors.hpp"
#include "locmix/parallel.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace locmix {

namespace {

constexpr std::uint64_t kPeriodogramStreamBase = 0x5E6D0000ULL;

double segment_periodogram(std::span<const double> v, double k)
{
    // Phases from a recurrence drift; use direct cos/sin of k*n.
    double re = 0.0, im = 0.0;
    for (std::size_t n = 0; n < v.size(); ++n) {
        const double phase = k * static_cast<double>(n);
        re += std::cos(phase) * v[n];
        im += std::sin(phase) * v[n];
    }
    return (re * re + im * im) / static_cast<double>(v.size());
}

SpectralDensityEstimate summarize(double k, const std::vector<double>& values)
{
    const double r = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / r;
    double ss = 0.0;
    for (double x : values)
        ss += (x - mean) * (x - mean);
    const double sd = values.size() > 1 ? std::sqrt(ss / (r - 1.0)) : 0.0;
    return {k, mean, sd / std::sqrt(r), DensityMethod::Periodogram};
}

}  // namespace

std::string to_string(DensityMethod method)
{
    switch (method) {
    case DensityMethod::Periodogram: return "periodogram";
    case DensityMethod::AutocovSum: return "autocov_sum";
    case DensityMethod::ExactMarkov: return "exact_markov";
    case DensityMethod::ExactMovingAverage: return "exact_moving_average";
    }
    return "unknown";
}

SpectralDensityEstimate periodogram_density(const PotentialProcess& process, double k,
                                            std::size_t segment_len, std::size_t segments)
{
    if (segment_len < 1000 || segments < 8)
        throw std::invalid_argument("periodogram_density: need segment_len >= 1000 and segments >= 8");
    process.validate();
    std::vector<double> values(segments);
    parallel_for(segments, [&](std::size_t r) {
        const auto v = sample_stream(process, segment_len, kPeriodogramStreamBase + r);
        values[r] = segment_periodogram(v, k);
    });
    return summarize(k, values);
}

SpectralDensityEstimate periodogram_density(std::span<const double> data, double k, std::size_t segment_len)
{
    if (segment_len == 0 || data.size() / segment_len < 2)
        throw std::invalid_argument("periodogram_density: need at least two full segments");
    const std::size_t segments = data.size() / segment_len;
    std::vector<double> values(segments);
    for (std::size_t r = 0; r < segments; ++r)
        values[r] = segment_periodogram(data.subspan(r * segment_len, segment_len), k);
    return summarize(k, values);
}

SpectralDensityEstimate autocov_sum_density(std::span<const double> covariances, double k)
{
    if (covariances.empty())
        throw std::invalid_argument("autocov_sum_density: empty covariance table");
    double value = covariances[0];
    for (std::size_t m = 1; m < covariances.size(); ++m)
        value += 2.0 * std::cos(k * static_cast<double>(m)) * covariances[m];
    return {k, value, 0.0, DensityMethod::AutocovSum};
}

double exact_markov_density(const MarkovParams& chain, double k)
{
    PotentialProcess check{chain, 0, std::nullopt};
    check.validate();

    const auto n = static_cast<Eigen::Index>(chain.transition.size());
    const auto pi_vec = stationary_distribution(chain);
    Eigen::VectorXd pi(n), f(n);
    for (Eigen::Index i = 0; i < n; ++i)
        pi(i) = pi_vec[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 0; i < n; ++i)
        f(i) = chain.values[static_cast<std::size_t>(i)];
    f.array() -= pi.dot(f);

    // Q = P - 1 pi^T acts as P on mean-zero functions and has no unit eigenvalue.
    Eigen::MatrixXd p(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            p(i, j) = chain.transition[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    const Eigen::MatrixXd q = p - Eigen::VectorXd::Ones(n) * pi.transpose();

    using Complex = std::complex<double>;
    const Complex z = std::polar(1.0, k);
    const Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(n, n) - z * q.cast<Complex>();
    const Eigen::VectorXcd rhs = z * (q * f).cast<Complex>();
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(a);
    if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-13)
        throw NumericalError("exact_markov_density: resolvent singular at this k (periodic chain)");
    const Eigen::VectorXcd g = lu.solve(rhs);  // sum_{m>=1} z^m Q^m f

    const double c0 = (pi.array() * f.array() * f.array()).sum();
    Complex tail = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        tail += pi(i) * f(i) * g(i);
    return c0 + 2.0 * tail.real();
}

double exact_moving_average_density(double rate, double k)
{
    if (!(rate > 0.0 && rate < 1.0))
        throw ConfigError("moving_average: rate must lie in (0,1)");
    const double var = 0.25 / (1.0 - rate * rate);
    return var * (1.0 - rate * rate) / (1.0 - 2.0 * rate * std::cos(k) + rate * rate);
}

std::optional<double> exact_density(const PotentialProcess& process, double k)
{
    switch (process.kind()) {
    case ProcessKind::IID: return exact_variance(process);
    case ProcessKind::MarkovChain: return exact_markov_density(std::get<MarkovParams>(process.params), k);
    case ProcessKind::MovingAverageShift:
        return exact_moving_average_density(std::get<MovingAverageParams>(process.params).rate, k);
    case ProcessKind::Cocycle: {
        // V = s(sigma_1 - sigma_0): C(0) = s^2/2, C(+-1) = -s^2/4.
        const double s = std::get<CocycleParams>(process.params).scale;
        return 0.5 * s * s * (1.0 - std::cos(k));
    }
    case ProcessKind::IntermittentMap: return std::nullopt;
    }
    return std::nullopt;
}

WindowFunction potential_value()
{
    return {1, [](std::span<const double> w) { return w[0]; }};
}

WindowFunction cocycle_partner()
{
    return {2, [](std::span<const double> w) { return w[1] - w[0]; }};
}

std::size_t default_cutoff(const MixingProfile& profile)
{
    if (profile.white)
        return 0;
    if (profile.kind == DecayKind::Exponential)
        return static_cast<std::size_t>(std::ceil(40.0 / profile.exponent));
    return 10'000;
}

CorrelationFormResult correlation_form(const WindowFunction& g1, const WindowFunction& g2,
                                       std::span<const double> data, std::size_t cutoff,
                                       const std::optional<MixingProfile>& declared)
{
    if (declared && !declared->white && declared->kind == DecayKind::PowerLaw && declared->exponent <= 1.0)
        throw std::domain_error("correlation_form: power-law exponent <= 1, the form diverges");
    const std::size_t width = std::max(g1.width, g2.width);
    if (data.size() < cutoff + width + 1)
        throw std::invalid_argument("correlation_form: data shorter than cutoff plus window width");

    const std::size_t count = data.size() - cutoff - width + 1;
    std::vector<double> a(count), b(count + cutoff);
    for (std::size_t i = 0; i < count; ++i)
        a[i] = g1.eval(data.subspan(i, g1.width));
    for (std::size_t i = 0; i < count + cutoff; ++i)
        b[i] = g2.eval(data.subspan(i, g2.width));

    CorrelationFormResult result;
    result.cutoff = cutoff;
    for (std::size_t m = 0; m <= cutoff; ++m) {
        double sum = 0.0;
        for (std::size_t i = 0; i < count; ++i)
            sum += a[i] * b[i + m];
        result.value += (m == 0 ? 1.0 : 2.0) * sum / static_cast<double>(count);
    }

    if (declared && !declared->white) {
        const double c = declared->constant;
        const double x = declared->exponent;
        const double next = static_cast<double>(cutoff + 1);
        if (declared->kind == DecayKind::Exponential) {
            result.tail = 2.0 * c * std::exp(-x * next) / (1.0 - std::exp(-x));
        } else {
            const double extrapolated = 2.0 * c * std::pow(next - 0.5, 1.0 - x) / (x - 1.0);
            result.value += extrapolated;
            result.tail = std::abs(extrapolated);
        }
    }
    return result;
}

CorrelationFormResult correlation_form(const WindowFunction& g1, const WindowFunction& g2,
                                       const PotentialProcess& process, std::size_t cutoff, std::size_t n,
                                       const std::optional<MixingProfile>& declared)
{
    const auto data = sample_stream(process, n);
    return correlation_form(g1, g2, data, cutoff, declared);
}

}  // namespace locmix
