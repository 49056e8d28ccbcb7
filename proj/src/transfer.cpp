#include "locmix/transfer.hpp"

#include "locmix/errors.hpp"
#include "locmix/parallel.hpp"
#include "locmix/rng.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace locmix {

namespace {

constexpr std::uint64_t kAngleSalt = 0xA11CE5EEDULL;
constexpr double kOverflowGuard = 1e150;
constexpr double kRescaleAbove = 1e64;

}  // namespace

double Mat2::norm() const
{
    const double p = std::hypot(a + d, c - b);
    const double q = std::hypot(a - d, b + c);
    return 0.5 * (p + q);
}

Mat2 Mat2::inverse() const
{
    const double det_value = det();
    return {d / det_value, -b / det_value, -c / det_value, a / det_value};
}

Mat2 Mat2::unimodular() const
{
    const double det_value = det();
    if (!(det_value > 0.0))
        throw NumericalError("Mat2::unimodular: non-positive determinant");
    return (1.0 / std::sqrt(det_value)) * *this;
}

double distance(const Mat2& x, const Mat2& y)
{
    return std::max({std::abs(x.a - y.a), std::abs(x.b - y.b), std::abs(x.c - y.c), std::abs(x.d - y.d)});
}

Mat2 conjugate(const Mat2& frame, const Mat2& m) { return frame * m * frame.inverse(); }

Mat2 exp_traceless(const Mat2& x)
{
    const double delta = -x.det();  // x^2 = delta * 1
    double even, odd;
    if (delta > 1e-12) {
        const double r = std::sqrt(delta);
        even = std::cosh(r);
        odd = std::sinh(r) / r;
    } else if (delta < -1e-12) {
        const double r = std::sqrt(-delta);
        even = std::cos(r);
        odd = std::sin(r) / r;
    } else {
        even = 1.0 + 0.5 * delta;
        odd = 1.0 + delta / 6.0;
    }
    return {even + odd * x.a, odd * x.b, odd * x.c, even + odd * x.d};
}

Mat2 rotation(double k) { return {std::cos(k), -std::sin(k), std::sin(k), std::cos(k)}; }

RotationFrame rotation_frame(double k)
{
    const double s = std::sin(k);
    if (!(s > 1e-12))
        throw NumericalError("rotation_frame: sin(k) must be positive (band edge: use band_edge_frame)");
    const double scale = 1.0 / std::sqrt(s);
    return {rotation(k), {scale * s, 0.0, -scale * std::cos(k), scale}};
}

BandEdgeFrame band_edge_frame(double lambda)
{
    if (!(lambda > 0.0))
        throw std::invalid_argument("band_edge_frame: lambda must be positive");
    return {{1.0, 0.0, 1.0, 1.0}, Mat2::diagonal(std::cbrt(lambda * lambda), 1.0)};
}

Mat2 band_edge_conjugated(double lambda, double epsilon, double v)
{
    const double l13 = std::cbrt(lambda);
    const double l23 = l13 * l13;
    const double shift = epsilon * l23 * l23;
    return {-(1.0 + lambda * v - shift), -l23, -(l13 * v - epsilon * l23), -1.0};
}

LyapunovEstimate lyapunov_mc(const PotentialProcess& process, double energy, double lambda,
                             const LyapunovOptions& options)
{
    if (options.steps < 10'000)
        throw std::invalid_argument("lyapunov_mc: need at least 10^4 steps");
    if (options.renorm_every == 0 || options.renorm_every > 1000)
        throw std::invalid_argument("lyapunov_mc: renorm_every must lie in [1, 1000]");
    if (options.replicas == 0)
        throw std::invalid_argument("lyapunov_mc: need at least one replica");
    process.validate();

    const std::size_t replicas = options.replicas;
    std::vector<double> gammas(replicas);
    std::vector<char> halved(replicas, 0);

    parallel_for(replicas, [&](std::size_t r) {
        const std::uint64_t stream_id = options.stream_base + r;
        PotentialStream stream(process, stream_id);
        Rng angle_rng(derive_seed(process.seed ^ kAngleSalt, stream_id));
        const double theta0 = std::numbers::pi * angle_rng.uniform();
        Vec2 v{std::cos(theta0), std::sin(theta0)};

        const Mat2 frame = options.frame.value_or(Mat2::identity());
        const Mat2 frame_inv = frame.inverse();
        const bool use_frame = options.frame.has_value();

        std::size_t block = options.renorm_every;
        std::vector<double> chunk(options.renorm_every);
        long double log_sum = 0.0;
        std::size_t done = 0;
        while (done < options.steps) {
            const std::size_t len = std::min(options.renorm_every, options.steps - done);
            stream.fill(std::span(chunk.data(), len));
            std::size_t pos = 0;
            while (pos < len) {
                const std::size_t sub = std::min(block, len - pos);
                Vec2 w = v;
                for (std::size_t j = pos; j < pos + sub; ++j) {
                    if (use_frame) {
                        w = (frame * transfer_matrix(energy, lambda, chunk[j]) * frame_inv) * w;
                    } else {
                        const double x = (energy - lambda * chunk[j]) * w.x - w.y;
                        w = {x, w.x};
                    }
                }
                const double nrm = w.norm();
                if (!std::isfinite(nrm) || nrm > kOverflowGuard || nrm == 0.0) {
                    if (block == 1)
                        throw NumericalError("lyapunov_mc: single-step overflow");
                    block = std::max<std::size_t>(1, block / 2);
                    halved[r] = 1;
                    continue;
                }
                log_sum += std::log(nrm);
                v = {w.x / nrm, w.y / nrm};
                pos += sub;
            }
            done += len;
        }
        gammas[r] = static_cast<double>(log_sum / static_cast<long double>(options.steps));
    });

    LyapunovEstimate est;
    est.steps = options.steps;
    est.replicas = replicas;
    est.renorm_every = options.renorm_every;
    est.renorm_halved = std::any_of(halved.begin(), halved.end(), [](char c) { return c != 0; });
    const double mean = std::accumulate(gammas.begin(), gammas.end(), 0.0) / static_cast<double>(replicas);
    double ss = 0.0;
    for (double g : gammas)
        ss += (g - mean) * (g - mean);
    est.gamma = mean;
    est.std_error = replicas > 1 ? std::sqrt(ss / static_cast<double>(replicas - 1) / static_cast<double>(replicas)) : 0.0;
    est.per_replica = std::move(gammas);
    return est;
}

std::vector<double> log_norm_path(const PotentialProcess& process, double energy, double lambda,
                                  std::size_t steps, std::uint64_t stream_id)
{
    PotentialStream stream(process, stream_id);
    std::vector<double> path(steps + 1);
    Mat2 product;
    double log_scale = 0.0;
    path[0] = 0.0;
    for (std::size_t n = 1; n <= steps; ++n) {
        product = transfer_matrix(energy, lambda, stream.next()) * product;
        const double nrm = product.norm();
        if (nrm > kRescaleAbove) {
            product = (1.0 / nrm) * product;
            log_scale += std::log(nrm);
            path[n] = log_scale;
        } else {
            path[n] = log_scale + std::log(nrm);
        }
    }
    return path;
}

NormGrowthResult norm_growth_probability(const PotentialProcess& process, double energy, double lambda,
                                         std::size_t horizon, std::size_t samples, double c_hat,
                                         std::uint64_t stream_base)
{
    if (samples == 0)
        throw std::invalid_argument("norm_growth_probability: need at least one sample");
    process.validate();
    const double threshold = c_hat * std::sqrt(static_cast<double>(horizon));  // on log ||T||^2
    std::vector<char> hit(samples, 0);
    parallel_for(samples, [&](std::size_t s) {
        const auto path = log_norm_path(process, energy, lambda, horizon, stream_base + s);
        hit[s] = std::any_of(path.begin(), path.end(), [&](double l) { return 2.0 * l >= threshold; }) ? 1 : 0;
    });

    NormGrowthResult result;
    result.samples = samples;
    result.horizon = horizon;
    result.c_hat = c_hat;
    result.fraction = static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / static_cast<double>(samples);
    result.bound = 1.0 - std::exp(-threshold);
    return result;
}

}  // namespace locmix
