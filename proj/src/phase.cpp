#include "locmix/phase.hpp"

#include "locmix/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace locmix {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kLookAhead = 16;
constexpr std::uint64_t kDriftStreamBase = 0xD71F7000ULL;

/// Difference reduced to (-pi/2, pi/2].
double wrap_difference(double d)
{
    d = std::remainder(d, kPi);
    if (d <= -0.5 * kPi)
        d += kPi;
    return d;
}

/// p(theta) = (c-b)/2 - (a-d)/2 sin 2theta + (b+c)/2 cos 2theta, linear in P.
struct PolyWeights {
    double s2, c2;

    double value(const Mat2& p) const { return 0.5 * (p.c - p.b) - 0.5 * (p.a - p.d) * s2 + 0.5 * (p.b + p.c) * c2; }
    double derivative(const Mat2& p) const { return -(p.a - p.d) * c2 - (p.b + p.c) * s2; }
};

PolyWeights weights_at(double theta) { return {std::sin(2.0 * theta), std::cos(2.0 * theta)}; }

struct MeanErr {
    double mean, err;
};

MeanErr mean_and_error(const std::vector<double>& x)
{
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x)
        ss += (v - mean) * (v - mean);
    return {mean, x.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

void check_setup(const AnomalySetup& setup)
{
    if (!setup.p1 || !setup.p2 || !setup.exact_step || setup.values_per_step == 0)
        throw std::invalid_argument("AnomalySetup: incomplete setup");
}

}  // namespace

double reduce_angle(double theta)
{
    double r = std::fmod(theta, kPi);
    if (r < 0.0)
        r += kPi;
    if (r >= kPi)
        r = 0.0;
    return r;
}

double projective_action(const Mat2& t, double theta)
{
    const Vec2 w = t * Vec2{std::cos(theta), std::sin(theta)};
    return reduce_angle(std::atan2(w.y, w.x));
}

AnomalySetup bulk_setup(double k)
{
    const auto frame = rotation_frame(k);
    const double s = std::sin(k);
    const double e = 2.0 * std::cos(k);
    AnomalySetup setup;
    setup.name = "bulk";
    setup.eta = 1.0;
    setup.sign = 1.0;
    setup.k = k;
    setup.values_per_step = 1;
    setup.p1 = [s](std::span<const double> w) { return Mat2{0.0, 0.0, w[0] / s, 0.0}; };
    setup.p2 = [](std::span<const double>) { return Mat2{0.0, 0.0, 0.0, 0.0}; };
    setup.exact_step = [m = frame.conjugator, e](std::span<const double> w, double lambda) {
        return conjugate(m, transfer_matrix(e, lambda, w[0]));
    };
    setup.energy = [e](double) { return e; };
    return setup;
}

AnomalySetup band_center_setup(double epsilon)
{
    AnomalySetup setup;
    setup.name = "band_center";
    setup.eta = 1.0;
    setup.sign = -1.0;
    setup.k = 0.0;
    setup.values_per_step = 2;
    setup.p1 = [](std::span<const double> w) { return Mat2{0.0, -w[1], w[0], 0.0}; };
    setup.p2 = [epsilon](std::span<const double> w) {
        const double uv = w[0] * w[1];
        return Mat2{-0.5 * uv, epsilon, -epsilon, 0.5 * uv};
    };
    setup.exact_step = [epsilon](std::span<const double> w, double lambda) {
        const double e = epsilon * lambda * lambda;
        return transfer_matrix(e, lambda, w[1]) * transfer_matrix(e, lambda, w[0]);
    };
    setup.energy = [epsilon](double lambda) { return epsilon * lambda * lambda; };
    return setup;
}

AnomalySetup band_edge_setup(double epsilon)
{
    AnomalySetup setup;
    setup.name = "band_edge";
    setup.eta = 1.0 / 3.0;
    setup.sign = -1.0;
    setup.k = 0.0;
    setup.values_per_step = 1;
    setup.p1 = [](std::span<const double> w) { return Mat2{0.0, 0.0, w[0], 0.0}; };
    setup.p2 = [epsilon](std::span<const double>) { return Mat2{0.0, 1.0, -epsilon, 0.0}; };
    setup.exact_step = [epsilon](std::span<const double> w, double lambda) {
        return band_edge_conjugated(lambda, epsilon, w[0]);
    };
    setup.energy = [epsilon](double lambda) { return -2.0 + epsilon * std::pow(lambda, 4.0 / 3.0); };
    return setup;
}

FourierCoefficients fourier_coefficients(const Mat2& p)
{
    const double scale = std::max(1.0, p.frobenius());
    if (std::abs(p.trace()) > 1e-12 * scale)
        throw std::invalid_argument("fourier_coefficients: P must be traceless");
    const Complex i(0.0, 1.0);
    const double r = 1.0 / std::sqrt(2.0);
    const Complex v0 = r, v1 = -i * r;
    auto apply = [](const Mat2& m, Complex x, Complex y) {
        return std::pair<Complex, Complex>{m.a * x + m.b * y, m.c * x + m.d * y};
    };
    const auto [pv0, pv1] = apply(p, v0, v1);
    const Mat2 sq = p.transpose() * p;
    const auto [qv0, qv1] = apply(sq, v0, v1);
    FourierCoefficients c;
    c.alpha = std::conj(v0) * pv0 + std::conj(v1) * pv1;
    c.beta = v0 * pv0 + v1 * pv1;
    c.gamma = v0 * qv0 + v1 * qv1;
    return c;
}

double phase_polynomial(const Mat2& p, double theta)
{
    const Complex i(0.0, 1.0);
    const double r = 1.0 / std::sqrt(2.0);
    const Complex v0 = r, v1 = -i * r;
    const double x = std::cos(theta), y = std::sin(theta);
    const Complex num = std::conj(v0) * (p.a * x + p.b * y) + std::conj(v1) * (p.c * x + p.d * y);
    const Complex den = std::conj(v0) * x + std::conj(v1) * y;
    return (num / den).imag();
}

double phase_polynomial(const FourierCoefficients& c, double theta)
{
    return (c.alpha - c.beta * std::polar(1.0, 2.0 * theta)).imag();
}

double phase_polynomial_derivative(const FourierCoefficients& c, double theta)
{
    return -2.0 * (c.beta * std::polar(1.0, 2.0 * theta)).real();
}

ExpansionCheck log_norm_expansion_check(const AnomalySetup& setup, std::span<const double> window,
                                        double theta, double lambda)
{
    check_setup(setup);
    if (window.size() < setup.values_per_step)
        throw std::invalid_argument("log_norm_expansion_check: window shorter than one step");
    const Mat2 p1 = setup.p1(window);
    const Mat2 p2 = setup.p2(window);
    const auto c1 = fourier_coefficients(p1);
    const auto c2 = fourier_coefficients(p2);
    const double l1 = std::pow(lambda, setup.eta);
    const double l2 = l1 * l1;

    const Mat2 t = setup.exact_step(window.first(setup.values_per_step), lambda);
    const Vec2 w = t * Vec2{std::cos(theta), std::sin(theta)};

    ExpansionCheck out;
    out.exact = std::log(w.norm());
    const Complex e2 = std::polar(1.0, 2.0 * theta);
    const Complex e4 = e2 * e2;
    const Complex series = l1 * c1.beta * e2 + l2 * c2.beta * e2
        + 0.5 * l2 * (std::norm(c1.beta) + c1.gamma * e2 - c1.beta * c1.beta * e4);
    out.expansion = series.real();
    out.residual = std::abs(out.exact - out.expansion);

    const double predicted = theta + setup.k + l1 * phase_polynomial(c1, theta)
        + l2 * (phase_polynomial(c2, theta)
                + 0.5 * phase_polynomial(c1, theta) * phase_polynomial_derivative(c1, theta));
    out.angle_residual = std::abs(wrap_difference(projective_action(t, theta) - predicted));
    return out;
}

PhaseOrbit phase_orbit(const AnomalySetup& setup, const PotentialProcess& process, double lambda,
                       double theta0, std::size_t n, std::uint64_t stream_id)
{
    check_setup(setup);
    if (n == 0)
        throw std::invalid_argument("phase_orbit: need n >= 1");
    process.validate();
    const std::size_t vps = setup.values_per_step;
    PotentialStream stream(process, stream_id);
    PhaseOrbit orbit;
    orbit.values_per_step = vps;
    orbit.potential.resize(n * vps + kLookAhead);
    stream.fill(orbit.potential);
    orbit.theta.resize(n + 1);
    double theta = reduce_angle(theta0);
    orbit.theta[0] = theta;
    long double log_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const Mat2 t = setup.exact_step(std::span<const double>(orbit.potential).subspan(j * vps, vps), lambda);
        const Vec2 w = t * Vec2{std::cos(theta), std::sin(theta)};
        log_sum += std::log(w.norm());
        theta = reduce_angle(std::atan2(w.y, w.x));
        orbit.theta[j + 1] = theta;
    }
    orbit.log_norm_sum = static_cast<double>(log_sum);
    return orbit;
}

PhaseOrbit phase_orbit(const PotentialProcess& process, double energy, double lambda, double theta0,
                       std::size_t n, std::uint64_t stream_id)
{
    if (n == 0)
        throw std::invalid_argument("phase_orbit: need n >= 1");
    process.validate();
    PotentialStream stream(process, stream_id);
    PhaseOrbit orbit;
    orbit.values_per_step = 1;
    orbit.potential.resize(n + kLookAhead);
    stream.fill(orbit.potential);
    orbit.theta.resize(n + 1);
    double theta = reduce_angle(theta0);
    orbit.theta[0] = theta;
    long double log_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const Vec2 w = transfer_matrix(energy, lambda, orbit.potential[j]) * Vec2{std::cos(theta), std::sin(theta)};
        log_sum += std::log(w.norm());
        theta = reduce_angle(std::atan2(w.y, w.x));
        orbit.theta[j + 1] = theta;
    }
    orbit.log_norm_sum = static_cast<double>(log_sum);
    return orbit;
}

std::vector<double> phase_histogram(const AnomalySetup& setup, const PotentialProcess& process,
                                    double lambda, std::size_t n, std::size_t bins,
                                    std::uint64_t stream_id, std::size_t discard)
{
    check_setup(setup);
    if (n == 0 || bins == 0)
        throw std::invalid_argument("phase_histogram: need n >= 1 and bins >= 1");
    process.validate();
    const std::size_t vps = setup.values_per_step;
    PotentialStream stream(process, stream_id);
    std::vector<double> chunk(4096 * vps);
    std::vector<std::size_t> counts(bins, 0);
    double theta = 0.0;
    const std::size_t total = n + discard;
    std::size_t done = 0;
    const double scale = static_cast<double>(bins) / kPi;
    while (done < total) {
        const std::size_t len = std::min<std::size_t>(4096, total - done);
        stream.fill(std::span<double>(chunk).first(len * vps));
        for (std::size_t j = 0; j < len; ++j, ++done) {
            if (done >= discard)
                counts[std::min(bins - 1, static_cast<std::size_t>(theta * scale))] += 1;
            const Mat2 t = setup.exact_step(std::span<const double>(chunk).subspan(j * vps, vps), lambda);
            theta = projective_action(t, theta);
        }
    }
    std::vector<double> masses(bins);
    for (std::size_t b = 0; b < bins; ++b)
        masses[b] = static_cast<double>(counts[b]) / static_cast<double>(n);
    return masses;
}

std::vector<double> phase_histogram(std::span<const double> thetas, std::size_t bins)
{
    if (thetas.empty() || bins == 0)
        throw std::invalid_argument("phase_histogram: need samples and bins >= 1");
    std::vector<double> masses(bins, 0.0);
    const double scale = static_cast<double>(bins) / kPi;
    const double unit = 1.0 / static_cast<double>(thetas.size());
    for (double t : thetas)
        masses[std::min(bins - 1, static_cast<std::size_t>(reduce_angle(t) * scale))] += unit;
    return masses;
}

double total_variation(std::span<const double> masses, const std::function<double(double)>& density)
{
    if (masses.empty())
        throw std::invalid_argument("total_variation: empty histogram");
    const double width = kPi / static_cast<double>(masses.size());
    double tv = 0.0;
    for (std::size_t b = 0; b < masses.size(); ++b)
        tv += std::abs(masses[b] - density((static_cast<double>(b) + 0.5) * width) * width);
    return 0.5 * tv;
}

Complex birkhoff_sum(const PhaseFunction& f, const PhaseOrbit& orbit)
{
    const std::size_t n = orbit.steps();
    if (n == 0)
        throw std::invalid_argument("birkhoff_sum: empty orbit");
    Complex sum = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        sum += f(orbit.theta[j]);
    return sum / static_cast<double>(n);
}

Complex birkhoff_like_sum(const WindowFunction& g, const PhaseFunction& f, const PhaseOrbit& orbit)
{
    const std::size_t n = orbit.steps();
    if (n == 0)
        throw std::invalid_argument("birkhoff_like_sum: empty orbit");
    const std::size_t vps = orbit.values_per_step;
    if (orbit.potential.size() < (n - 1) * vps + g.width)
        throw std::invalid_argument("birkhoff_like_sum: potential does not cover every window of the orbit");
    const std::span<const double> pot(orbit.potential);
    Complex sum = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        sum += g.eval(pot.subspan(j * vps, g.width)) * f(orbit.theta[j]);
    return sum / static_cast<double>(n);
}

DriftDiffusionEstimate drift_diffusion_estimate(const AnomalySetup& setup, const PotentialProcess& process,
                                                std::size_t block, std::size_t samples,
                                                std::span<const double> thetas, std::uint64_t stream_base)
{
    check_setup(setup);
    if (block == 0 || samples < 2 || thetas.empty())
        throw std::invalid_argument("drift_diffusion_estimate: need block >= 1, samples >= 2, a theta grid");
    process.validate();
    const std::size_t vps = setup.values_per_step;
    const std::size_t g = thetas.size();
    std::vector<PolyWeights> weights;
    for (double t : thetas)
        weights.push_back(weights_at(t));

    // One potential window per sample serves every grid angle.
    std::vector<double> p_samples(samples * g), q_samples(samples * g);
    parallel_for(samples, [&](std::size_t s) {
        PotentialStream stream(process, kDriftStreamBase + stream_base + s);
        std::vector<double> pot(block * vps + kLookAhead);
        stream.fill(pot);
        std::vector<double> sum(g, 0.0), q(g, 0.0);
        for (std::size_t n = 0; n < block; ++n) {
            const auto w = std::span<const double>(pot).subspan(n * vps, vps);
            const Mat2 p1 = setup.p1(w);
            const Mat2 p2 = setup.p2(w);
            for (std::size_t i = 0; i < g; ++i) {
                const double v = weights[i].value(p1);
                q[i] += (v + 2.0 * sum[i]) * weights[i].derivative(p1) + 2.0 * weights[i].value(p2);
                sum[i] += v;
            }
        }
        const double nb = static_cast<double>(block);
        for (std::size_t i = 0; i < g; ++i) {
            p_samples[s * g + i] = sum[i] * sum[i] / nb;
            q_samples[s * g + i] = q[i] / nb;
        }
    });

    DriftDiffusionEstimate est;
    est.theta.assign(thetas.begin(), thetas.end());
    est.block = block;
    est.samples = samples;
    std::vector<double> column(samples);
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t s = 0; s < samples; ++s)
            column[s] = p_samples[s * g + i];
        const auto p = mean_and_error(column);
        for (std::size_t s = 0; s < samples; ++s)
            column[s] = q_samples[s * g + i];
        const auto q = mean_and_error(column);
        est.p_hat.push_back(p.mean);
        est.p_err.push_back(p.err);
        est.q_hat.push_back(q.mean);
        est.q_err.push_back(q.err);
    }
    return est;
}

DriftDiffusionEstimate drift_diffusion_dynamic(const AnomalySetup& setup, const PotentialProcess& process,
                                               double lambda, std::size_t block, std::size_t samples,
                                               std::span<const double> thetas, std::uint64_t stream_base)
{
    check_setup(setup);
    if (block == 0 || samples < 2 || thetas.empty() || !(lambda > 0.0))
        throw std::invalid_argument("drift_diffusion_dynamic: need lambda > 0, block >= 1, samples >= 2, a grid");
    process.validate();
    const std::size_t vps = setup.values_per_step;
    const std::size_t g = thetas.size();
    const double scale = std::pow(lambda, 2.0 * setup.eta) * static_cast<double>(block);

    std::vector<double> increments(samples * g);
    parallel_for(samples, [&](std::size_t s) {
        PotentialStream stream(process, kDriftStreamBase + stream_base + s);
        std::vector<double> pot(block * vps);
        stream.fill(pot);
        for (std::size_t i = 0; i < g; ++i) {
            double theta = reduce_angle(thetas[i]);
            double lifted = 0.0;
            for (std::size_t n = 0; n < block; ++n) {
                const Mat2 t = setup.exact_step(std::span<const double>(pot).subspan(n * vps, vps), lambda);
                const double next = projective_action(t, theta);
                lifted += wrap_difference(next - theta - setup.k);
                theta = next;
            }
            increments[s * g + i] = lifted;
        }
    });

    DriftDiffusionEstimate est;
    est.theta.assign(thetas.begin(), thetas.end());
    est.block = block;
    est.samples = samples;
    est.valid = scale <= 0.1;
    std::vector<double> column(samples), squares(samples);
    const double ns = static_cast<double>(samples);
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t s = 0; s < samples; ++s)
            column[s] = increments[s * g + i];
        const auto m = mean_and_error(column);
        for (std::size_t s = 0; s < samples; ++s)
            squares[s] = (column[s] - m.mean) * (column[s] - m.mean);
        const auto v = mean_and_error(squares);
        est.p_hat.push_back(v.mean * ns / (ns - 1.0) / scale);
        est.p_err.push_back(v.err / scale);
        est.q_hat.push_back(2.0 * m.mean / scale);
        est.q_err.push_back(2.0 * m.err / scale);
    }
    return est;
}

}  // namespace locmix
