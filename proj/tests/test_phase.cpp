#include <doctest.h>

#include "locmix/fokkerplanck.hpp"
#include "locmix/phase.hpp"
#include "locmix/potential.hpp"
#include "locmix/spectral.hpp"
#include "locmix/transfer.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace locmix;

namespace {

constexpr double kPi = std::numbers::pi;
const Complex I{0.0, 1.0};

double angle_gap(double a, double b)
{
    const double d = std::fmod(std::abs(a - b), kPi);
    return std::min(d, kPi - d);
}

double slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Mat2 random_sl2(std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    Mat2 m{g(rng), g(rng), g(rng), g(rng)};
    if (m.det() < 0.0)
        m = Mat2{m.b, m.a, m.d, m.c};
    return m.unimodular();
}

}  // namespace

TEST_CASE("projective action")
{
    CHECK(projective_action(Mat2::identity(), 0.4) == doctest::Approx(0.4).epsilon(1e-15));
    for (double k : {0.3, 1.0, 2.5})
        CHECK(angle_gap(projective_action(rotation(k), 1.1), 1.1 + k) <= 1e-14);
    CHECK(projective_action(Mat2::diagonal(2.0, 0.5), kPi / 4) == doctest::Approx(std::atan(0.25)).epsilon(1e-14));
    CHECK(std::atan(0.25) == doctest::Approx(0.24498).epsilon(1e-5));
    const double r = projective_action(Mat2{-1.0, 0.0, 0.0, -1.0}, 2.0);
    CHECK(r >= 0.0);
    CHECK(r < kPi);
}

TEST_CASE("projective action is a group action")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, kPi);
    for (int i = 0; i < 200; ++i) {
        const Mat2 a = random_sl2(rng), b = random_sl2(rng);
        const double theta = u(rng);
        CHECK(angle_gap(projective_action(a * b, theta), projective_action(a, projective_action(b, theta))) <= 1e-12);
    }
}

TEST_CASE("fourier coefficients of the anomaly perturbations")
{
    const double v = 0.7, u = -1.3;
    const Mat2 center{0.0, -u, v, 0.0};
    const auto c = fourier_coefficients(center);
    CHECK(std::abs(c.alpha - I * (v + u) / 2.0) <= 1e-15);
    CHECK(std::abs(c.beta - I * (u - v) / 2.0) <= 1e-15);
    CHECK(std::abs(c.gamma - (v * v - u * u) / 2.0) <= 1e-15);

    const double w = -0.4;
    const auto e = fourier_coefficients(Mat2{0.0, 0.0, w, 0.0});
    CHECK(std::abs(e.alpha - I * w / 2.0) <= 1e-15);
    CHECK(std::abs(e.beta + I * w / 2.0) <= 1e-15);
    CHECK(std::abs(e.gamma - w * w / 2.0) <= 1e-15);

    const auto z = fourier_coefficients(Mat2{0.0, 0.0, 0.0, 0.0});
    CHECK(std::abs(z.alpha) + std::abs(z.beta) + std::abs(z.gamma) == 0.0);
    CHECK_THROWS_AS(fourier_coefficients(Mat2::identity()), std::invalid_argument);
}

TEST_CASE("phase polynomial reconstruction")
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int i = 0; i < 100; ++i) {
        const double a = g(rng), b = g(rng), c = g(rng);
        const Mat2 p{a, b, c, -a};
        const auto coeffs = fourier_coefficients(p);
        for (double theta : {0.0, 0.3, 1.4, 2.9}) {
            // d/deps of the angle of (1 + eps P) e_theta at eps = 0.
            const double direct = -std::sin(theta) * (a * std::cos(theta) + b * std::sin(theta))
                + std::cos(theta) * (c * std::cos(theta) - a * std::sin(theta));
            CHECK(phase_polynomial(p, theta) == doctest::Approx(direct).epsilon(1e-12).scale(1.0));
            CHECK(phase_polynomial(coeffs, theta) == doctest::Approx(direct).epsilon(1e-12).scale(1.0));
            const double h = 1e-6;
            const double fd = (phase_polynomial(coeffs, theta + h) - phase_polynomial(coeffs, theta - h)) / (2 * h);
            CHECK(phase_polynomial_derivative(coeffs, theta) == doctest::Approx(fd).epsilon(1e-7).scale(1.0));
        }
    }
}

TEST_CASE("setup perturbations are traceless and centered")
{
    const auto v = sample_stream(PotentialProcess::bernoulli(2), 200'000);
    for (const auto& s : {bulk_setup(1.0), band_center_setup(0.5), band_edge_setup(-1.0)}) {
        CAPTURE(s.name);
        Mat2 sum{0.0, 0.0, 0.0, 0.0};
        std::size_t count = 0;
        for (std::size_t i = 0; i + 16 < v.size(); i += s.values_per_step, ++count) {
            const auto w = std::span<const double>(v).subspan(i, 16);
            const Mat2 p1 = s.p1(w), p2 = s.p2(w);
            CHECK(std::abs(p1.trace()) <= 1e-15);
            CHECK(std::abs(p2.trace()) <= 1e-15);
            sum = sum + p1;
        }
        CHECK(std::abs(sum.c) / double(count) <= 0.02);
        CHECK(std::abs(sum.b) / double(count) <= 0.02);
    }
}

TEST_CASE("zero perturbation expands to nothing")
{
    AnomalySetup trivial = bulk_setup(0.8);
    trivial.p1 = [](std::span<const double>) { return Mat2{0.0, 0.0, 0.0, 0.0}; };
    trivial.exact_step = [](std::span<const double>, double) { return rotation(0.8); };
    const std::vector<double> w{0.3};
    const auto c = log_norm_expansion_check(trivial, w, 0.6, 0.1);
    CHECK(c.exact == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(c.residual <= 1e-15);
    CHECK(c.angle_residual <= 1e-14);
}

TEST_CASE("expansion residual is third order in lambda^eta")
{
    SUBCASE("band edge")
    {
        const auto s = band_edge_setup(0.5);
        const std::vector<double> lambdas{1e-2, 1e-3, 1e-4};
        std::vector<double> worst(lambdas.size(), 0.0), worst_angle(lambdas.size(), 0.0);
        for (std::size_t i = 0; i < lambdas.size(); ++i)
            for (double v : {-1.0, 1.0})
                for (double theta : {0.2, 0.9, 2.0}) {
                    const std::vector<double> w{v};
                    const auto c = log_norm_expansion_check(s, w, theta, lambdas[i]);
                    worst[i] = std::max(worst[i], c.residual);
                    worst_angle[i] = std::max(worst_angle[i], c.angle_residual);
                }
        CHECK(slope(lambdas, worst) == doctest::Approx(1.0).epsilon(0.2));
        CHECK(slope(lambdas, worst_angle) == doctest::Approx(1.0).epsilon(0.2));
    }
    SUBCASE("band center")
    {
        const auto s = band_center_setup(0.5);
        const std::vector<double> lambdas{0.1, 0.05, 0.025};
        std::vector<double> worst(lambdas.size(), 0.0), worst_angle(lambdas.size(), 0.0);
        for (std::size_t i = 0; i < lambdas.size(); ++i)
            for (double v : {-1.0, 1.0})
                for (double u : {-1.0, 1.0})
                    for (double theta : {0.2, 0.9, 2.0}) {
                        const std::vector<double> w{v, u};
                        const auto c = log_norm_expansion_check(s, w, theta, lambdas[i]);
                        worst[i] = std::max(worst[i], c.residual);
                        worst_angle[i] = std::max(worst_angle[i], c.angle_residual);
                    }
        CHECK(slope(lambdas, worst) == doctest::Approx(3.0).epsilon(0.2 / 3.0));
        CHECK(slope(lambdas, worst_angle) == doctest::Approx(3.0).epsilon(0.2 / 3.0));
    }
}

TEST_CASE("free orbit is a rigid rotation")
{
    const double k = 0.9;
    const auto orbit = phase_orbit(bulk_setup(k), PotentialProcess::bernoulli(1), 0.0, 0.3, 1000);
    for (std::size_t j = 0; j <= 1000; j += 97)
        CHECK(angle_gap(orbit.theta[j], 0.3 + double(j) * k) <= 1e-10);
    for (double t : orbit.theta) {
        CHECK(t >= 0.0);
        CHECK(t < kPi);
    }
}

TEST_CASE("orbit log-norms telescope to the transfer product")
{
    const double e = 0.6, lambda = 0.8;
    const auto orbit = phase_orbit(PotentialProcess::two_state_markov(0.3, 2), e, lambda, 0.5, 5000, 1);
    Vec2 w{std::cos(0.5), std::sin(0.5)};
    double log_norm = 0.0;
    for (std::size_t j = 0; j < orbit.steps(); ++j) {
        w = transfer_matrix(e, lambda, orbit.potential[j]) * w;
        const double n = w.norm();
        log_norm += std::log(n);
        w = Vec2{w.x / n, w.y / n};
    }
    CHECK(orbit.log_norm_sum == doctest::Approx(log_norm).epsilon(1e-12));
    CHECK(std::abs(orbit.log_norm_sum - log_norm) <= 1e-9);
}

TEST_CASE("birkhoff sums")
{
    const auto orbit = phase_orbit(PotentialProcess::bernoulli(1), 1.0, 0.3, 0.2, 10'000);
    CHECK(std::abs(birkhoff_sum([](double) { return Complex(1.0); }, orbit) - 1.0) <= 1e-14);

    for (double k : {0.4, 1.0, 1.3}) {
        const auto free = phase_orbit(bulk_setup(k), PotentialProcess::bernoulli(1), 0.0, 0.2, 5000);
        const double n = double(free.steps());
        const auto s = birkhoff_sum([](double t) { return std::polar(1.0, 2.0 * t); }, free);
        CHECK(std::abs(s) <= 1.0 / (n * std::abs(std::sin(k))) + 1e-12);
    }
}

TEST_CASE("birkhoff-like sums shrink with the coupling")
{
    const auto p = PotentialProcess::two_state_markov(0.3, 4);
    const double k = 1.0;
    std::vector<double> magnitude;
    for (double lambda : {0.1, 0.05, 0.025}) {
        const auto orbit = phase_orbit(bulk_setup(k), p, lambda, 0.0, 2'000'000);
        magnitude.push_back(std::abs(
            birkhoff_like_sum(potential_value(), [](double t) { return std::polar(1.0, 2.0 * t); }, orbit)));
    }
    CHECK(magnitude[0] > magnitude[1]);
    CHECK(magnitude[1] > magnitude[2]);

    PhaseOrbit short_orbit = phase_orbit(bulk_setup(k), p, 0.1, 0.0, 10);
    short_orbit.potential.resize(5);
    CHECK_THROWS_AS(birkhoff_like_sum(potential_value(), [](double) { return Complex(1.0); }, short_orbit),
                    std::invalid_argument);
}

TEST_CASE("orbit histogram matches the stationary density")
{
    const auto rho = density_band_edge(1.0, 0.0);
    const auto p = PotentialProcess::bernoulli(1);
    const auto hist = phase_histogram(band_edge_setup(0.0), p, 1e-2, 4'000'000, 128, 0, 1000);
    CHECK(total_variation(hist, [&](double t) { return rho.at(t); }) <= 0.05);

    // Dropping the first half leaves the histogram unchanged within MC error.
    const auto tail = phase_histogram(band_edge_setup(0.0), p, 1e-2, 2'000'000, 128, 0, 2'001'000);
    double tv = 0.0;
    for (std::size_t b = 0; b < hist.size(); ++b)
        tv += 0.5 * std::abs(hist[b] - tail[b]);
    CHECK(tv <= 0.05);

    const auto thetas = phase_orbit(band_edge_setup(0.0), p, 1e-2, 0.0, 100'000).theta;
    const auto h = phase_histogram(thetas, 16);
    double mass = 0.0;
    for (double m : h)
        mass += m;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("band edge drift-diffusion estimates")
{
    const auto p = PotentialProcess::bernoulli(3);
    const std::vector<double> thetas{0.0, kPi / 2};
    const auto est = drift_diffusion_estimate(band_edge_setup(0.0), p, 200, 4000, thetas);
    CHECK(est.p_hat[0] == doctest::Approx(1.0).epsilon(0.1));
    CHECK(std::abs(est.p_hat[1]) <= 0.05);
    CHECK(est.q_hat[1] == doctest::Approx(-2.0).epsilon(0.1));

    const auto setting = FPSetting::band_edge(0.0, 1.0);
    CHECK(coefficient_p(setting, 0.0) == doctest::Approx(1.0));
    CHECK(coefficient_q(setting, kPi / 2) == doctest::Approx(-2.0));
}

TEST_CASE("band center drift-diffusion estimates")
{
    const auto p = PotentialProcess::bernoulli(4);
    std::vector<double> thetas;
    for (int i = 0; i < 8; ++i)
        thetas.push_back(kPi * i / 8.0);
    const auto est = drift_diffusion_estimate(band_center_setup(0.0), p, 200, 4000, thetas);
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        const double c = std::cos(2.0 * thetas[i]);
        const double exact = 0.5 + 0.5 * c * c;
        CHECK(std::abs(est.p_hat[i] - exact) <= 0.1 * 1.0);
        CHECK(std::abs(est.q_hat[i] - (-0.5 * std::sin(4.0 * thetas[i]))) <= 0.1 * 0.5 + 3.0 * est.q_err[i]);
    }
}

TEST_CASE("dynamic drift-diffusion estimate flags large blocks")
{
    const auto p = PotentialProcess::bernoulli(5);
    const std::vector<double> thetas{0.0};
    const auto ok = drift_diffusion_dynamic(band_edge_setup(0.0), p, 1e-6, 500, 200, thetas);
    CHECK(ok.valid);
    const auto bad = drift_diffusion_dynamic(band_edge_setup(0.0), p, 1e-1, 500, 200, thetas);
    CHECK_FALSE(bad.valid);
}
