#include <doctest.h>

#include "locmix/errors.hpp"
#include "locmix/potential.hpp"
#include "locmix/spectral.hpp"

#include <cmath>
#include <complex>
#include <numbers>

using namespace locmix;

namespace {

constexpr double kPi = std::numbers::pi;

// sum_n e^{ikn} a^{|n|}, truncated far into the geometric tail.
double geometric_density(double a, double k)
{
    std::complex<double> s = 1.0;
    double an = 1.0;
    for (int n = 1; n < 2000 && std::abs(an) > 1e-18; ++n) {
        an *= a;
        s += 2.0 * an * std::cos(k * n);
    }
    return s.real();
}

bool within(const SpectralDensityEstimate& est, double exact)
{
    return std::abs(est.value - exact) <= std::max(0.05 * exact, 3.0 * est.std_error);
}

// A length-N periodogram is biased by at most (1/N) sum_n |n| |C(n)|.
double fejer_bias(const PotentialProcess& p, std::size_t n)
{
    const auto v = sample_stream(p, 1 << 20, 77);
    double mean = 0.0;
    for (double x : v)
        mean += x;
    mean /= double(v.size());
    double total = 0.0;
    for (std::size_t lag = 1; lag <= 200; ++lag) {
        double c = 0.0;
        for (std::size_t i = 0; i + lag < v.size(); ++i)
            c += (v[i] - mean) * (v[i + lag] - mean);
        c /= double(v.size() - lag);
        total += 2.0 * double(lag) * std::abs(c);
    }
    return total / double(n);
}

}  // namespace

TEST_CASE("white noise has a flat spectrum")
{
    const auto p = PotentialProcess::bernoulli(1);
    for (double k : {0.0, 0.7, kPi / 2, kPi}) {
        const auto est = periodogram_density(p, k, 4096, 64);
        CHECK(std::abs(est.value - 1.0) <= 3.0 * est.std_error);
        CHECK(exact_density(p, k).value() == doctest::Approx(1.0));
    }
    PotentialProcess biased{IidParams{{0.0, 3.0}, {0.75, 0.25}}, 1, std::nullopt};
    CHECK(exact_density(biased, 1.0).value() == doctest::Approx(9.0 * 0.25 * 0.75));
}

TEST_CASE("cocycle spectrum vanishes at k = 0")
{
    const auto p = PotentialProcess::cocycle(1.0, 2);
    const auto est = periodogram_density(p, 0.0, 4096, 64);
    CHECK(est.value <= 3.0 * est.std_error + 1e-3);
    CHECK(exact_density(p, 0.0).value() == doctest::Approx(0.0));
    CHECK(exact_density(p, kPi).value() == doctest::Approx(1.0));
    const auto big = periodogram_density(p, 0.0, 10'000, 100);
    CHECK(big.value <= 1e-2);
}

TEST_CASE("two-state chain density against the geometric series")
{
    const double p = 0.3, a = 1.0 - 2.0 * p;
    const auto proc = PotentialProcess::two_state_markov(p, 3);
    const auto& chain = std::get<MarkovParams>(proc.params);
    for (double k : {0.0, kPi / 3, kPi / 2, 2.0, kPi}) {
        const double series = geometric_density(a, k);
        CHECK(exact_markov_density(chain, k) == doctest::Approx(series).epsilon(1e-10));
        CHECK(series == doctest::Approx((1 - a * a) / (1 - 2 * a * std::cos(k) + a * a)).epsilon(1e-12));
    }
    CHECK(exact_markov_density(chain, 0.0) == doctest::Approx((1 - a * a) / ((1 - a) * (1 - a))).epsilon(1e-12));
    CHECK(exact_markov_density(chain, kPi) == doctest::Approx(0.84 / 1.96).epsilon(1e-12));
    CHECK(exact_markov_density(chain, kPi) == doctest::Approx(0.428571428571).epsilon(1e-9));

    CHECK(within(periodogram_density(proc, 0.0, 8192, 64), exact_markov_density(chain, 0.0)));
}

TEST_CASE("iid written as a chain with identical rows")
{
    MarkovParams chain{{{0.5, 0.5}, {0.5, 0.5}}, {-1.0, 1.0}};
    for (double k : {0.0, 1.0, kPi})
        CHECK(exact_markov_density(chain, k) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("three-state chain matches the autocovariance series")
{
    MarkovParams chain{{{0.6, 0.3, 0.1}, {0.2, 0.5, 0.3}, {0.3, 0.2, 0.5}}, {-1.0, 0.5, 2.0}};
    // Independent oracle: C(n) = sum_ij pi_i f_i (P^n)_ij f_j with centered f.
    const auto pi = stationary_distribution(chain);
    double mean = 0.0;
    for (int i = 0; i < 3; ++i)
        mean += pi[i] * chain.values[i];
    std::vector<double> f(3);
    for (int i = 0; i < 3; ++i)
        f[i] = chain.values[i] - mean;
    std::vector<double> g = f;  // P^n f
    std::vector<double> c;
    for (int n = 0; n < 200; ++n) {
        double cn = 0.0;
        for (int i = 0; i < 3; ++i)
            cn += pi[i] * f[i] * g[i];
        c.push_back(cn);
        std::vector<double> next(3, 0.0);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                next[i] += chain.transition[i][j] * g[j];
        g = next;
    }
    for (double k : {0.0, kPi / 3, kPi / 2, kPi}) {
        double series = c[0];
        for (std::size_t n = 1; n < c.size(); ++n)
            series += 2.0 * std::cos(k * double(n)) * c[n];
        CHECK(exact_markov_density(chain, k) == doctest::Approx(series).epsilon(1e-9));
        CHECK(autocov_sum_density(c, k).value == doctest::Approx(series).epsilon(1e-12));
    }
    PotentialProcess reducible{MarkovParams{{{1.0, 0.0}, {0.0, 1.0}}, {1.0, -1.0}}, 1, std::nullopt};
    CHECK_THROWS_AS(exact_markov_density(std::get<MarkovParams>(reducible.params), 1.0), ConfigError);
}

TEST_CASE("moving average density closed form")
{
    const double a = 0.5, var = 1.0 / (4.0 * (1.0 - a * a));
    const auto proc = PotentialProcess::moving_average(a, 4);
    for (double k : {0.0, kPi / 3, kPi / 2, kPi}) {
        const double exact = var * geometric_density(a, k);
        CHECK(exact_moving_average_density(a, k) == doctest::Approx(exact).epsilon(1e-10));
        CHECK(within(periodogram_density(proc, k, 4096, 64), exact));
    }
}

TEST_CASE("periodogram agrees with every exact oracle at the standard frequencies")
{
    const std::vector<PotentialProcess> procs{PotentialProcess::bernoulli(9), PotentialProcess::two_state_markov(0.3, 9),
                                              PotentialProcess::two_state_markov(0.8, 9),
                                              PotentialProcess::moving_average(0.7, 9), PotentialProcess::cocycle(1.5, 9)};
    for (const auto& p : procs) {
        CAPTURE(to_string(p.kind()));
        const double bias = fejer_bias(p, 4096);
        for (double k : {0.0, kPi / 3, kPi / 2, kPi}) {
            CAPTURE(k);
            const auto est = periodogram_density(p, k, 4096, 64);
            const double exact = exact_density(p, k).value();
            CHECK(std::abs(est.value - exact) <= std::max(0.05 * exact, 3.0 * est.std_error) + bias);
        }
    }
}

TEST_CASE("periodogram is symmetric under k -> 2 pi - k")
{
    const auto data = sample_stream(PotentialProcess::two_state_markov(0.3, 5), 1 << 18);
    for (double k : {0.4, 1.3, 2.9}) {
        const auto a = periodogram_density(data, k, 4096);
        const auto b = periodogram_density(data, 2 * kPi - k, 4096);
        CHECK(a.value == doctest::Approx(b.value).epsilon(1e-9));
    }
}

TEST_CASE("correlation form of V with itself")
{
    const auto iid = correlation_form(potential_value(), potential_value(), PotentialProcess::bernoulli(1), 20, 1'000'000);
    CHECK(iid.value == doctest::Approx(1.0).epsilon(0.02));

    const auto chain = PotentialProcess::two_state_markov(0.3, 2);
    const double exact = exact_density(chain, 0.0).value();
    const auto cf = correlation_form(potential_value(), potential_value(), chain, 60, 4'000'000);
    CHECK(std::abs(cf.value - exact) <= 1e-2 * exact + 0.02);

    const auto pg = periodogram_density(chain, 0.0, 8192, 64);
    CHECK(std::abs(cf.value - pg.value) <= 3.0 * pg.std_error + 0.02);
}

TEST_CASE("correlation form with the cocycle partner against a brute-force double sum")
{
    const auto proc = PotentialProcess::two_state_markov(0.3, 3);
    const auto data = sample_stream(proc, 400'000);
    const std::size_t cutoff = 40;
    const auto cf = correlation_form(potential_value(), cocycle_partner(), data, cutoff);

    // E(g1 g2) + 2 sum_m E(g1 . g2 o S^m) with g2 = V o S - V, written out.
    const std::size_t n = data.size() - cutoff - 2;
    auto avg = [&](auto term) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += term(i);
        return s / double(n);
    };
    double brute = avg([&](std::size_t i) { return data[i] * (data[i + 1] - data[i]); });
    for (std::size_t m = 1; m <= cutoff; ++m)
        brute += 2.0 * avg([&](std::size_t i) { return data[i] * (data[i + m + 1] - data[i + m]); });
    CHECK(cf.value == doctest::Approx(brute).epsilon(0.02));
    // Telescoping leaves -C(0) - C(1) + 2 C(M+1), i.e. -(1 + a) at large M.
    const double a = 0.4;
    CHECK(cf.value == doctest::Approx(-(1.0 + a)).epsilon(0.05));
}

TEST_CASE("divergent power-law profile is rejected")
{
    const auto data = sample_stream(PotentialProcess::bernoulli(1), 1000);
    MixingProfile slow{DecayKind::PowerLaw, 0.8, 1.0, false, 10, 0.0};
    CHECK_THROWS_AS(correlation_form(potential_value(), potential_value(), data, 10, slow), std::domain_error);
    CHECK(default_cutoff(MixingProfile{DecayKind::Exponential, 0.5, 1.0, false, 10, 0.0}) == 80);
    CHECK(default_cutoff(MixingProfile{DecayKind::PowerLaw, 2.5, 1.0, false, 10, 0.0}) == 10'000);
}
