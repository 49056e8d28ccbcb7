#include <doctest.h>

#include "locmix/errors.hpp"
#include "locmix/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace locmix;

namespace {

double mean(std::span<const double> x)
{
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x)
{
    const double m = mean(x);
    double s = 0.0;
    for (double v : x)
        s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

std::vector<PotentialProcess> shipped_processes(std::uint64_t seed)
{
    return {PotentialProcess::bernoulli(seed), PotentialProcess::two_state_markov(0.3, seed),
            PotentialProcess::moving_average(0.5, seed), PotentialProcess::intermittent(0.25, seed),
            PotentialProcess::cocycle(1.0, seed)};
}

}  // namespace

TEST_CASE("bernoulli sample mean is centered")
{
    for (std::uint64_t seed : {1u, 2u, 99u}) {
        const auto v = sample_stream(PotentialProcess::bernoulli(seed), 1'000'000);
        CHECK(std::abs(mean(v)) <= 3e-3);
        CHECK(std::all_of(v.begin(), v.end(), [](double x) { return x == 1.0 || x == -1.0; }));
    }
}

TEST_CASE("every shipped process is centered and stationary")
{
    for (const auto& p : shipped_processes(11)) {
        CAPTURE(to_string(p.kind()));
        const std::size_t n = 1'000'000;
        const auto v = sample_stream(p, n);
        const double sd = stddev(v);
        // Correlated processes get the batch-means standard error.
        const std::size_t batch = 1000;
        std::vector<double> means;
        for (std::size_t b = 0; b + batch <= n; b += batch)
            means.push_back(mean(std::span<const double>(v).subspan(b, batch)));
        const double se = std::max(sd / std::sqrt(double(n)), stddev(means) / std::sqrt(double(means.size())));
        CHECK(std::abs(mean(v)) <= 4.0 * se);

        const std::size_t w = 100'000;
        std::vector<double> window_means;
        for (std::size_t b = 0; b + w <= n; b += w)
            window_means.push_back(mean(std::span<const double>(v).subspan(b, w)));
        const double spread = stddev(window_means);
        const double m = mean(window_means);
        for (double x : window_means)
            CHECK(std::abs(x - m) <= 4.0 * std::max(spread, sd / std::sqrt(double(w))));
    }
}

TEST_CASE("same seed gives bit-identical streams, different seeds differ")
{
    for (const auto& p : shipped_processes(5)) {
        CAPTURE(to_string(p.kind()));
        const auto a = sample_stream(p, 10'000, 3);
        const auto b = sample_stream(p, 10'000, 3);
        const auto c = sample_stream(p, 10'000, 4);
        CHECK(a == b);
        CHECK(a != c);
    }
}

TEST_CASE("stream fill and next agree")
{
    const auto p = PotentialProcess::two_state_markov(0.2, 8);
    PotentialStream s1(p, 0), s2(p, 0);
    std::vector<double> block(257);
    s1.fill(block);
    for (double x : block)
        CHECK(x == s2.next());
}

TEST_CASE("cocycle partial sums telescope")
{
    const double scale = 1.0;
    const auto v = sample_stream(PotentialProcess::cocycle(scale, 3), 10);
    double partial = 0.0;
    for (double x : v) {
        partial += x;
        CHECK(std::abs(partial) <= 2.0 * scale);
    }
    const auto long_run = sample_stream(PotentialProcess::cocycle(scale, 3), 1'000'000);
    const double total = std::accumulate(long_run.begin(), long_run.end(), 0.0);
    CHECK(std::abs(total) <= 2.0 * scale);
}

TEST_CASE("moving average autocovariance is geometric")
{
    const double a = 0.5;
    const double var = 1.0 / (4.0 * (1.0 - a * a));
    const auto c = autocovariance(PotentialProcess::moving_average(a, 2), 6, 2'000'000);
    for (std::size_t m = 0; m <= 6; ++m)
        CHECK(c[m] == doctest::Approx(std::pow(a, double(m)) * var).epsilon(0.03));
    CHECK(exact_variance(PotentialProcess::moving_average(a, 2)).value() == doctest::Approx(var).epsilon(1e-12));
}

TEST_CASE("iid autocovariance is white")
{
    const std::size_t n = 1'000'000;
    const auto c = autocovariance(PotentialProcess::bernoulli(4), 20, n);
    CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t m = 1; m <= 20; ++m)
        CHECK(std::abs(c[m]) <= 4.0 / std::sqrt(double(n)));
    const auto profile = fit_mixing_exponent(c, 4.0 / std::sqrt(double(n)));
    CHECK(profile.white);
}

TEST_CASE("two-state chain autocovariance decays like (1-2p)^m")
{
    for (double p : {0.1, 0.3, 0.7}) {
        const auto c = autocovariance(PotentialProcess::two_state_markov(p, 6), 8, 2'000'000);
        for (std::size_t m = 0; m <= 8; ++m)
            CHECK(std::abs(c[m] - std::pow(1.0 - 2.0 * p, double(m))) <= 0.01);
    }
}

TEST_CASE("stationary distribution of a three-state chain")
{
    MarkovParams chain{{{0.5, 0.5, 0.0}, {0.25, 0.5, 0.25}, {0.0, 0.5, 0.5}}, {-1.0, 0.0, 2.0}};
    const auto pi = stationary_distribution(chain);
    CHECK(pi[0] == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(pi[1] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(pi[2] == doctest::Approx(0.25).epsilon(1e-10));

    MarkovParams periodic{{{0.0, 1.0}, {1.0, 0.0}}, {-1.0, 1.0}};
    const auto pp = stationary_distribution(periodic);
    CHECK(pp[0] == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("fit_mixing_exponent on synthetic sequences")
{
    std::vector<double> geometric(41), power(41);
    for (std::size_t m = 0; m <= 40; ++m) {
        geometric[m] = std::pow(2.0, -double(m));
        power[m] = m == 0 ? 1.0 : std::pow(double(m), -3.0);
    }
    const auto e = fit_mixing_exponent(geometric);
    CHECK(e.kind == DecayKind::Exponential);
    CHECK(e.exponent == doctest::Approx(std::log(2.0)).epsilon(0.01));

    const auto q = fit_mixing_exponent(power);
    CHECK(q.kind == DecayKind::PowerLaw);
    CHECK(q.exponent == doctest::Approx(3.0).epsilon(0.01));

    const std::vector<double> few{1.0, 0.5, 0.25, 0.125, 0.0};
    CHECK_THROWS_AS(fit_mixing_exponent(few), std::invalid_argument);
}

TEST_CASE("two-state chain fit is exponential with rate -log(1-2p)")
{
    const std::size_t n = 4'000'000;
    const auto c = autocovariance(PotentialProcess::two_state_markov(0.1, 1), 30, n);
    const auto profile = fit_mixing_exponent(std::span<const double>(c).first(15), 5.0 / std::sqrt(double(n)));
    CHECK(profile.kind == DecayKind::Exponential);
    CHECK(profile.exponent == doctest::Approx(-std::log(0.8)).epsilon(0.05));
}

TEST_CASE("intermittent map correlations decay as a power law")
{
    // Sanity band around 1/z - 1; the empirical fit range is short.
    const double z = 0.5;
    auto p = PotentialProcess::intermittent(z, 2);
    const std::size_t n = 4'000'000;
    const auto c = autocovariance(p, 200, n);
    std::vector<double> positive{c[0]};
    for (std::size_t m = 1; m < c.size() && c[m] > 4.0 * c[0] / std::sqrt(double(n)); ++m)
        positive.push_back(c[m]);
    REQUIRE(positive.size() > 11);
    const auto profile = fit_mixing_exponent(positive);
    CHECK(profile.kind == DecayKind::PowerLaw);
    CHECK(profile.exponent > 0.4 * (1.0 / z - 1.0));
    CHECK(profile.exponent < 2.5 * (1.0 / z - 1.0));
}

TEST_CASE("invalid processes raise ConfigError")
{
    PotentialProcess bad_rows{MarkovParams{{{0.5, 0.4}, {0.5, 0.5}}, {1.0, -1.0}}, 1, std::nullopt};
    CHECK_THROWS_AS(bad_rows.validate(), ConfigError);
    PotentialProcess reducible{MarkovParams{{{1.0, 0.0}, {0.0, 1.0}}, {1.0, -1.0}}, 1, std::nullopt};
    CHECK_THROWS_AS(reducible.validate(), ConfigError);
    CHECK_THROWS_AS(PotentialProcess::moving_average(1.5, 1).validate(), ConfigError);
    CHECK_THROWS_AS(PotentialProcess::cocycle(0.0, 1).validate(), ConfigError);
    PotentialProcess weights{IidParams{{-1.0, 1.0}, {0.3, 0.3}}, 1, std::nullopt};
    CHECK_THROWS_AS(weights.validate(), ConfigError);
}

TEST_CASE("burn-in defaults")
{
    CHECK(PotentialProcess::bernoulli(1).effective_burn_in() == 0);
    CHECK(PotentialProcess::two_state_markov(0.3, 1).effective_burn_in() == 10'000);
    CHECK(PotentialProcess::intermittent(0.25, 1).effective_burn_in() == 10'000);
    CHECK(sup_norm(PotentialProcess::bernoulli(1)) == 1.0);
}
