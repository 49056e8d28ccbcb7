#include <doctest.h>

#include "locmix/dynamics.hpp"
#include "locmix/potential.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

using namespace locmix;

namespace {

constexpr double kPi = std::numbers::pi;

double orthogonality_error(const Spectrum& s, std::size_t n)
{
    // max |V^T V - 1| over a spread of column pairs.
    double worst = 0.0;
    for (std::size_t i = 0; i < n; i += 97)
        for (std::size_t j = i; j < n; j += 89) {
            double dot = 0.0;
            for (std::size_t r = 0; r < n; ++r)
                dot += s.vectors[i * n + r] * s.vectors[j * n + r];
            worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
        }
    return worst;
}

std::vector<double> geometric_times(double lo, double hi, int count)
{
    std::vector<double> t;
    for (int i = 0; i < count; ++i)
        t.push_back(lo * std::pow(hi / lo, double(i) / double(count - 1)));
    return t;
}

// int_0^{cut T} dt/T e^{-t/T} <0|e^{iHt} X^2 e^{-iHt}|0> from a dense eigensolver,
// integrating each oscillating term in closed form.
double laplace_moment(const std::vector<double>& diagonal, double t_big, double cut)
{
    const auto n = static_cast<Eigen::Index>(diagonal.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        h(i, i) = diagonal[i];
        if (i + 1 < n)
            h(i, i + 1) = h(i + 1, i) = 1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Eigen::Index origin = n / 2;
    const Eigen::VectorXd c = es.eigenvectors().row(origin).transpose();
    Eigen::VectorXd x2(n);
    for (Eigen::Index i = 0; i < n; ++i)
        x2(i) = double(i - origin) * double(i - origin);
    const Eigen::MatrixXd x = es.eigenvectors().transpose() * x2.asDiagonal() * es.eigenvectors();
    double total = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) {
            const double w = (es.eigenvalues()(j) - es.eigenvalues()(k)) * t_big;
            const std::complex<double> z(1.0, -w);
            const double kernel = std::isinf(cut) ? std::real(1.0 / z) : std::real((1.0 - std::exp(-cut * z)) / z);
            total += c(j) * c(k) * x(j, k) * kernel;
        }
    return total;
}

}  // namespace

TEST_CASE("moments agree with the exact time transform")
{
    const std::size_t L = 201;
    const auto p = PotentialProcess::bernoulli(6);
    const std::vector<double> times{0.7, 5.0, 20.0};
    const auto m = moment_series(p, 1.0, L, 2.0, times, 1);
    const auto op = build_operator(p, 1.0, L, 0);
    // 200 Gauss-Legendre nodes on [0, 8T]: exact to roundoff at short times, ~1e-6 by T = 20.
    for (std::size_t i = 0; i < times.size(); ++i)
        CHECK(m.values[i] == doctest::Approx(laplace_moment(op.diagonal, times[i], 8.0)).epsilon(i < 2 ? 1e-12 : 1e-5));
}

TEST_CASE("free operator spectrum")
{
    const std::size_t L = 201;
    const auto op = build_operator(PotentialProcess::bernoulli(1), 0.0, L);
    CHECK(op.origin == 100);
    CHECK(std::all_of(op.off_diagonal.begin(), op.off_diagonal.end(), [](double x) { return x == 1.0; }));
    const auto s = diagonalize(op);
    CHECK(s.values.back() == doctest::Approx(2.0 * std::cos(kPi / double(L + 1))).epsilon(1e-13));
    CHECK(s.values.front() == doctest::Approx(-2.0 * std::cos(kPi / double(L + 1))).epsilon(1e-13));
    for (std::size_t j = 1; j <= L; j += 37)
        CHECK(s.values[L - j] == doctest::Approx(2.0 * std::cos(kPi * double(j) / double(L + 1))).scale(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(build_operator(PotentialProcess::bernoulli(1), 0.0, 200), std::invalid_argument);
    CHECK_THROWS_AS(build_operator(PotentialProcess::bernoulli(1), 0.0, 1), std::invalid_argument);
}

TEST_CASE("constant shift moves the spectrum")
{
    auto op = build_operator(PotentialProcess::bernoulli(1), 0.0, 101);
    const auto base = diagonalize(op);
    for (double& d : op.diagonal)
        d += 0.37;
    const auto shifted = diagonalize(op);
    for (std::size_t i = 0; i < base.values.size(); ++i)
        CHECK(shifted.values[i] == doctest::Approx(base.values[i] + 0.37).epsilon(1e-12));
}

TEST_CASE("disordered spectrum obeys the norm bound")
{
    const auto op = build_operator(PotentialProcess::bernoulli(2), 1.0, 501);
    for (double d : op.diagonal)
        CHECK(std::abs(d) == 1.0);
    const auto s = diagonalize(op);
    CHECK(s.values.front() >= -3.0);
    CHECK(s.values.back() <= 3.0);
}

TEST_CASE("eigenvectors are orthonormal at the acceptance box size")
{
    const std::size_t L = 2001;
    const auto s = diagonalize(build_operator(PotentialProcess::bernoulli(1), 1.0, L));
    CHECK(orthogonality_error(s, L) <= 1e-11);
    const auto f = diagonalize(build_operator(PotentialProcess::bernoulli(1), 0.0, L));
    CHECK(orthogonality_error(f, L) <= 1e-11);
}

TEST_CASE("short times keep the packet at the origin")
{
    const std::vector<double> times{1e-3, 1e-2};
    const auto m = moment_series(PotentialProcess::bernoulli(1), 1.0, 101, 2.0, times, 2);
    CHECK(m.values[0] <= 1e-5);
    CHECK(m.values[0] < m.values[1]);
}

TEST_CASE("free motion is ballistic")
{
    // Free evolution from |0>: <X^2>(t) = 2 t^2; over [0, 8T] the weight e^{-t/T}/T
    // gives 2 T^2 int_0^8 s^2 e^{-s} ds = (4 - 164 e^{-8}) T^2.
    const auto times = geometric_times(0.5, 60.0, 8);
    const auto m = moment_series(PotentialProcess::bernoulli(1), 0.0, 2001, 2.0, times, 1);
    CHECK(loglog_slope(m.times, m.values) == doctest::Approx(2.0).epsilon(0.05));
    const double factor = 4.0 - 164.0 * std::exp(-8.0);
    for (std::size_t i = 0; i < times.size(); ++i)
        CHECK(m.values[i] == doctest::Approx(factor * times[i] * times[i]).epsilon(1e-6));
    CHECK(m.max_norm_error <= 1e-10);
    CHECK(m.max_energy_drift <= 1e-10);
    CHECK(m.replicas == 1);
    const auto report = log_growth_check(m, 2.5);
    CHECK_FALSE(report.pass);
}

TEST_CASE("strong disorder localizes")
{
    const auto times = geometric_times(10.0, 1000.0, 5);
    const auto m = moment_series(PotentialProcess::bernoulli(1), 1.0, 801, 2.0, times, 4);
    const double peak = *std::max_element(m.values.begin(), m.values.end());
    CHECK(peak <= 4.0 * m.values.front());
    CHECK(m.max_norm_error <= 1e-10);
    CHECK(m.max_energy_drift <= 1e-10);
    for (double v : m.values) {
        CHECK(v >= 0.0);
        CHECK(v <= std::pow(400.0, 2.0));
    }
    for (std::size_t i = 0; i < times.size(); ++i)
        CHECK(std::abs(m.mean_position[i]) <= 4.0 * std::sqrt(m.values[i] / double(m.replicas)) + 1e-9);
    CHECK(log_growth_check(m, 2.5).pass);
}

TEST_CASE("box size does not matter once the packet is localized")
{
    // Same potential around the origin, box doubled.
    const auto op = build_operator(PotentialProcess::bernoulli(3), 1.0, 801, 0);
    const std::vector<double> inner(op.diagonal.begin() + 200, op.diagonal.begin() + 601);
    const double t = 500.0;
    const double small = laplace_moment(inner, t, 8.0);
    const double large = laplace_moment(op.diagonal, t, 8.0);
    CHECK(small == doctest::Approx(large).epsilon(0.01));
}

TEST_CASE("a box that is too small is reported")
{
    const std::vector<double> times{100.0};
    try {
        moment_series(PotentialProcess::bernoulli(1), 0.0, 101, 2.0, times, 1);
        CHECK(false);
    } catch (const BoxTooSmallError& e) {
        CHECK(e.suggested_size > 101);
    }
}

TEST_CASE("log growth check on synthetic series")
{
    MomentSeries flat;
    flat.q = 2.0;
    flat.times = geometric_times(10.0, 1000.0, 6);
    flat.values.assign(6, 5.0);
    const auto r = log_growth_check(flat, 2.5);
    CHECK(r.pass);
    CHECK(r.c_fit == doctest::Approx(5.0 - std::pow(std::log(10.0), 5.0)));

    MomentSeries short_range = flat;
    short_range.times = geometric_times(10.0, 50.0, 6);
    CHECK_THROWS_AS(log_growth_check(short_range, 2.5), std::invalid_argument);
    CHECK_THROWS_AS(log_growth_check(flat, 2.0), std::invalid_argument);

    const std::vector<double> x{1.0, 10.0, 100.0}, y{3.0, 300.0, 30000.0};
    CHECK(loglog_slope(x, y) == doctest::Approx(2.0).epsilon(1e-12));
}
