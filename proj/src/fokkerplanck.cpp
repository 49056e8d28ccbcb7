#include "locmix/fokkerplanck.hpp"

#include "locmix/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace locmix {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kClip = -1e-12;

using CellRule = boost::math::quadrature::gauss<double, 10>;

void validate(const FPSetting& s)
{
    if (!(s.d0 >= 0.0) || !(s.dpi >= 0.0))
        throw ConfigError("Fokker-Planck setting: D values must be non-negative");
    if (s.kind == AnomalyKind::BandCenter && s.d0 == 0.0 && s.dpi == 0.0)
        throw ConfigError("Fokker-Planck setting: degenerate diffusion (all D values zero)");
    if (s.kind == AnomalyKind::BandEdge && s.d0 == 0.0)
        throw ConfigError("Fokker-Planck setting: degenerate diffusion (D0 = 0)");
    if (!std::isfinite(s.epsilon))
        throw ConfigError("Fokker-Planck setting: epsilon must be finite");
}

/// Clips roundoff negatives, rejects real ones, and normalizes.
double normalize(std::vector<double>& rho)
{
    for (double& r : rho) {
        if (r < 0.0) {
            if (r < kClip)
                throw NumericalError("stationary density: negative value " + std::to_string(r));
            r = 0.0;
        }
    }
    const double mass = periodic_integral(rho);
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw NumericalError("stationary density: zero or non-finite mass");
    for (double& r : rho)
        r /= mass;
    return 1.0 / mass;
}

std::vector<double> first_integral_values(const StationaryDensity& d)
{
    const std::size_t n = d.theta.size();
    std::vector<double> pr(n), qr(n);
    for (std::size_t i = 0; i < n; ++i) {
        pr[i] = coefficient_p(d.setting, d.theta[i]) * d.rho[i];
        qr[i] = coefficient_q(d.setting, d.theta[i]) * d.rho[i];
    }
    auto j = periodic_derivative(pr);
    for (std::size_t i = 0; i < n; ++i)
        j[i] -= qr[i];
    return j;
}

double mean(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

std::string to_string(AnomalyKind kind)
{
    return kind == AnomalyKind::BandCenter ? "band_center" : "band_edge";
}

std::vector<double> theta_grid(std::size_t n)
{
    if (n == 0)
        throw std::invalid_argument("theta_grid: empty grid");
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = kPi * static_cast<double>(i) / static_cast<double>(n);
    return t;
}

double coefficient_p(const FPSetting& s, double theta)
{
    if (s.kind == AnomalyKind::BandCenter) {
        const double c = std::cos(2.0 * theta);
        return 0.5 * s.d0 + 0.5 * s.dpi * c * c;
    }
    const double c = std::cos(theta);
    return s.d0 * c * c * c * c;
}

double coefficient_q(const FPSetting& s, double theta)
{
    if (s.kind == AnomalyKind::BandCenter)
        return -0.5 * s.dpi * std::sin(4.0 * theta) - s.epsilon;
    const double c = std::cos(theta);
    return -s.epsilon - 1.0 + (1.0 - s.epsilon) * std::cos(2.0 * theta) - 2.0 * s.d0 * c * c * c * std::sin(theta);
}

FPCoefficients assemble_coefficients(const FPSetting& setting, std::size_t grid)
{
    validate(setting);
    FPCoefficients c;
    c.setting = setting;
    c.theta = theta_grid(grid);
    for (double t : c.theta) {
        c.p.push_back(coefficient_p(setting, t));
        c.q.push_back(coefficient_q(setting, t));
    }
    return c;
}

double StationaryDensity::at(double t) const
{
    const std::size_t n = theta.size();
    double x = std::fmod(t, kPi);
    if (x < 0.0)
        x += kPi;
    const double pos = x / kPi * static_cast<double>(n);
    const auto i = std::min(static_cast<std::size_t>(pos), n - 1);
    const double f = pos - static_cast<double>(i);
    return (1.0 - f) * rho[i] + f * rho[(i + 1) % n];
}

double periodic_integral(std::span<const double> values)
{
    if (values.empty())
        throw std::invalid_argument("periodic_integral: empty grid");
    double s = 0.0;
    for (double v : values)
        s += v;
    return s * kPi / static_cast<double>(values.size());
}

std::vector<double> periodic_derivative(std::span<const double> values)
{
    const std::size_t n = values.size();
    if (n < 4)
        throw std::invalid_argument("periodic_derivative: grid too small");
    std::vector<double> cs(n), sn(n);
    for (std::size_t i = 0; i < n; ++i) {
        cs[i] = std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
        sn[i] = std::sin(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
    }
    // values_j = sum_m c_m e^{2 i m theta_j}, theta_j = j pi / n.
    const std::size_t half = n / 2;
    std::vector<double> out(n, 0.0);
    for (std::size_t m = 1; m < half + (n % 2); ++m) {
        double re = 0.0, im = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t idx = (m * j) % n;
            re += values[j] * cs[idx];
            im -= values[j] * sn[idx];
        }
        re *= 2.0 / static_cast<double>(n);
        im *= 2.0 / static_cast<double>(n);
        // d/dtheta Re((re + i im) e^{2 i m theta}) = -2m (re sin + im cos)
        const double w = 2.0 * static_cast<double>(m);
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t idx = (m * j) % n;
            out[j] -= w * (re * sn[idx] + im * cs[idx]);
        }
    }
    return out;
}

StationaryDensity density_elliptic(const FPCoefficients& coeffs)
{
    const FPSetting& s = coeffs.setting;
    validate(s);
    const std::size_t n = coeffs.theta.size();
    if (n < 4)
        throw std::invalid_argument("density_elliptic: grid too small");
    double min_p = *std::min_element(coeffs.p.begin(), coeffs.p.end());
    for (double x = 0.0; x < kPi; x += kPi / 4096.0)
        min_p = std::min(min_p, coefficient_p(s, x));
    if (!(min_p > 0.0))
        throw NumericalError("density_elliptic: p vanishes somewhere; use density_band_edge");

    auto ratio = [&s](double x) { return coefficient_q(s, x) / coefficient_p(s, x); };
    std::vector<double> edges(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        edges[i] = kPi * static_cast<double>(i) / static_cast<double>(n);

    std::vector<double> w(n + 1, 0.0), wt(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = edges[i], b = edges[i + 1];
        w[i + 1] = w[i] + CellRule::integrate(ratio, a, b);
        const double wa = w[i];
        auto integrand = [&](double x) { return std::exp(-(wa + CellRule::integrate(ratio, a, x))); };
        wt[i + 1] = wt[i] + CellRule::integrate(integrand, a, b);
    }
    const double c2 = (std::exp(-w[n]) - 1.0) / wt[n];

    StationaryDensity d;
    d.setting = s;
    d.theta = coeffs.theta;
    d.method = "elliptic";
    d.rho.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        d.rho[i] = std::exp(w[i]) / coefficient_p(s, edges[i]) * (c2 * wt[i] + 1.0);
    d.normalization_constant = normalize(d.rho);
    d.flux = d.normalization_constant * c2;
    return d;
}

StationaryDensity density_band_edge(double d0, double epsilon, std::size_t grid)
{
    if (!(d0 > 0.0))
        throw ConfigError("density_band_edge: D0 must be positive");
    const FPSetting s = FPSetting::band_edge(epsilon, d0);
    validate(s);

    StationaryDensity d;
    d.setting = s;
    d.theta = theta_grid(grid);
    d.method = "band_edge_formula";
    d.rho.resize(grid);
    const double scale = 2.0 / (3.0 * d0);
    for (std::size_t i = 0; i < grid; ++i) {
        const double sn = std::sin(d.theta[i]), cs = std::cos(d.theta[i]);
        const double a = 3.0 * sn * sn + 3.0 * epsilon * cs * cs;
        const double b = -3.0 * sn * cs * cs * cs;
        const double c = std::pow(cs, 6);
        auto exponent = [&](double sigma) { return -scale * sigma * (a + sigma * (b + sigma * c)); };
        double upper = 1.0;
        while (exponent(upper) > -40.0 || exponent(2.0 * upper) > -40.0) {
            upper *= 2.0;
            if (upper > 1e12)
                throw NumericalError("density_band_edge: inner integral does not decay");
        }
        d.rho[i] = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [&](double sigma) { return std::exp(exponent(sigma)); }, 0.0, upper, 20, 1e-14);
    }
    d.normalization_constant = normalize(d.rho);
    d.flux = mean(first_integral_values(d));
    return d;
}

StationaryDensity density_bvp_oracle(const FPCoefficients& coeffs)
{
    validate(coeffs.setting);
    const std::size_t n = coeffs.theta.size();
    if (n < 256)
        throw std::invalid_argument("density_bvp_oracle: need a grid of at least 256 points");
    const double h = kPi / static_cast<double>(n);
    const auto ni = static_cast<Eigen::Index>(n);

    // Flux J_{i+1/2} = (p rho)' - q rho at half points, both fourth order.
    Eigen::MatrixXd flux = Eigen::MatrixXd::Zero(ni, ni);
    const double dw[4] = {1.0 / (24.0 * h), -27.0 / (24.0 * h), 27.0 / (24.0 * h), -1.0 / (24.0 * h)};
    const double iw[4] = {-1.0 / 16.0, 9.0 / 16.0, 9.0 / 16.0, -1.0 / 16.0};
    for (std::size_t i = 0; i < n; ++i) {
        for (int o = 0; o < 4; ++o) {
            const std::size_t j = (i + n + static_cast<std::size_t>(o) - 1) % n;
            flux(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
                dw[o] * coeffs.p[j] - iw[o] * coeffs.q[j];
        }
    }
    Eigen::MatrixXd op(ni, ni);
    for (Eigen::Index i = 0; i < ni; ++i)
        op.row(i) = flux.row(i) - flux.row((i + ni - 1) % ni);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(op, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double top = sv(0);
    const double second_smallest = sv(ni - 2) / top;
    if (second_smallest < 1e-9)
        throw NumericalError("density_bvp_oracle: kernel is numerically multidimensional (sigma_{n-1}/sigma_1 = "
                             + std::to_string(second_smallest) + ")");
    Eigen::VectorXd kernel = svd.matrixV().col(ni - 1);
    if (kernel.sum() < 0.0)
        kernel = -kernel;

    StationaryDensity d;
    d.setting = coeffs.setting;
    d.theta = coeffs.theta;
    d.method = "bvp_oracle";
    d.rho.assign(kernel.data(), kernel.data() + ni);
    const double peak = *std::max_element(d.rho.begin(), d.rho.end());
    for (double& r : d.rho)
        r /= peak;
    d.normalization_constant = normalize(d.rho) / peak;
    d.flux = mean(first_integral_values(d));
    return d;
}

double first_integral_residual(const StationaryDensity& d)
{
    const auto j = first_integral_values(d);
    const auto [lo, hi] = std::minmax_element(j.begin(), j.end());
    double scale = 0.0;
    for (std::size_t i = 0; i < d.theta.size(); ++i)
        scale = std::max(scale, std::abs(coefficient_q(d.setting, d.theta[i]) * d.rho[i]));
    return (*hi - *lo) / std::max(scale, 1e-300);
}

double fp_residual(const StationaryDensity& d)
{
    const auto j = first_integral_values(d);
    const auto dj = periodic_derivative(j);
    double r = 0.0;
    for (double x : dj)
        r = std::max(r, std::abs(x));
    return r;
}

double gamma_thouless(double lambda, double k, double d)
{
    const double s = std::sin(k);
    if (std::abs(s) < 1e-12)
        throw std::domain_error("gamma_thouless: singular at k in {0, pi}");
    return lambda * lambda * d / (8.0 * s * s);
}

double gamma_band_center(double lambda, double epsilon, double dpi, const StationaryDensity& rho)
{
    if (rho.setting.kind != AnomalyKind::BandCenter || std::abs(rho.setting.epsilon - epsilon) > 1e-12
        || std::abs(rho.setting.dpi - dpi) > 1e-12)
        throw std::invalid_argument("gamma_band_center: density computed for a different setting");
    std::vector<double> f(rho.theta.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = rho.rho[i] * (1.0 + std::cos(4.0 * rho.theta[i]));
    return lambda * lambda * dpi / 8.0 * periodic_integral(f);
}

double gamma_band_edge(double lambda, double epsilon, double d0, const StationaryDensity& rho)
{
    if (rho.setting.kind != AnomalyKind::BandEdge || std::abs(rho.setting.epsilon - epsilon) > 1e-12
        || std::abs(rho.setting.d0 - d0) > 1e-12)
        throw std::invalid_argument("gamma_band_edge: density computed for a different setting");
    std::vector<double> f(rho.theta.size()), g(rho.theta.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double t = rho.theta[i];
        f[i] = rho.rho[i] * std::sin(2.0 * t);
        g[i] = rho.rho[i] * (1.0 + 2.0 * std::cos(2.0 * t) + std::cos(4.0 * t));
    }
    return std::cbrt(lambda * lambda) * (0.5 * (1.0 - epsilon) * periodic_integral(f) + d0 / 8.0 * periodic_integral(g));
}

NearEdgePrediction gamma_near_edge(double lambda, double epsilon, double eta, EdgeSide side, double d0)
{
    if (!(epsilon > 0.0))
        throw std::invalid_argument("gamma_near_edge: epsilon must be positive");
    NearEdgePrediction out;
    out.in_range = eta > 0.8 && eta < 4.0 / 3.0;
    if (side == EdgeSide::Hyperbolic)
        out.value = std::sqrt(epsilon * std::pow(lambda, eta));
    else
        out.value = std::pow(lambda, 2.0 - eta) * d0 / (8.0 * epsilon);
    return out;
}

}  // namespace locmix
