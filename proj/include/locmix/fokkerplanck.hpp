#pragma once

// Drift-diffusion coefficients p, q of the effective phase dynamics, the
// stationary density rho in ker L*, and the perturbative Lyapunov predictors.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace locmix {

enum class AnomalyKind { BandCenter, BandEdge };

std::string to_string(AnomalyKind kind);

struct FPSetting {
    AnomalyKind kind = AnomalyKind::BandEdge;
    double epsilon = 0.0;
    double d0 = 1.0;    ///< D_V(0)
    double dpi = 0.0;   ///< D_V(pi), band center only

    static FPSetting band_center(double epsilon, double d0, double dpi) { return {AnomalyKind::BandCenter, epsilon, d0, dpi}; }
    static FPSetting band_edge(double epsilon, double d0) { return {AnomalyKind::BandEdge, epsilon, d0, 0.0}; }
};

inline constexpr std::size_t kDefaultGrid = 512;

/// theta_i = i pi / n, i = 0..n-1.
std::vector<double> theta_grid(std::size_t n = kDefaultGrid);

double coefficient_p(const FPSetting& setting, double theta);
double coefficient_q(const FPSetting& setting, double theta);

struct FPCoefficients {
    FPSetting setting;
    std::vector<double> theta;
    std::vector<double> p;
    std::vector<double> q;
};

/// Band center: p = D0/2 + Dpi/2 cos^2 2theta, q = -Dpi/2 sin 4theta - eps.
/// Band edge: p = D0 cos^4 theta, q = -eps - 1 + (1-eps) cos 2theta - 2 D0 cos^3 theta sin theta.
/// Negative D values or all-zero diffusion raise ConfigError.
FPCoefficients assemble_coefficients(const FPSetting& setting, std::size_t grid = kDefaultGrid);

struct StationaryDensity {
    FPSetting setting;
    std::vector<double> theta;
    std::vector<double> rho;
    double normalization_constant = 0.0;
    /// Constant value of (p rho)' - q rho.
    double flux = 0.0;
    std::string method;

    /// Periodic linear interpolation on the grid.
    double at(double theta) const;
};

/// Periodic trapezoid rule over [0, pi) on a uniform grid.
double periodic_integral(std::span<const double> values);

/// rho = C1 (e^w / p)(C2 W + 1) with w = int_0^theta q/p, W = int_0^theta e^{-w};
/// C2 from periodicity, C1 from normalization. Requires min p > 0
/// (NumericalError otherwise).
StationaryDensity density_elliptic(const FPCoefficients& coeffs);

/// rho(theta) = C int_0^inf dsigma exp(-(2/(3 D0))(3 sigma sin^2 theta
///   - 3 sigma^2 sin theta cos^3 theta + sigma^3 cos^6 theta + 3 eps sigma cos^2 theta)).
/// D0 <= 0 raises ConfigError.
StationaryDensity density_band_edge(double d0, double epsilon, std::size_t grid = kDefaultGrid);

/// Kernel of a fourth-order staggered-flux discretization of
/// d/dtheta((p rho)' - q rho) on the periodic grid. Needs grid >= 256;
/// a numerically two-dimensional kernel raises NumericalError.
StationaryDensity density_bvp_oracle(const FPCoefficients& coeffs);

/// (max - min) of (p rho)' - q rho over the grid, relative to the sup of its two terms.
double first_integral_residual(const StationaryDensity& density);

/// max |d/dtheta((p rho)' - q rho)| with spectral derivatives.
double fp_residual(const StationaryDensity& density);

/// Spectral derivative of a pi-periodic grid function.
std::vector<double> periodic_derivative(std::span<const double> values);

/// lambda^2 D / (8 sin^2 k); std::domain_error when sin k vanishes.
double gamma_thouless(double lambda, double k, double d);

/// lambda^2 Dpi/8 int rho (1 + cos 4theta).
double gamma_band_center(double lambda, double epsilon, double dpi, const StationaryDensity& rho);

/// lambda^{2/3} [ (1-eps)/2 int rho sin 2theta + D0/8 int rho (1 + 2 cos 2theta + cos 4theta) ].
double gamma_band_edge(double lambda, double epsilon, double d0, const StationaryDensity& rho);

enum class EdgeSide { Hyperbolic, Elliptic };

struct NearEdgePrediction {
    double value = 0.0;
    /// eta inside (4/5, 4/3).
    bool in_range = true;
};

/// Hyperbolic (outside the band): sqrt(eps lambda^eta).
/// Elliptic (inside): lambda^{2-eta} D0 / (8 eps).
NearEdgePrediction gamma_near_edge(double lambda, double epsilon, double eta, EdgeSide side, double d0);

}  // namespace locmix
