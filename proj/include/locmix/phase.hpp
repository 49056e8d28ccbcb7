#pragma once

// Projective phase dynamics on R / pi Z, the anomaly expansion data, and
// Birkhoff / Birkhoff-like sums along orbits.

#include "locmix/potential.hpp"
#include "locmix/spectral.hpp"
#include "locmix/transfer.hpp"

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace locmix {

using Complex = std::complex<double>;

/// Angle of +-T e_theta, reduced to [0, pi).
double projective_action(const Mat2& t, double theta);

double reduce_angle(double theta);

/// A family T = sign R_k exp(lambda^eta P1 + lambda^{2 eta} P2 + O(lambda^{3 eta})).
/// Each step consumes `values_per_step` potential values; P1, P2 and the
/// exact step matrix are functions of that window.
struct AnomalySetup {
    std::string name;
    double eta = 1.0;
    double sign = 1.0;
    double k = 0.0;
    std::size_t values_per_step = 1;
    std::function<Mat2(std::span<const double>)> p1;
    std::function<Mat2(std::span<const double>)> p2;
    std::function<Mat2(std::span<const double>, double lambda)> exact_step;
    /// Energy of the original Jacobi operator at which this family lives.
    std::function<double(double lambda)> energy;
};

/// Rotation frame at E = 2 cos k: P1 = V/sin(k) [[0,0],[1,0]], P2 = 0 (exact).
AnomalySetup bulk_setup(double k);

/// Squared transfer matrix at E = eps lambda^2; the potential is consumed in
/// pairs (v, u) = (V(omega), V(S omega)).
AnomalySetup band_center_setup(double epsilon);

/// Conjugated transfer matrix at E = -2 + eps lambda^{4/3}, eta = 1/3.
AnomalySetup band_edge_setup(double epsilon);

struct FourierCoefficients {
    Complex alpha;
    Complex beta;
    Complex gamma;
};

/// alpha = <v|P|v>, beta = <conj v|P|v>, gamma = <conj v|P^T P|v>, v = (1,-i)/sqrt 2.
/// P must be traceless (std::invalid_argument otherwise).
FourierCoefficients fourier_coefficients(const Mat2& p);

/// Im(<v|P|e_theta> / <v|e_theta>).
double phase_polynomial(const Mat2& p, double theta);
/// Im(alpha - beta e^{2 i theta}).
double phase_polynomial(const FourierCoefficients& c, double theta);
/// d/dtheta of the above.
double phase_polynomial_derivative(const FourierCoefficients& c, double theta);

struct ExpansionCheck {
    double exact = 0.0;      ///< log ||T e_theta||
    double expansion = 0.0;  ///< second-order expansion in lambda^eta
    double residual = 0.0;   ///< |exact - expansion|
    /// Same for the angle: S_T(theta) against
    /// theta + k + sum_j lambda^{j eta} p_j + (1/2) lambda^{2 eta} p_1 p_1', mod pi.
    double angle_residual = 0.0;
};

ExpansionCheck log_norm_expansion_check(const AnomalySetup& setup, std::span<const double> window,
                                        double theta, double lambda);

struct PhaseOrbit {
    std::vector<double> theta;      ///< theta_0 .. theta_n
    std::vector<double> potential;  ///< n * values_per_step values plus look-ahead
    std::size_t values_per_step = 1;
    double log_norm_sum = 0.0;      ///< sum_j log ||T_j e_{theta_j}||

    std::size_t steps() const { return theta.empty() ? 0 : theta.size() - 1; }
};

/// theta_{j+1} = S_{T_j}(theta_j) with T_j the setup's exact step matrices.
PhaseOrbit phase_orbit(const AnomalySetup& setup, const PotentialProcess& process, double lambda,
                       double theta0, std::size_t n, std::uint64_t stream_id = 0);

/// Same with the bare transfer matrices T^E_{lambda, V_j}.
PhaseOrbit phase_orbit(const PotentialProcess& process, double energy, double lambda, double theta0,
                       std::size_t n, std::uint64_t stream_id = 0);

/// Bin masses of theta_j over [0, pi) for an orbit that is not stored.
/// The first `discard` steps are dropped.
std::vector<double> phase_histogram(const AnomalySetup& setup, const PotentialProcess& process,
                                    double lambda, std::size_t n, std::size_t bins,
                                    std::uint64_t stream_id = 0, std::size_t discard = 0);
std::vector<double> phase_histogram(std::span<const double> thetas, std::size_t bins);

/// (1/2) sum_i |mass_i - density(mid_i) * width|.
double total_variation(std::span<const double> masses, const std::function<double(double)>& density);

using PhaseFunction = std::function<Complex(double)>;

/// (1/N) sum_{n<N} f(theta_n).
Complex birkhoff_sum(const PhaseFunction& f, const PhaseOrbit& orbit);

/// (1/N) sum_{n<N} g(S^n omega) f(theta_n); g reads the window starting at the
/// n-th step's first potential value. Throws std::invalid_argument when the
/// stored potential does not cover every window.
Complex birkhoff_like_sum(const WindowFunction& g, const PhaseFunction& f, const PhaseOrbit& orbit);

struct DriftDiffusionEstimate {
    std::vector<double> theta;
    std::vector<double> p_hat, p_err;
    std::vector<double> q_hat, q_err;
    std::size_t block = 0;
    std::size_t samples = 0;
    /// Only for the dynamic estimator: lambda^{2 eta} N_block <= 0.1.
    bool valid = true;
};

/// (1/N) E (p^N)^2 and (1/N) E q^N with p^N = sum_n p_{1,n}(theta) and
/// q^N = sum_n (p_{1,n} + 2 sum_{j<n} p_{1,j}) p'_{1,n} + 2 sum_n p_{2,n},
/// averaged over independent windows of N_block steps.
DriftDiffusionEstimate drift_diffusion_estimate(const AnomalySetup& setup, const PotentialProcess& process,
                                                std::size_t block, std::size_t samples,
                                                std::span<const double> thetas, std::uint64_t stream_base = 0);

/// Kramers-Moyal estimate from the exact dynamics: lifted increments D over
/// N_block steps started at each theta give p = Var(D)/(lambda^{2eta} N) and
/// q = 2 E(D - kN)/(lambda^{2eta} N).
DriftDiffusionEstimate drift_diffusion_dynamic(const AnomalySetup& setup, const PotentialProcess& process,
                                               double lambda, std::size_t block, std::size_t samples,
                                               std::span<const double> thetas, std::uint64_t stream_base = 0);

}  // namespace locmix
