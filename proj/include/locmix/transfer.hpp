#pragma once

// Transfer matrices, conjugation frames and the Monte Carlo Lyapunov estimator.

#include "locmix/potential.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace locmix {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    double norm() const { return std::hypot(x, y); }
};

/// Real 2x2 matrix [[a, b], [c, d]]. Transfer matrices and their
/// conjugates live in SL(2,R); the scaling frame N_lambda does not.
struct Mat2 {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    static constexpr Mat2 identity() { return {}; }
    static constexpr Mat2 diagonal(double x, double y) { return {x, 0.0, 0.0, y}; }

    double det() const { return a * d - b * c; }
    double trace() const { return a + d; }
    double frobenius() const { return std::sqrt(a * a + b * b + c * c + d * d); }
    /// Largest singular value.
    double norm() const;
    Mat2 inverse() const;
    Mat2 transpose() const { return {a, c, b, d}; }

    /// Rescales to unit determinant (requires det > 0).
    Mat2 unimodular() const;

    Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
    friend Mat2 operator*(const Mat2& l, const Mat2& r)
    {
        return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d, l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
    }
    friend Mat2 operator+(const Mat2& l, const Mat2& r) { return {l.a + r.a, l.b + r.b, l.c + r.c, l.d + r.d}; }
    friend Mat2 operator-(const Mat2& l, const Mat2& r) { return {l.a - r.a, l.b - r.b, l.c - r.c, l.d - r.d}; }
    friend Mat2 operator*(double s, const Mat2& m) { return {s * m.a, s * m.b, s * m.c, s * m.d}; }
};

/// Max-entry distance.
double distance(const Mat2& x, const Mat2& y);

/// F m F^{-1}.
Mat2 conjugate(const Mat2& frame, const Mat2& m);

/// Matrix exponential of a traceless matrix (closed form).
Mat2 exp_traceless(const Mat2& x);

/// [[E - lambda v, -1], [1, 0]].
constexpr Mat2 transfer_matrix(double energy, double lambda, double v)
{
    return {energy - lambda * v, -1.0, 1.0, 0.0};
}

Mat2 rotation(double k);

struct RotationFrame {
    Mat2 rotation;    ///< R_k
    Mat2 conjugator;  ///< M with M T M^{-1} = R_k at lambda = 0
};

/// Frame for E = 2 cos k inside the band. k with sin k <= 1e-12 (Krein
/// collision at the band edges) raises NumericalError.
RotationFrame rotation_frame(double k);

struct BandEdgeFrame {
    Mat2 jordan;   ///< N, brings T at E = -2 into Jordan form -[[1,1],[0,1]]
    Mat2 scaling;  ///< N_lambda = diag(lambda^{2/3}, 1)
};

/// lambda <= 0 raises std::invalid_argument.
BandEdgeFrame band_edge_frame(double lambda);

/// Closed form of N_lambda N T N^{-1} N_lambda^{-1} at E = -2 + eps lambda^{4/3}.
Mat2 band_edge_conjugated(double lambda, double epsilon, double v);

struct LyapunovOptions {
    std::size_t steps = 10'000'000;
    std::size_t replicas = 8;
    std::size_t renorm_every = 64;
    /// Evolve F T F^{-1} instead of T.
    std::optional<Mat2> frame;
    /// Replica r draws its potential from stream stream_base + r.
    std::uint64_t stream_base = 0;
};

struct LyapunovEstimate {
    double gamma = 0.0;
    double std_error = 0.0;
    std::size_t steps = 0;
    std::size_t replicas = 0;
    std::size_t renorm_every = 0;
    /// Some block overflowed and was redone with a halved renormalization period.
    bool renorm_halved = false;
    std::vector<double> per_replica;
};

/// Per replica, a unit vector at a uniform random angle is propagated by the
/// transfer matrices; log-norms are accumulated at each renormalization and
/// divided by the number of steps. Requires steps >= 10^4, renorm_every in [1, 1000].
LyapunovEstimate lyapunov_mc(const PotentialProcess& process, double energy, double lambda,
                             const LyapunovOptions& options = {});

/// log ||T(n)|| of the running product along one realization, renormalized
/// to stay in range. Returns log-norms for n = 0..steps (n = 0 is the identity).
std::vector<double> log_norm_path(const PotentialProcess& process, double energy, double lambda,
                                  std::size_t steps, std::uint64_t stream_id);

struct NormGrowthResult {
    double fraction = 0.0;   ///< empirical P(max_n ||T(n)||^2 >= e^{c sqrt N})
    double bound = 0.0;      ///< 1 - e^{-c sqrt N}
    std::size_t samples = 0;
    std::size_t horizon = 0;
    double c_hat = 0.0;
};

/// Fraction of independent realizations with max_{0<=n<=N} ||T(n)||^2 >= e^{c_hat sqrt N},
/// T(0) the identity.
NormGrowthResult norm_growth_probability(const PotentialProcess& process, double energy, double lambda,
                                         std::size_t horizon, std::size_t samples, double c_hat,
                                         std::uint64_t stream_base = 0);

}  // namespace locmix
