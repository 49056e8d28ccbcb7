#include "locmix/dynamics.hpp"

#include "locmix/parallel.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace locmix {

namespace {

struct Nodes {
    std::vector<double> x;  // on [-1, 1]
    std::vector<double> w;
};

Nodes gauss_legendre_200()
{
    using Rule = boost::math::quadrature::gauss<double, 200>;
    const auto& a = Rule::abscissa();
    const auto& w = Rule::weights();
    Nodes n;
    for (std::size_t i = 0; i < a.size(); ++i) {
        n.x.push_back(-a[i]);
        n.w.push_back(w[i]);
        n.x.push_back(a[i]);
        n.w.push_back(w[i]);
    }
    return n;
}

struct ReplicaResult {
    std::vector<double> moments;
    std::vector<double> positions;
    std::vector<double> peak;
    double norm_error = 0.0;
    double energy_drift = 0.0;
    double wall_weight = 0.0;
};

}  // namespace

JacobiOperator build_operator(const PotentialProcess& process, double lambda, std::size_t size,
                              std::uint64_t stream_id)
{
    if (size < 3)
        throw std::invalid_argument("build_operator: need L >= 3");
    if (size % 2 == 0)
        throw std::invalid_argument("build_operator: L must be odd (origin-centred box)");
    JacobiOperator op;
    op.size = size;
    op.origin = size / 2;
    op.diagonal = sample_stream(process, size, stream_id);
    for (double& v : op.diagonal)
        v *= lambda;
    op.off_diagonal.assign(size - 1, 1.0);
    return op;
}

Spectrum diagonalize(const JacobiOperator& op)
{
    const auto n = static_cast<lapack_int>(op.size);
    std::vector<double> d = op.diagonal;
    std::vector<double> e = op.off_diagonal;
    e.resize(op.size);
    Spectrum s;
    s.values.resize(op.size);
    s.vectors.resize(op.size * op.size);
    std::vector<lapack_int> support(2 * op.size);
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'A', n, d.data(), e.data(), 0.0, 0.0, 0, 0, 0.0,
                                           &found, s.values.data(), s.vectors.data(), n, support.data());
    if (info != 0 || found != n)
        throw NumericalError("diagonalize: dstevr failed with info " + std::to_string(info));
    return s;
}

MomentSeries moment_series(const PotentialProcess& process, double lambda, std::size_t size, double q,
                           std::span<const double> times, std::size_t replicas, const MomentOptions& options)
{
    if (times.empty() || replicas == 0)
        throw std::invalid_argument("moment_series: need times and at least one replica");
    if (!(q > 0.0))
        throw std::invalid_argument("moment_series: q must be positive");
    if (options.quadrature_nodes != 200)
        throw std::invalid_argument("moment_series: only the 200-point rule is available");
    for (double t : times)
        if (!(t > 0.0))
            throw std::invalid_argument("moment_series: times must be positive");
    process.validate();

    const Nodes gl = gauss_legendre_200();
    const std::size_t per_t = gl.x.size();
    const std::size_t nt = times.size();
    const std::size_t nodes = per_t * nt;
    std::vector<double> t_nodes(nodes), w_nodes(nodes);
    for (std::size_t i = 0; i < nt; ++i) {
        const double half = 0.5 * options.t_max_factor * times[i];
        for (std::size_t j = 0; j < per_t; ++j) {
            const double t = half * (1.0 + gl.x[j]);
            t_nodes[i * per_t + j] = t;
            w_nodes[i * per_t + j] = half * gl.w[j] * std::exp(-t / times[i]) / times[i];
        }
    }

    const auto l = static_cast<Eigen::Index>(size);
    const double t_max = options.t_max_factor * *std::max_element(times.begin(), times.end());
    const double speed = 2.0 + std::abs(lambda) * sup_norm(process);
    const double half_width = static_cast<double>(size / 2);
    const bool ballistic_safe = speed * t_max <= half_width - static_cast<double>(options.wall_margin);

    // Without disorder every replica is the same.
    const std::size_t distinct = lambda == 0.0 ? 1 : replicas;
    std::vector<ReplicaResult> results(distinct);

    parallel_for(distinct, [&](std::size_t r) {
        const auto op = build_operator(process, lambda, size, options.stream_base + r);
        const auto spec = diagonalize(op);
        const Eigen::Map<const Eigen::MatrixXd> z(spec.vectors.data(), l, l);
        const auto origin = static_cast<Eigen::Index>(op.origin);

        Eigen::MatrixXd c(l, static_cast<Eigen::Index>(nodes)), s(l, static_cast<Eigen::Index>(nodes));
        for (Eigen::Index k = 0; k < l; ++k) {
            const double a = z(origin, k);
            const double e = spec.values[static_cast<std::size_t>(k)];
            for (std::size_t j = 0; j < nodes; ++j) {
                c(k, static_cast<Eigen::Index>(j)) = a * std::cos(e * t_nodes[j]);
                s(k, static_cast<Eigen::Index>(j)) = a * std::sin(e * t_nodes[j]);
            }
        }
        const Eigen::MatrixXd re = z * c;
        const Eigen::MatrixXd im = z * s;

        std::vector<double> xq(size), x(size);
        for (std::size_t n = 0; n < size; ++n) {
            x[n] = static_cast<double>(n) - static_cast<double>(op.origin);
            xq[n] = std::pow(std::abs(x[n]), q);
        }
        const double e0 = op.diagonal[op.origin];
        const std::size_t margin = std::min(options.wall_margin, size / 2);

        ReplicaResult out;
        out.moments.assign(nt, 0.0);
        out.positions.assign(nt, 0.0);
        out.peak.assign(nt, 0.0);
        for (std::size_t j = 0; j < nodes; ++j) {
            const auto col = static_cast<Eigen::Index>(j);
            double norm = 0.0, moment = 0.0, position = 0.0, energy = 0.0, wall = 0.0;
            for (Eigen::Index n = 0; n < l; ++n) {
                const double pr = re(n, col), pi = im(n, col);
                const double prob = pr * pr + pi * pi;
                const auto un = static_cast<std::size_t>(n);
                norm += prob;
                moment += xq[un] * prob;
                position += x[un] * prob;
                energy += op.diagonal[un] * prob;
                if (n + 1 < l)
                    energy += 2.0 * (pr * re(n + 1, col) + pi * im(n + 1, col));
                if (un < margin || un >= size - margin)
                    wall += prob;
            }
            out.norm_error = std::max(out.norm_error, std::abs(norm - 1.0));
            out.energy_drift = std::max(out.energy_drift, std::abs(energy - e0));
            out.wall_weight = std::max(out.wall_weight, wall);
            const std::size_t ti = j / per_t;
            out.moments[ti] += w_nodes[j] * moment;
            out.positions[ti] += w_nodes[j] * position;
            out.peak[ti] = std::max(out.peak[ti], moment);
        }
        results[r] = std::move(out);
    });

    MomentSeries series;
    series.q = q;
    series.lambda = lambda;
    series.size = size;
    series.replicas = replicas;
    series.times.assign(times.begin(), times.end());
    series.values.assign(nt, 0.0);
    series.std_error.assign(nt, 0.0);
    series.truncation_error.assign(nt, 0.0);
    series.mean_position.assign(nt, 0.0);
    const double nd = static_cast<double>(distinct);
    for (const auto& r : results) {
        series.max_norm_error = std::max(series.max_norm_error, r.norm_error);
        series.max_energy_drift = std::max(series.max_energy_drift, r.energy_drift);
        series.max_wall_weight = std::max(series.max_wall_weight, r.wall_weight);
        for (std::size_t i = 0; i < nt; ++i) {
            series.values[i] += r.moments[i] / nd;
            series.mean_position[i] += r.positions[i] / nd;
            series.truncation_error[i] = std::max(series.truncation_error[i], std::exp(-options.t_max_factor) * r.peak[i]);
        }
    }
    if (distinct > 1) {
        for (std::size_t i = 0; i < nt; ++i) {
            double ss = 0.0;
            for (const auto& r : results)
                ss += (r.moments[i] - series.values[i]) * (r.moments[i] - series.values[i]);
            series.std_error[i] = std::sqrt(ss / (nd - 1.0) / nd);
        }
    }

    if (!ballistic_safe && series.max_wall_weight > options.wall_tolerance) {
        const auto suggested = static_cast<std::size_t>(2.0 * std::ceil(speed * t_max + static_cast<double>(options.wall_margin))) + 1;
        throw BoxTooSmallError("moment_series: wave packet reaches the wall (weight "
                                   + std::to_string(series.max_wall_weight) + "); suggested L = " + std::to_string(suggested),
                               suggested);
    }
    return series;
}

GrowthReport log_growth_check(const MomentSeries& series, double beta)
{
    if (!(beta > 2.0))
        throw std::invalid_argument("log_growth_check: beta must exceed 2");
    const auto& t = series.times;
    if (t.size() < 4)
        throw std::invalid_argument("log_growth_check: need at least four times");
    const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
    if (*hi / *lo < 100.0 * (1.0 - 1e-12))
        throw std::invalid_argument("log_growth_check: series must span at least two decades in T");

    const double split = std::sqrt(*lo * *hi);
    auto bound = [&](double time) { return std::pow(std::max(std::log(time), 0.0), series.q * beta); };

    GrowthReport report;
    report.beta = beta;
    report.c_full = -INFINITY;
    report.c_fit = -INFINITY;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double excess = series.values[i] - bound(t[i]);
        report.c_full = std::max(report.c_full, excess);
        if (t[i] <= split)
            report.c_fit = std::max(report.c_fit, excess);
    }
    report.pass = true;
    report.worst_excess = -INFINITY;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] <= split)
            continue;
        const double excess = series.values[i] - bound(t[i]) - report.c_fit;
        report.worst_excess = std::max(report.worst_excess, excess);
        if (excess > 1e-9 * std::max(1.0, std::abs(series.values[i])))
            report.pass = false;
    }
    return report;
}

double loglog_slope(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope: need two or more matching points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw std::invalid_argument("loglog_slope: values must be positive");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace locmix
