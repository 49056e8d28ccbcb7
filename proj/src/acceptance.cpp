#include "locmix/acceptance.hpp"

#include "locmix/dynamics.hpp"
#include "locmix/fokkerplanck.hpp"
#include "locmix/phase.hpp"
#include "locmix/potential.hpp"
#include "locmix/spectral.hpp"
#include "locmix/transfer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace locmix {

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok) { pass = pass && ok; }
};

std::string g(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

LyapunovOptions full_mc(std::uint64_t stream_base = 0)
{
    LyapunovOptions o;
    o.steps = 10'000'000;
    o.replicas = 8;
    o.stream_base = stream_base;
    return o;
}

Outcome bulk_thouless(const AcceptanceOptions& opt, double scale)
{
    Outcome out;
    const auto process = PotentialProcess::bernoulli(opt.seed);
    const std::vector<double> lambdas{0.1, 0.05, 0.025};
    std::vector<double> gammas;
    for (double l : lambdas) {
        const auto est = lyapunov_mc(process, 1.0, l, full_mc());
        const double pred = gamma_thouless(l, kPi / 3.0, 1.0);
        const double rel = std::abs(est.gamma / pred - 1.0);
        out.require(rel <= 0.15 * scale);
        gammas.push_back(est.gamma);
        out.detail << "lambda=" << l << " gamma/pred=" << g(est.gamma / pred) << "; ";
    }
    const double slope = loglog_slope(lambdas, gammas);
    out.require(std::abs(slope - 2.0) <= 0.15 * scale);
    out.detail << "slope=" << g(slope);
    return out;
}

Outcome correlated_bulk(const AcceptanceOptions& opt, double scale)
{
    Outcome out;
    const auto process = PotentialProcess::two_state_markov(0.3, opt.seed);
    const double d = exact_markov_density(std::get<MarkovParams>(process.params), kPi / 3.0);
    const double lambda = 0.05;
    const auto est = lyapunov_mc(process, 1.0, lambda, full_mc());
    const double pred = lambda * lambda * d / (8.0 * 0.75);
    const double rel = std::abs(est.gamma / pred - 1.0);
    out.require(rel <= 0.15 * scale);
    const double d2 = exact_markov_density(std::get<MarkovParams>(process.params), 2.0 * kPi / 3.0);
    out.detail << "D_V(pi/3)=" << g(d) << " gamma/pred=" << g(est.gamma / pred) << "; with D_V(2pi/3)=" << g(d2)
               << " gamma/pred=" << g(est.gamma / (pred * d2 / d));
    return out;
}

Outcome band_center(const AcceptanceOptions& opt, double scale)
{
    Outcome out;
    const auto process = PotentialProcess::bernoulli(opt.seed);
    const auto rho = density_elliptic(assemble_coefficients(FPSetting::band_center(0.0, 1.0, 1.0)));
    for (double l : {0.1, 0.05}) {
        const auto est = lyapunov_mc(process, 0.0, l, full_mc());
        const double pred = gamma_band_center(l, 0.0, 1.0, rho);
        const double naive = l * l / 8.0;
        const double rel = std::abs(est.gamma / pred - 1.0);
        const double sigmas = std::abs(est.gamma - naive) / est.std_error;
        out.require(rel <= 0.10 * scale);
        out.require(sigmas > 3.0);
        out.detail << "lambda=" << l << " gamma/pred=" << g(est.gamma / pred) << " gamma/naive=" << g(est.gamma / naive)
                   << " (" << g(sigmas) << " sigma from naive); ";
    }
    return out;
}

Outcome band_edge(const AcceptanceOptions& opt, double scale)
{
    Outcome out;
    const auto process = PotentialProcess::bernoulli(opt.seed);
    const auto rho = density_band_edge(1.0, 0.0);
    const std::vector<double> lambdas{1e-2, 1e-3};
    std::vector<double> gammas;
    for (double l : lambdas) {
        const auto est = lyapunov_mc(process, 2.0, l, full_mc());
        const double pred = gamma_band_edge(l, 0.0, 1.0, rho);
        out.require(std::abs(est.gamma / pred - 1.0) <= 0.10 * scale);
        gammas.push_back(est.gamma);
        out.detail << "lambda=" << l << " gamma/pred=" << g(est.gamma / pred) << "; ";
    }
    const double slope = loglog_slope(lambdas, gammas);
    out.require(std::abs(slope - 2.0 / 3.0) <= 0.05 * scale);
    out.detail << "slope=" << g(slope);
    return out;
}

Outcome density_construction(const AcceptanceOptions&, double scale)
{
    Outcome out;
    for (auto [d0, eps] : {std::pair{1.0, 0.0}, std::pair{1.0, 1.0}, std::pair{0.5, -1.0}}) {
        const auto formula = density_band_edge(d0, eps);
        const auto oracle = density_bvp_oracle(assemble_coefficients(FPSetting::band_edge(eps, d0)));
        double diff = 0.0;
        for (std::size_t i = 0; i < formula.rho.size(); ++i)
            diff = std::max(diff, std::abs(formula.rho[i] - oracle.rho[i]));
        const bool nonneg = std::all_of(formula.rho.begin(), formula.rho.end(), [](double r) { return r >= 0.0; });
        const double mass = periodic_integral(formula.rho);
        const double res = fp_residual(formula);
        out.require(nonneg);
        out.require(std::abs(mass - 1.0) <= 1e-8 * scale);
        out.require(diff <= 1e-4 * scale);
        out.require(res <= 1e-5 * scale);
        out.detail << "(" << d0 << "," << eps << "): diff=" << g(diff) << " residual=" << g(res) << "; ";
    }
    return out;
}

Outcome orbit_density(const AcceptanceOptions& opt, double scale)
{
    Outcome out;
    const auto process = PotentialProcess::bernoulli(opt.seed);
    const auto rho = density_band_edge(1.0, 0.0);
    const auto hist = phase_histogram(band_edge_setup(0.0), process, 1e-2, 10'000'000, 128, 0, 1000);
    const double tv = total_variation(hist, [&](double t) { return rho.at(t); });
    out.require(tv <= 0.05 * scale);
    out.detail << "TV=" << g(tv);
    return out;
}

Outcome near_edge(const AcceptanceOptions& opt, double scale)
{
    Outcome out;
    const auto process = PotentialProcess::bernoulli(opt.seed);
    const double lambda = 1e-3, eps = 2.0;
    for (auto side : {EdgeSide::Hyperbolic, EdgeSide::Elliptic}) {
        const double e = side == EdgeSide::Hyperbolic ? 2.0 + eps * lambda : 2.0 - eps * lambda;
        const auto est = lyapunov_mc(process, e, lambda, full_mc());
        const double pred = gamma_near_edge(lambda, eps, 1.0, side, 1.0).value;
        out.require(std::abs(est.gamma / pred - 1.0) <= 0.20 * scale);
        out.detail << (side == EdgeSide::Hyperbolic ? "outside" : "inside") << " gamma/pred=" << g(est.gamma / pred) << "; ";
    }
    return out;
}

Outcome drift_diffusion(const AcceptanceOptions& opt, double scale)
{
    Outcome out;
    const auto process = PotentialProcess::bernoulli(opt.seed);
    const auto setting = FPSetting::band_edge(0.0, 1.0);
    std::vector<double> grid;
    for (int i = 0; i < 8; ++i)
        grid.push_back(kPi * i / 8.0);
    double p_sup = 0.0, q_sup = 0.0;
    for (double t : grid) {
        p_sup = std::max(p_sup, std::abs(coefficient_p(setting, t)));
        q_sup = std::max(q_sup, std::abs(coefficient_q(setting, t)));
    }
    auto worst = [&](const DriftDiffusionEstimate& e) {
        double wp = 0.0, wq = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            wp = std::max(wp, std::abs(e.p_hat[i] - coefficient_p(setting, grid[i])) / p_sup);
            wq = std::max(wq, std::abs(e.q_hat[i] - coefficient_q(setting, grid[i])) / q_sup);
        }
        return std::pair{wp, wq};
    };
    const auto poly = drift_diffusion_estimate(band_edge_setup(0.0), process, 1000, 10'000, grid);
    const auto [wp, wq] = worst(poly);
    out.require(wp <= 0.10 * scale && wq <= 0.10 * scale);
    out.detail << "N_block=1000: max err p " << g(100 * wp) << "%, q " << g(100 * wq) << "% of sup; ";

    const double lambda = 1e-2;
    const auto block = static_cast<std::size_t>(std::floor(0.1 / std::pow(lambda, 2.0 / 3.0)));
    const auto dyn = drift_diffusion_dynamic(band_edge_setup(0.0), process, lambda, block, 20'000, grid);
    const auto [dp, dq] = worst(dyn);
    out.detail << "dynamic lambda=0.01 N_block=" << block << " (informational): p " << g(100 * dp) << "%, q " << g(100 * dq) << "%";
    return out;
}

Outcome cocycle(const AcceptanceOptions& opt, double scale)
{
    Outcome out;
    const auto process = PotentialProcess::cocycle(1.0, opt.seed);
    const auto d0 = periodogram_density(process, 0.0, 10'000, 100);
    const auto dpi = periodogram_density(process, kPi, 10'000, 100);
    out.require(d0.value <= 1e-2 * scale);
    out.require(dpi.value >= 0.5 && dpi.value <= 2.0);
    out.detail << "D(0)=" << g(d0.value) << " D(pi)=" << g(dpi.value) << " (n=10^6)";
    return out;
}

Outcome quantum_dynamics(const AcceptanceOptions& opt, double scale)
{
    Outcome out;
    const auto process = PotentialProcess::bernoulli(opt.seed);
    std::vector<double> free_times, loc_times;
    for (int i = 0; i <= 10; ++i)
        free_times.push_back(0.5 * std::pow(120.0, i / 10.0));
    for (int i = 0; i <= 8; ++i)
        loc_times.push_back(10.0 * std::pow(100.0, i / 8.0));

    const auto free = moment_series(process, 0.0, 2001, 2.0, free_times, 8);
    const double slope = loglog_slope(free.times, free.values);
    const auto free_check = log_growth_check(free, 2.5);
    out.require(std::abs(slope - 2.0) <= 0.1 * scale);
    out.require(!free_check.pass);

    const auto loc = moment_series(process, 1.0, 2001, 2.0, loc_times, 8);
    const double peak = *std::max_element(loc.values.begin(), loc.values.end());
    const double ratio = peak / loc.values.front();
    const auto loc_check = log_growth_check(loc, 2.5);
    out.require(ratio <= 4.0);
    out.require(loc_check.pass);
    out.require(free.max_norm_error <= 1e-10 && loc.max_norm_error <= 1e-10);

    out.detail << "lambda=0 slope=" << g(slope) << " verdict " << (free_check.pass ? "PASS" : "FAIL")
               << "; lambda=1 max/M_10=" << g(ratio) << " verdict " << (loc_check.pass ? "PASS" : "FAIL")
               << "; unitarity " << g(std::max(free.max_norm_error, loc.max_norm_error));
    return out;
}

Outcome norm_growth(const AcceptanceOptions& opt, double)
{
    Outcome out;
    const auto process = PotentialProcess::bernoulli(opt.seed);
    LyapunovOptions mc;
    mc.steps = 1'000'000;
    const auto est = lyapunov_mc(process, 0.5, 1.0, mc);
    const double c_hat = est.gamma / 4.0;
    std::uint64_t base = 1'000'000;
    for (std::size_t n : {100, 400, 1600}) {
        const auto r = norm_growth_probability(process, 0.5, 1.0, n, 2000, c_hat, base);
        base += 2000;
        out.require(r.fraction >= r.bound);
        out.detail << "N=" << n << " P=" << g(r.fraction) << " bound=" << g(r.bound) << "; ";
    }
    out.detail << "c_hat=" << g(c_hat);
    return out;
}

struct Criterion {
    int id;
    const char* name;
    double budget;
    Outcome (*run)(const AcceptanceOptions&, double);
};

const Criterion kCriteria[] = {
    {1, "bulk_thouless_law", 120, bulk_thouless},
    {2, "correlated_bulk_law", 60, correlated_bulk},
    {3, "band_center_anomaly", 120, band_center},
    {4, "band_edge_anomaly", 180, band_edge},
    {5, "density_construction", 30, density_construction},
    {6, "orbit_density_agreement", 60, orbit_density},
    {7, "near_edge_scalings", 120, near_edge},
    {8, "drift_diffusion_convergence", 60, drift_diffusion},
    {9, "cocycle_degeneracy", 10, cocycle},
    {10, "quantum_dynamics", 600, quantum_dynamics},
    {11, "norm_growth_statement", 120, norm_growth},
};

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, const CriterionCallback& on_result)
{
    const double scale = options.strict ? 0.1 : 1.0;
    std::vector<CriterionResult> results;
    for (const auto& c : kCriteria) {
        if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), c.id) == options.only.end())
            continue;
        CriterionResult r;
        r.id = c.id;
        r.name = c.name;
        r.budget_seconds = c.budget;
        const auto start = std::chrono::steady_clock::now();
        try {
            Outcome o = c.run(options, scale);
            r.pass = o.pass;
            r.detail = o.detail.str();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("error: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (r.seconds > r.budget_seconds) {
            r.pass = false;
            r.detail += " [over runtime budget]";
        }
        if (on_result)
            on_result(r);
        results.push_back(std::move(r));
    }
    return results;
}

std::string format_result(const CriterionResult& r)
{
    char head[96];
    std::snprintf(head, sizeof head, "%s C%02d %-28s %7.1fs/%4.0fs  ", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                  r.seconds, r.budget_seconds);
    return head + r.detail;
}

}  // namespace locmix
