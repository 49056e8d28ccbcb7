#include "locmix/experiments.hpp"

#include "locmix/dynamics.hpp"
#include "locmix/errors.hpp"
#include "locmix/fokkerplanck.hpp"
#include "locmix/phase.hpp"
#include "locmix/spectral.hpp"
#include "locmix/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numbers>

namespace locmix {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPi = std::numbers::pi;

std::string fixed(double v, int digits = 4)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

LyapunovOptions mc_options(const ExperimentConfig& c)
{
    LyapunovOptions o;
    o.steps = c.steps;
    o.replicas = c.replicas;
    o.renorm_every = c.renorm_every;
    return o;
}

PotentialProcess seeded(const ExperimentConfig& c)
{
    PotentialProcess p = c.process;
    p.seed = c.seed;
    return p;
}

RunResult lyapunov_scan(const ExperimentConfig& c)
{
    const auto process = seeded(c);
    RunResult r;
    r.table = CsvTable(
        {"lambda", "energy", "gamma_mc", "std_error", "gamma_thouless", "rel_gap", "gamma_thouless_dk", "rel_gap_dk"});
    r.plot = {"Lyapunov exponent", "E", "gamma", false, false};
    double worst = 0.0;
    for (double lambda : c.lambdas) {
        PlotSeries mc{"MC lambda=" + fixed(lambda), {}, {}, true}, th{"Thouless lambda=" + fixed(lambda), {}, {}, false};
        for (double e : c.energies) {
            const auto est = lyapunov_mc(process, e, lambda, mc_options(c));
            // The phase advances by 2k per step, so the correlations enter at frequency 2k;
            // the _dk columns evaluate the density at k instead.
            double pred = kNaN, pred_dk = kNaN;
            if (std::abs(e) < 2.0) {
                const double k = std::acos(e / 2.0);
                pred = gamma_thouless(lambda, k, spectral_density_value(process, std::min(2.0 * k, 2.0 * kPi - 2.0 * k)));
                pred_dk = gamma_thouless(lambda, k, spectral_density_value(process, k));
            }
            auto rel = [&](double p) { return std::isfinite(p) && p > 0.0 ? std::abs(est.gamma / p - 1.0) : kNaN; };
            const double gap = rel(pred);
            if (std::isfinite(gap) && std::abs(e) > 0.1 && std::abs(e) <= 1.5)
                worst = std::max(worst, gap);
            r.table.add_row({csv_cell(lambda), csv_cell(e), csv_cell(est.gamma), csv_cell(est.std_error), csv_cell(pred),
                             csv_cell(gap), csv_cell(pred_dk), csv_cell(rel(pred_dk))});
            mc.x.push_back(e);
            mc.y.push_back(est.gamma);
            th.x.push_back(e);
            th.y.push_back(pred);
        }
        r.series.push_back(mc);
        r.series.push_back(th);
    }
    r.checks.push_back({"thouless_gap_below_15pct_for_0.1<|E|<=1.5", worst < 0.15, "max relative gap " + fixed(worst)});
    return r;
}

RunResult band_center_scaling(const ExperimentConfig& c)
{
    const auto process = seeded(c);
    const double d0 = spectral_density_value(process, 0.0);
    const double dpi = spectral_density_value(process, std::numbers::pi);
    const auto rho = density_elliptic(assemble_coefficients(FPSetting::band_center(c.epsilon, d0, dpi)));
    RunResult r;
    r.table = CsvTable({"lambda", "epsilon", "energy", "gamma_mc", "std_error", "gamma_band_center", "gamma_naive", "ratio"});
    r.plot = {"Band center: gamma / lambda^2", "lambda", "gamma / lambda^2", true, false};
    PlotSeries mc{"MC", {}, {}, true}, pred_s{"prediction", {}, {}, false}, naive_s{"naive Thouless", {}, {}, false};
    double worst = 0.0;
    for (double lambda : c.lambdas) {
        const double e = c.epsilon * lambda * lambda;
        const auto est = lyapunov_mc(process, e, lambda, mc_options(c));
        const double pred = gamma_band_center(lambda, c.epsilon, dpi, rho);
        // Thouless at k = pi/2, density taken at 2k = pi.
        const double naive = lambda * lambda * dpi / 8.0;
        const double ratio = est.gamma / pred;
        worst = std::max(worst, std::abs(ratio - 1.0));
        r.table.add_row({csv_cell(lambda), csv_cell(c.epsilon), csv_cell(e), csv_cell(est.gamma), csv_cell(est.std_error),
                         csv_cell(pred), csv_cell(naive), csv_cell(ratio)});
        const double l2 = lambda * lambda;
        mc.x.push_back(lambda);
        mc.y.push_back(est.gamma / l2);
        pred_s.x.push_back(lambda);
        pred_s.y.push_back(pred / l2);
        naive_s.x.push_back(lambda);
        naive_s.y.push_back(naive / l2);
    }
    r.series = {mc, pred_s, naive_s};
    r.checks.push_back({"band_center_within_10pct", worst <= 0.10, "max |ratio - 1| = " + fixed(worst)});
    return r;
}

RunResult band_edge_scaling(const ExperimentConfig& c)
{
    const auto process = seeded(c);
    const double d0 = spectral_density_value(process, 0.0);
    const auto rho = density_band_edge(d0, c.epsilon);
    RunResult r;
    r.table = CsvTable({"lambda", "epsilon", "energy", "gamma_mc", "std_error", "gamma_band_edge", "ratio"});
    r.plot = {"Band edge: gamma / lambda^(2/3)", "lambda", "gamma / lambda^(2/3)", true, false};
    PlotSeries mc{"MC", {}, {}, true}, pred_s{"prediction", {}, {}, false};
    double worst = 0.0;
    std::vector<double> ls, gs;
    for (double lambda : c.lambdas) {
        // Upper edge, eps > 0 inside the band.
        const double e = 2.0 - c.epsilon * std::pow(lambda, 4.0 / 3.0);
        const auto est = lyapunov_mc(process, e, lambda, mc_options(c));
        const double pred = gamma_band_edge(lambda, c.epsilon, d0, rho);
        const double ratio = est.gamma / pred;
        worst = std::max(worst, std::abs(ratio - 1.0));
        r.table.add_row({csv_cell(lambda), csv_cell(c.epsilon), csv_cell(e), csv_cell(est.gamma), csv_cell(est.std_error),
                         csv_cell(pred), csv_cell(ratio)});
        const double l23 = std::cbrt(lambda * lambda);
        mc.x.push_back(lambda);
        mc.y.push_back(est.gamma / l23);
        pred_s.x.push_back(lambda);
        pred_s.y.push_back(pred / l23);
        ls.push_back(lambda);
        gs.push_back(est.gamma);
    }
    r.series = {mc, pred_s};
    r.checks.push_back({"band_edge_within_10pct", worst <= 0.10, "max |ratio - 1| = " + fixed(worst)});
    if (ls.size() >= 2) {
        const double slope = loglog_slope(ls, gs);
        r.checks.push_back({"band_edge_slope_2/3", std::abs(slope - 2.0 / 3.0) <= 0.05, "slope " + fixed(slope)});
    }
    return r;
}

RunResult near_edge_scaling(const ExperimentConfig& c)
{
    const auto process = seeded(c);
    const double d0 = spectral_density_value(process, 0.0);
    RunResult r;
    r.table = CsvTable({"lambda", "side", "epsilon", "eta", "energy", "gamma_mc", "std_error", "prediction", "ratio", "eta_in_range"});
    r.plot = {"Near-edge scaling", "lambda", "gamma", true, true};
    PlotSeries hyp{"outside (MC)", {}, {}, true}, ell{"inside (MC)", {}, {}, true};
    PlotSeries hyp_p{"sqrt(eps lambda^eta)", {}, {}, false}, ell_p{"lambda^(2-eta) D0 / (8 eps)", {}, {}, false};
    double worst = 0.0;
    for (double lambda : c.lambdas) {
        for (auto side : {EdgeSide::Hyperbolic, EdgeSide::Elliptic}) {
            const double shift = c.epsilon * std::pow(lambda, c.eta);
            const double e = side == EdgeSide::Hyperbolic ? 2.0 + shift : 2.0 - shift;
            const auto est = lyapunov_mc(process, e, lambda, mc_options(c));
            const auto pred = gamma_near_edge(lambda, c.epsilon, c.eta, side, d0);
            const double ratio = est.gamma / pred.value;
            worst = std::max(worst, std::abs(ratio - 1.0));
            const bool outside = side == EdgeSide::Hyperbolic;
            r.table.add_row({csv_cell(lambda), outside ? "hyperbolic" : "elliptic", csv_cell(c.epsilon), csv_cell(c.eta),
                             csv_cell(e), csv_cell(est.gamma), csv_cell(est.std_error), csv_cell(pred.value),
                             csv_cell(ratio), pred.in_range ? "1" : "0"});
            auto& m = outside ? hyp : ell;
            auto& p = outside ? hyp_p : ell_p;
            m.x.push_back(lambda);
            m.y.push_back(est.gamma);
            p.x.push_back(lambda);
            p.y.push_back(pred.value);
        }
    }
    r.series = {hyp, hyp_p, ell, ell_p};
    r.checks.push_back({"near_edge_within_20pct", worst <= 0.20, "max |ratio - 1| = " + fixed(worst)});
    if (!(c.eta > 0.8 && c.eta < 4.0 / 3.0))
        r.checks.push_back({"eta_in_validity_range", false, "eta outside (4/5, 4/3), leading order not justified"});
    return r;
}

RunResult density_compare(const ExperimentConfig& c)
{
    const auto process = seeded(c);
    const bool edge = c.setting == "band_edge";
    const double d0 = c.d0 ? *c.d0 : spectral_density_value(process, 0.0);
    const double dpi = c.dpi ? *c.dpi : (edge ? 0.0 : spectral_density_value(process, std::numbers::pi));
    const FPSetting setting = edge ? FPSetting::band_edge(c.epsilon, d0) : FPSetting::band_center(c.epsilon, d0, dpi);
    const auto coeffs = assemble_coefficients(setting, c.grid);
    const auto formula = edge ? density_band_edge(d0, c.epsilon, c.grid) : density_elliptic(coeffs);
    const auto oracle = density_bvp_oracle(coeffs);

    std::vector<double> hist;
    if (c.orbit_steps > 0) {
        const auto setup = edge ? band_edge_setup(c.epsilon) : band_center_setup(c.epsilon);
        hist = phase_histogram(setup, process, c.orbit_lambda, c.orbit_steps, c.bins, 0, 1000);
    }
    const double width = std::numbers::pi / static_cast<double>(c.bins);

    RunResult r;
    r.table = CsvTable({"theta", "p", "q", "rho_formula", "rho_oracle", "orbit_histogram"});
    r.plot = {"Stationary density (" + c.setting + ")", "theta", "rho", false, false};
    PlotSeries f{"formula", {}, {}, false}, o{"BVP oracle", {}, {}, false}, h{"orbit histogram", {}, {}, true};
    double diff = 0.0;
    for (std::size_t i = 0; i < coeffs.theta.size(); ++i) {
        const double t = coeffs.theta[i];
        double hv = kNaN;
        if (!hist.empty())
            hv = hist[std::min(c.bins - 1, static_cast<std::size_t>(t / width))] / width;
        diff = std::max(diff, std::abs(formula.rho[i] - oracle.rho[i]));
        r.table.add_row({csv_cell(t), csv_cell(coeffs.p[i]), csv_cell(coeffs.q[i]), csv_cell(formula.rho[i]),
                         csv_cell(oracle.rho[i]), csv_cell(hv)});
        f.x.push_back(t);
        f.y.push_back(formula.rho[i]);
        o.x.push_back(t);
        o.y.push_back(oracle.rho[i]);
    }
    for (std::size_t b = 0; b < hist.size(); ++b) {
        h.x.push_back((static_cast<double>(b) + 0.5) * width);
        h.y.push_back(hist[b] / width);
    }
    r.series = {f, o};
    if (!hist.empty())
        r.series.push_back(h);
    r.checks.push_back({"formula_vs_oracle_1e-4", diff <= 1e-4, "max |diff| = " + fixed(diff)});
    r.checks.push_back({"fp_residual_1e-5", fp_residual(formula) <= 1e-5, "residual " + fixed(fp_residual(formula))});
    if (!hist.empty()) {
        const double tv = total_variation(hist, [&](double t) { return formula.at(t); });
        r.checks.push_back({"orbit_tv_0.05", tv <= 0.05, "TV " + fixed(tv)});
    }
    return r;
}

RunResult spectral_scan(const ExperimentConfig& c)
{
    const auto process = seeded(c);
    RunResult r;
    r.table = CsvTable({"k", "periodogram", "std_error", "exact"});
    r.plot = {"Spectral density", "k", "D_V(k)", false, false};
    PlotSeries est{"periodogram", {}, {}, true}, ex{"exact", {}, {}, false};
    double worst_z = 0.0;
    bool any_exact = false;
    for (double k : c.ks) {
        const auto e = periodogram_density(process, k, c.segment_length, c.segments);
        const auto exact = exact_density(process, k);
        r.table.add_row({csv_cell(k), csv_cell(e.value), csv_cell(e.std_error), exact ? csv_cell(*exact) : ""});
        est.x.push_back(k);
        est.y.push_back(e.value);
        if (exact) {
            any_exact = true;
            ex.x.push_back(k);
            ex.y.push_back(*exact);
            const double scale = std::max(e.std_error, 0.02 * std::abs(*exact)) + 1e-3;
            worst_z = std::max(worst_z, std::abs(e.value - *exact) / scale);
        }
    }
    r.series = {est};
    if (any_exact) {
        r.series.push_back(ex);
        r.checks.push_back({"periodogram_vs_exact_4sigma", worst_z <= 4.0, "max deviation " + fixed(worst_z) + " sigma"});
    }
    return r;
}

RunResult moments(const ExperimentConfig& c)
{
    const auto process = seeded(c);
    RunResult r;
    r.table = CsvTable({"lambda", "T", "q", "M", "std_error", "replicas", "L"});
    r.plot = {"Moments M_T^q", "T", "M_T", true, true};
    for (double lambda : c.lambdas) {
        const auto s = moment_series(process, lambda, c.size, c.q, c.times, c.replicas);
        PlotSeries line{"lambda=" + fixed(lambda), s.times, s.values, false};
        for (std::size_t i = 0; i < s.times.size(); ++i)
            r.table.add_row({csv_cell(lambda), csv_cell(s.times[i]), csv_cell(c.q), csv_cell(s.values[i]),
                             csv_cell(s.std_error[i]), std::to_string(c.replicas), std::to_string(c.size)});
        r.series.push_back(line);
        r.checks.push_back({"unitarity_lambda=" + fixed(lambda), s.max_norm_error <= 1e-10, "max norm error " + fixed(s.max_norm_error)});
        if (s.times.size() >= 2)
            r.checks.push_back({"loglog_slope_lambda=" + fixed(lambda), true, "slope " + fixed(loglog_slope(s.times, s.values))});
        const auto [lo, hi] = std::minmax_element(s.times.begin(), s.times.end());
        if (s.times.size() >= 4 && *hi / *lo >= 100.0) {
            const auto g = log_growth_check(s, c.beta);
            r.checks.push_back({"log_growth_beta=" + fixed(c.beta) + "_lambda=" + fixed(lambda), g.pass,
                                std::string(g.pass ? "PASS" : "FAIL") + ", fitted C " + fixed(g.c_fit)});
        }
    }
    return r;
}

RunResult norm_growth(const ExperimentConfig& c)
{
    const auto process = seeded(c);
    const auto est = lyapunov_mc(process, c.energy, c.lambda, mc_options(c));
    const double c_hat = est.gamma / 4.0;
    RunResult r;
    r.table = CsvTable({"N", "c_hat", "fraction", "bound", "holds"});
    r.plot = {"Norm growth probability", "N", "probability", true, false};
    PlotSeries f{"empirical", {}, {}, true}, b{"1 - exp(-c sqrt N)", {}, {}, false};
    bool all = true;
    for (std::size_t i = 0; i < c.horizons.size(); ++i) {
        const auto res = norm_growth_probability(process, c.energy, c.lambda, c.horizons[i], c.samples, c_hat,
                                                 1'000'000 + i * c.samples);
        const bool holds = res.fraction >= res.bound;
        all = all && holds;
        const double n = static_cast<double>(c.horizons[i]);
        r.table.add_row({std::to_string(c.horizons[i]), csv_cell(c_hat), csv_cell(res.fraction), csv_cell(res.bound),
                         holds ? "1" : "0"});
        f.x.push_back(n);
        f.y.push_back(res.fraction);
        b.x.push_back(n);
        b.y.push_back(res.bound);
    }
    r.series = {f, b};
    r.checks.push_back({"fraction_above_bound", all, "c_hat = gamma/4 = " + fixed(c_hat)});
    return r;
}

}  // namespace

double spectral_density_value(const PotentialProcess& process, double k)
{
    if (auto exact = exact_density(process, k))
        return *exact;
    return periodogram_density(process, k, 1 << 14, 64).value;
}

RunResult compute_experiment(const ExperimentConfig& config)
{
    validate_config(config);
    switch (config.experiment) {
    case ExperimentKind::LyapunovScan: return lyapunov_scan(config);
    case ExperimentKind::BandCenterScaling: return band_center_scaling(config);
    case ExperimentKind::BandEdgeScaling: return band_edge_scaling(config);
    case ExperimentKind::NearEdgeScaling: return near_edge_scaling(config);
    case ExperimentKind::DensityCompare: return density_compare(config);
    case ExperimentKind::SpectralDensity: return spectral_scan(config);
    case ExperimentKind::Moments: return moments(config);
    case ExperimentKind::NormGrowth: return norm_growth(config);
    }
    throw ConfigError("unknown experiment");
}

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options)
{
    RunResult r = compute_experiment(config);
    std::filesystem::create_directories(options.out_dir);
    const std::filesystem::path csv = std::filesystem::path(options.out_dir) / config.output_name();
    r.table.write(csv.string(), config_hash(config), config.seed);
    r.files.push_back(csv.string());
    if (options.plots && !r.series.empty()) {
        auto svg = csv;
        svg.replace_extension(".svg");
        write_svg(svg.string(), r.plot, r.series);
        r.files.push_back(svg.string());
    }
    return r;
}

}  // namespace locmix
