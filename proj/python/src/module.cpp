#include "locmix/acceptance.hpp"
#include "locmix/config.hpp"
#include "locmix/dynamics.hpp"
#include "locmix/errors.hpp"
#include "locmix/experiments.hpp"
#include "locmix/fokkerplanck.hpp"
#include "locmix/potential.hpp"
#include "locmix/spectral.hpp"
#include "locmix/transfer.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace locmix;

namespace {

py::dict density_dict(const StationaryDensity& d)
{
    py::dict out;
    out["theta"] = d.theta;
    out["rho"] = d.rho;
    out["flux"] = d.flux;
    out["method"] = d.method;
    return out;
}

}  // namespace

PYBIND11_MODULE(_locmix, m)
{
    m.doc() = "Localization in mixing potentials: Lyapunov exponents, densities, dynamics.";

    static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
    static py::exception<NumericalError> numerical_error(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            config_error(e.what());
        } catch (const NumericalError& e) {
            numerical_error(e.what());
        }
    });

    py::class_<PotentialProcess>(m, "Process")
        .def_static("bernoulli", &PotentialProcess::bernoulli, py::arg("seed") = 0)
        .def_static("markov", &PotentialProcess::two_state_markov, py::arg("flip"), py::arg("seed") = 0)
        .def_static("moving_average", &PotentialProcess::moving_average, py::arg("rate"), py::arg("seed") = 0)
        .def_static("intermittent", &PotentialProcess::intermittent, py::arg("z"), py::arg("seed") = 0)
        .def_static("cocycle", &PotentialProcess::cocycle, py::arg("scale"), py::arg("seed") = 0)
        .def_property_readonly("kind", [](const PotentialProcess& p) { return to_string(p.kind()); })
        .def("sample", [](const PotentialProcess& p, std::size_t n, std::uint64_t stream) {
            return sample_stream(p, n, stream);
        }, py::arg("n"), py::arg("stream") = 0);

    m.def("lyapunov", [](const PotentialProcess& p, double energy, double lambda, std::size_t steps,
                         std::size_t replicas) {
        LyapunovOptions o;
        o.steps = steps;
        o.replicas = replicas;
        LyapunovEstimate r;
        {
            py::gil_scoped_release release;
            r = lyapunov_mc(p, energy, lambda, o);
        }
        py::dict out;
        out["gamma"] = r.gamma;
        out["std_error"] = r.std_error;
        out["per_replica"] = r.per_replica;
        return out;
    }, py::arg("process"), py::arg("energy"), py::arg("lam"), py::arg("steps") = 1'000'000, py::arg("replicas") = 8);

    m.def("spectral_density", [](const PotentialProcess& p, double k) { return spectral_density_value(p, k); },
          py::arg("process"), py::arg("k"));
    m.def("exact_density", &exact_density, py::arg("process"), py::arg("k"));
    m.def("periodogram", [](const PotentialProcess& p, double k, std::size_t n, std::size_t segments) {
        const auto e = periodogram_density(p, k, n, segments);
        return py::make_tuple(e.value, e.std_error);
    }, py::arg("process"), py::arg("k"), py::arg("n") = 4096, py::arg("segments") = 64);

    m.def("density_band_center", [](double eps, double d0, double dpi, std::size_t grid) {
        return density_dict(density_elliptic(assemble_coefficients(FPSetting::band_center(eps, d0, dpi), grid)));
    }, py::arg("epsilon"), py::arg("d0"), py::arg("dpi"), py::arg("grid") = kDefaultGrid);
    m.def("density_band_edge", [](double d0, double eps, std::size_t grid) {
        return density_dict(density_band_edge(d0, eps, grid));
    }, py::arg("d0"), py::arg("epsilon"), py::arg("grid") = kDefaultGrid);

    m.def("gamma_thouless", &gamma_thouless, py::arg("lam"), py::arg("k"), py::arg("d"));
    m.def("gamma_band_center", [](double lambda, double eps, double d0, double dpi) {
        const auto rho = density_elliptic(assemble_coefficients(FPSetting::band_center(eps, d0, dpi)));
        return gamma_band_center(lambda, eps, dpi, rho);
    }, py::arg("lam"), py::arg("epsilon"), py::arg("d0"), py::arg("dpi"));
    m.def("gamma_band_edge", [](double lambda, double eps, double d0) {
        return gamma_band_edge(lambda, eps, d0, density_band_edge(d0, eps));
    }, py::arg("lam"), py::arg("epsilon"), py::arg("d0"));

    m.def("moments", [](const PotentialProcess& p, double lambda, std::size_t size, double q,
                        const std::vector<double>& times, std::size_t replicas) {
        MomentSeries s;
        {
            py::gil_scoped_release release;
            s = moment_series(p, lambda, size, q, times, replicas);
        }
        py::dict out;
        out["times"] = s.times;
        out["values"] = s.values;
        out["std_error"] = s.std_error;
        out["max_norm_error"] = s.max_norm_error;
        return out;
    }, py::arg("process"), py::arg("lam"), py::arg("size"), py::arg("q"), py::arg("times"), py::arg("replicas") = 1);

    m.def("run_config", [](const std::string& path, const std::string& out_dir, bool plots) {
        const auto config = load_config(path);
        RunOptions o;
        o.out_dir = out_dir;
        o.plots = plots;
        const auto r = run_experiment(config, o);
        py::list checks;
        for (const auto& c : r.checks)
            checks.append(py::make_tuple(c.name, c.pass, c.detail));
        py::dict out;
        out["hash"] = config_hash(config);
        out["files"] = r.files;
        out["checks"] = checks;
        return out;
    }, py::arg("path"), py::arg("out_dir") = ".", py::arg("plots") = false);

    m.def("check", [](const std::vector<int>& only, bool strict, std::uint64_t seed) {
        AcceptanceOptions o;
        o.only = only;
        o.strict = strict;
        o.seed = seed;
        py::list rows;
        run_acceptance(o, [&](const CriterionResult& r) {
            rows.append(py::make_tuple(r.id, r.name, r.pass, r.detail));
        });
        return rows;
    }, py::arg("only") = std::vector<int>{}, py::arg("strict") = false, py::arg("seed") = 1);
}
