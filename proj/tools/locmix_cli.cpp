#include "locmix/acceptance.hpp"
#include "locmix/config.hpp"
#include "locmix/errors.hpp"
#include "locmix/experiments.hpp"
#include "locmix/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kCheckFailed = 4 };

int run_command(const std::string& path, const locmix::RunOptions& options)
{
    const auto config = locmix::load_config(path);
    std::cout << "experiment " << locmix::to_string(config.experiment) << "  seed " << config.seed << "  hash "
              << locmix::config_hash(config) << '\n';
    const auto result = locmix::run_experiment(config, options);
    for (const auto& f : result.files)
        std::cout << "wrote " << f << '\n';
    bool all = true;
    for (const auto& c : result.checks) {
        all = all && c.pass;
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << c.detail << '\n';
    }
    if (!result.checks.empty())
        std::cout << (all ? "all cross-checks passed" : "some cross-checks failed") << '\n';
    return kOk;
}

int check_command(const locmix::AcceptanceOptions& options, const std::string& report_path)
{
    const bool json_stdout = report_path == "-";
    const auto results = locmix::run_acceptance(options, [&](const locmix::CriterionResult& r) {
        (json_stdout ? std::cerr : std::cout) << locmix::format_result(r) << std::endl;
    });
    bool all = true;
    nlohmann::json report = nlohmann::json::array();
    for (const auto& r : results) {
        all = all && r.pass;
        report.push_back({{"id", r.id},
                          {"name", r.name},
                          {"pass", r.pass},
                          {"seconds", r.seconds},
                          {"budget_seconds", r.budget_seconds},
                          {"detail", r.detail}});
    }
    const nlohmann::json doc{{"strict", options.strict}, {"seed", options.seed}, {"pass", all}, {"criteria", report}};
    if (json_stdout) {
        std::cout << doc.dump(2) << '\n';
    } else if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out)
            throw locmix::ConfigError("cannot write report to " + report_path);
        out << doc.dump(2) << '\n';
    }
    (json_stdout ? std::cerr : std::cout) << (all ? "all criteria passed" : "acceptance FAILED") << std::endl;
    return all ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"locmix: Lyapunov exponents and localization for mixing random potentials"};
    app.require_subcommand(1);

    std::size_t threads = 0;
    app.add_option("--threads", threads, "Cap on worker threads (0 = all cores)");

    auto* run = app.add_subcommand("run", "Run one experiment from a config file");
    std::string config_path;
    locmix::RunOptions run_options;
    bool no_plots = false;
    run->add_option("config", config_path, "INI config file")->required();
    run->add_option("--out", run_options.out_dir, "Output directory");
    run->add_flag("--no-plots", no_plots, "Skip SVG output");

    auto* check = app.add_subcommand("check", "Run the acceptance suite");
    locmix::AcceptanceOptions check_options;
    std::string report_path;
    check->add_flag("--strict", check_options.strict, "Tighten every tolerance 10x");
    check->add_option("--seed", check_options.seed, "Base seed for all processes");
    check->add_option("--only", check_options.only, "Run only these criterion ids")->check(CLI::Range(1, 11));
    check->add_option("--report", report_path, "Write a JSON report to this path ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    locmix::set_thread_limit(threads);
    try {
        if (*run) {
            run_options.plots = !no_plots;
            return run_command(config_path, run_options);
        }
        return check_command(check_options, report_path);
    } catch (const locmix::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const locmix::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
}
