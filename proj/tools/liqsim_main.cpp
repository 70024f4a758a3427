#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "liqsim/liqsim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

int run_simulate_hawkes(double base, double sigma, double kappa, double horizon,
                        std::uint64_t seed, const std::string& out_path, bool allow_unstable) {
    liqsim::HawkesParams params{base, sigma, kappa};
    const liqsim::EventStream stream =
        liqsim::simulate_hawkes(params, horizon, liqsim::RngSeed{seed, 0}, allow_unstable);
    if (out_path.empty()) {
        liqsim::write_event_stream_csv(stream, std::cout);
    } else {
        liqsim::write_event_stream_csv(stream, out_path);
    }
    return kExitOk;
}

int run_solve(const std::string& config_path, const std::string& out_dir, int threads) {
    const std::vector<liqsim::ScenarioConfig> configs = liqsim::parse_config(config_path);
    std::filesystem::create_directories(out_dir);
    bool any_failed = false;
    for (const liqsim::ScenarioConfig& sc : configs) {
        bool solved = false;
        try {
            const liqsim::ScenarioSolution solution = liqsim::solve_scenario(sc, threads);
            solved = true;
            const std::string path = out_dir + "/" + sc.label + ".policy.json";
            liqsim::write_policy_json(solution, path);
            std::cout << sc.label << ": revenue " << solution.report.revenue << " (se "
                      << solution.report.revenue_se << "), policy written to " << path << '\n';
        } catch (const std::exception& e) {
            if (solved) {
                throw; // writing the policy failed: an I/O error, not a solver one
            }
            any_failed = true;
            std::cerr << sc.label << ": failed: " << e.what() << '\n';
        }
    }
    return any_failed ? kExitNumerical : kExitOk;
}

int run_table(const std::string& config_path, const std::string& out_path,
              const std::string& format, const std::string& sort, int threads) {
    const std::vector<liqsim::ScenarioConfig> configs = liqsim::parse_config(config_path);
    std::vector<liqsim::SimReport> reports = liqsim::run_batch(configs, threads);
    liqsim::sort_reports(reports, sort == "panel" ? liqsim::ReportSort::panel
                                                  : liqsim::ReportSort::label);
    liqsim::write_report(reports, out_path,
                         format == "json" ? liqsim::ReportFormat::json
                                          : liqsim::ReportFormat::csv);
    bool any_failed = false;
    for (const liqsim::SimReport& r : reports) {
        if (r.failed()) {
            any_failed = true;
            std::cerr << r.label << ": failed: " << r.error << '\n';
        }
    }
    std::cout << "wrote " << reports.size() << " reports to " << out_path << '\n';
    return any_failed ? kExitNumerical : kExitOk;
}

int run_calibrate(const std::string& events_path, const std::string& init_spec) {
    liqsim::HawkesParams init{1.0, 0.0, 1.0};
    if (!init_spec.empty()) {
        std::stringstream ss(init_spec);
        std::string item;
        std::vector<double> vals;
        while (std::getline(ss, item, ',')) {
            vals.push_back(std::stod(item));
        }
        if (vals.size() != 3) {
            throw liqsim::config_error("--init expects base,sigma,kappa");
        }
        init = {vals[0], vals[1], vals[2]};
    }
    const liqsim::EventStream stream = liqsim::read_event_stream_csv(events_path);
    const liqsim::FitResult fit = liqsim::fit_mle(stream, init);
    std::cout << "base=" << fit.params.base << '\n'
              << "sigma=" << fit.params.excitation << '\n'
              << "kappa=" << fit.params.decay << '\n'
              << "loglik=" << fit.loglik << '\n'
              << "iterations=" << fit.iterations << '\n'
              << "converged=" << (fit.converged ? "true" : "false") << '\n';
    if (!fit.converged) {
        std::cerr << "warning: iteration cap reached; reporting best parameters found\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal liquidation toolkit: Hawkes order flow, PDMP dynamics, "
                 "quantized dynamic programming"};
    app.require_subcommand(1);

    double base = 1.0, sigma = 0.0, kappa = 1.0, horizon = 100.0;
    std::uint64_t seed = 1;
    std::string out_path;
    bool allow_unstable = false;
    auto* sim = app.add_subcommand("simulate-hawkes", "Simulate a Hawkes event stream to CSV");
    sim->add_option("--base", base, "Base intensity lambda0")->required();
    sim->add_option("--sigma", sigma, "Excitation magnitude")->required();
    sim->add_option("--kappa", kappa, "Kernel decay rate")->required();
    sim->add_option("--horizon", horizon, "Simulation horizon")->required();
    sim->add_option("--seed", seed, "RNG seed")->required();
    sim->add_option("--out", out_path, "Output CSV path (stdout when omitted)");
    sim->add_flag("--allow-unstable", allow_unstable, "Permit excitation >= kappa");

    std::string config_path;
    std::string solve_out = ".";
    int threads = 1;
    auto* solve = app.add_subcommand("solve", "Solve scenarios and write policy/value JSON");
    solve->add_option("--config", config_path, "Scenario configuration file")->required();
    solve->add_option("--out", solve_out, "Output directory");
    solve->add_option("--threads", threads, "Worker threads");

    std::string table_out;
    std::string format = "csv";
    std::string sort = "label";
    auto* table = app.add_subcommand("table", "Run a batch and write the scenario report table");
    table->add_option("--config", config_path, "Scenario configuration file")->required();
    table->add_option("--out", table_out, "Report output path")->required();
    table->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    table->add_option("--sort", sort, "panel or label")->check(CLI::IsMember({"panel", "label"}));
    table->add_option("--threads", threads, "Worker threads");

    std::string events_path;
    std::string init_spec;
    auto* calibrate = app.add_subcommand("calibrate", "Fit Hawkes parameters to an event CSV");
    calibrate->add_option("--events", events_path, "Event stream CSV")->required();
    calibrate->add_option("--init", init_spec, "Initial guess base,sigma,kappa");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (sim->parsed()) {
            return run_simulate_hawkes(base, sigma, kappa, horizon, seed, out_path,
                                       allow_unstable);
        }
        if (solve->parsed()) {
            return run_solve(config_path, solve_out, threads);
        }
        if (table->parsed()) {
            return run_table(config_path, table_out, format, sort, threads);
        }
        if (calibrate->parsed()) {
            return run_calibrate(events_path, init_spec);
        }
    } catch (const liqsim::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::runtime_error& e) {
        const std::string what = e.what();
        if (what.find("cannot open") != std::string::npos ||
            what.find("failed while writing") != std::string::npos) {
            std::cerr << "io error: " << what << '\n';
            return kExitIo;
        }
        std::cerr << "numerical failure: " << what << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}
