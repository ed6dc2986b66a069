// Command-line front end: run one scenario, sweep an axis, or validate a
// configuration file. Exit codes: 0 success, 1 configuration problem,
// 2 runtime failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "allocsim/allocsim.hpp"

namespace {

void print_metrics(const allocsim::ScenarioConfig& config, const allocsim::RunMetrics& metrics) {
    std::printf("scenario:          %s\n", config.name.c_str());
    std::printf("method:            %s\n", allocsim::to_string(config.policy));
    std::printf("seed:              %llu\n", static_cast<unsigned long long>(config.seed));
    std::printf("loss probability:  %.6g\n", metrics.loss);
    std::printf("avg utilization:   %.6g\n", metrics.utilization);
    std::printf("fairness F:        %.6g\n", metrics.fairness);
    std::printf("fairness F1:       %.6g\n", metrics.fairness_change);
    for (std::size_t g = 0; g < metrics.ratios.size(); ++g) {
        std::printf("ratio user %zu:      %.6g\n", g + 1, metrics.ratios[g]);
    }
}

int run_simulate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 const std::string& out_path) {
    allocsim::ScenarioConfig config = allocsim::load_config(config_path);
    if (seed) {
        config.seed = *seed;
    }
    const allocsim::Trace trace = allocsim::run_simulation(config);
    const allocsim::RunMetrics metrics = allocsim::evaluate_trace(trace);
    print_metrics(config, metrics);

    if (!out_path.empty()) {
        allocsim::SweepRow row;
        row.scenario = config.name;
        row.method = allocsim::to_string(config.policy);
        row.axis = "none";
        row.axis_value = 0.0;
        row.replications = 1;
        row.loss_mean = metrics.loss;
        row.util_mean = metrics.utilization;
        row.f_mean = metrics.fairness;
        row.f1_mean = metrics.fairness_change;
        row.ratio_mean = metrics.ratios;
        allocsim::emit_csv({row}, out_path);
    }
    return 0;
}

int run_sweep_command(const std::string& spec_path, int jobs, const std::string& out_path) {
    const allocsim::SweepSpec spec = allocsim::load_sweep(spec_path);
    const allocsim::SweepResult result = allocsim::run_sweep(spec, jobs);
    for (const auto& failure : result.failures) {
        std::cerr << "point failed: " << failure << "\n";
    }
    if (result.rows.empty()) {
        std::cerr << "no sweep point produced results\n";
        return 1;
    }
    if (out_path.empty()) {
        std::cout << allocsim::to_csv(result.rows);
    } else {
        allocsim::emit_csv(result.rows, out_path);
        std::cout << "wrote " << result.rows.size() << " rows to " << out_path << "\n";
    }
    return 0;
}

int run_validate(const std::string& config_path) {
    const allocsim::ScenarioConfig config = allocsim::load_config(config_path);
    std::cout << config.name << ": OK (" << config.centers.size() << " centers, "
              << config.users.size() << " users, " << allocsim::to_string(config.policy) << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-event simulator for joint processing/bandwidth allocation across centers"};
    app.require_subcommand(1);

    std::string config_path;
    std::string spec_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    int jobs = 1;

    CLI::App* simulate = app.add_subcommand("simulate", "Run one scenario and report its metrics");
    simulate->add_option("--config", config_path, "Scenario JSON file")->required();
    simulate->add_option("--seed", seed, "Override the scenario seed");
    simulate->add_option("--out", out_path, "Write a one-row CSV result table");

    CLI::App* sweep = app.add_subcommand("sweep", "Run an axis sweep and emit a CSV table");
    sweep->add_option("--spec", spec_path, "Sweep specification JSON file")->required();
    sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    sweep->add_option("--out", out_path, "Output CSV path (stdout when omitted)");

    CLI::App* validate = app.add_subcommand("validate", "Check a scenario file and exit");
    validate->add_option("--config", config_path, "Scenario JSON file")->required();

    try {
        app.parse(argc, argv);
        if (simulate->parsed()) {
            return run_simulate(config_path, seed, out_path);
        }
        if (sweep->parsed()) {
            return run_sweep_command(spec_path, jobs, out_path);
        }
        return run_validate(config_path);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const allocsim::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
