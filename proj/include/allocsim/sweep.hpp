#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "allocsim/config.hpp"
#include "allocsim/engine.hpp"
#include "allocsim/metrics.hpp"
#include "allocsim/rng.hpp"
#include "allocsim/scenario.hpp"

namespace allocsim {

// One experiment axis swept over several values, each replicated with
// derived seeds.
struct SweepSpec {
    ScenarioConfig base;
    std::string axis;
    std::vector<double> values;
    int replications = 10;
};

struct RunMetrics {
    double loss = 0.0;
    double utilization = 0.0;
    double fairness = 0.0;
    double fairness_change = 0.0;
    std::vector<double> ratios;
};

struct SweepRow {
    std::string scenario;
    std::string method;
    std::string axis;
    double axis_value = 0.0;
    int replications = 0;
    double loss_mean = 0.0, loss_sd = 0.0;
    double util_mean = 0.0, util_sd = 0.0;
    double f_mean = 0.0, f_sd = 0.0;
    double f1_mean = 0.0, f1_sd = 0.0;
    std::vector<double> ratio_mean;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<std::string> failures;  // per-point problems; the rest of the sweep still ran
};

inline RunMetrics evaluate_trace(const Trace& trace) {
    RunMetrics metrics;
    metrics.loss = loss_probability(trace);
    metrics.utilization = avg_utilization(trace);
    const FairnessReport fairness = fairness_report(trace);
    metrics.fairness = fairness.f;
    metrics.fairness_change = fairness.f1;
    metrics.ratios = allocation_ratio(trace);
    return metrics;
}

// Rewrites the base scenario for one axis value.
inline ScenarioConfig apply_axis(const ScenarioConfig& base, const std::string& axis, double value) {
    ScenarioConfig config = base;
    if (axis == "mean_interarrival") {
        for (auto& user : config.users) {
            user.mean_interarrival = value;
        }
    } else if (axis == "pattern_scale") {
        for (auto& user : config.users) {
            for (auto& entry : user.pattern.entries) {
                entry.cpu_mean *= value;
                entry.bw_mean *= value;
            }
        }
    } else if (axis == "size_ratio") {
        // Every user after the first asks for the first user's demands
        // scaled by the ratio.
        if (config.users.empty()) {
            throw config_error("size_ratio axis requires at least one user");
        }
        for (std::size_t g = 1; g < config.users.size(); ++g) {
            config.users[g].pattern = config.users.front().pattern;
            for (auto& entry : config.users[g].pattern.entries) {
                entry.cpu_mean *= value;
                entry.bw_mean *= value;
            }
        }
    } else if (axis == "center_count") {
        // Clones the first center. Per-center offered load is held fixed:
        // arrival rates scale with the number of centers.
        if (config.centers.empty()) {
            throw config_error("center_count axis requires at least one center");
        }
        const double base_count = static_cast<double>(config.centers.size());
        const auto count = static_cast<std::size_t>(std::llround(value));
        if (count < 1) {
            throw config_error("center_count axis values must be at least 1");
        }
        config.centers.assign(count, config.centers.front());
        for (auto& user : config.users) {
            user.mean_interarrival *= base_count / static_cast<double>(count);
        }
    } else {
        throw config_error("axis: \"" + axis + "\" is not sweepable (use mean_interarrival, "
                           "pattern_scale, size_ratio or center_count)");
    }
    return config;
}

namespace detail {

inline void mean_sd(const std::vector<double>& values, double& mean, double& sd) {
    mean = 0.0;
    for (double v : values) {
        mean += v;
    }
    mean /= static_cast<double>(values.size());
    sd = 0.0;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) {
            ss += (v - mean) * (v - mean);
        }
        sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
}

inline SweepRow aggregate_point(const SweepSpec& spec, double value,
                                const std::vector<RunMetrics>& runs) {
    SweepRow row;
    row.scenario = spec.base.name;
    row.method = to_string(spec.base.policy);
    row.axis = spec.axis;
    row.axis_value = value;
    row.replications = static_cast<int>(runs.size());

    std::vector<double> column(runs.size());
    const auto fill = [&](auto getter, double& mean, double& sd) {
        for (std::size_t i = 0; i < runs.size(); ++i) {
            column[i] = getter(runs[i]);
        }
        mean_sd(column, mean, sd);
    };
    fill([](const RunMetrics& m) { return m.loss; }, row.loss_mean, row.loss_sd);
    fill([](const RunMetrics& m) { return m.utilization; }, row.util_mean, row.util_sd);
    fill([](const RunMetrics& m) { return m.fairness; }, row.f_mean, row.f_sd);
    fill([](const RunMetrics& m) { return m.fairness_change; }, row.f1_mean, row.f1_sd);

    const std::size_t users = runs.empty() ? 0 : runs.front().ratios.size();
    row.ratio_mean.assign(users, 0.0);
    for (const auto& run : runs) {
        for (std::size_t g = 0; g < users; ++g) {
            row.ratio_mean[g] += run.ratios[g];
        }
    }
    for (double& r : row.ratio_mean) {
        r /= static_cast<double>(runs.size());
    }
    return row;
}

}  // namespace detail

// Runs every (axis value, replication) pair and aggregates per value.
// Replications use seeds derived from (base seed, replication index), so
// results are independent of `jobs` and of extending the replication count.
inline SweepResult run_sweep(const SweepSpec& spec, int jobs = 1) {
    if (spec.values.empty()) {
        throw config_error("sweep: values must be nonempty");
    }
    if (spec.replications < 1) {
        throw config_error("sweep: replications must be at least 1");
    }

    struct Task {
        std::size_t point = 0;
        int replication = 0;
    };
    struct Slot {
        std::optional<RunMetrics> metrics;
        std::string error;
    };

    SweepResult result;
    std::vector<ScenarioConfig> configs;
    std::vector<Task> tasks;
    std::vector<std::string> point_errors(spec.values.size());
    for (std::size_t p = 0; p < spec.values.size(); ++p) {
        try {
            ScenarioConfig config = apply_axis(spec.base, spec.axis, spec.values[p]);
            validate_or_throw(config);
            configs.push_back(std::move(config));
            for (int r = 0; r < spec.replications; ++r) {
                tasks.push_back(Task{configs.size() - 1, r});
            }
        } catch (const std::exception& e) {
            point_errors[p] = e.what();
            configs.emplace_back();  // placeholder keeps indices aligned
        }
    }

    std::vector<Slot> slots(tasks.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) {
                return;
            }
            try {
                ScenarioConfig config = configs[tasks[t].point];
                config.seed = replication_seed(spec.base.seed,
                                               static_cast<std::uint64_t>(tasks[t].replication));
                slots[t].metrics = evaluate_trace(run_simulation(config));
            } catch (const std::exception& e) {
                slots[t].error = e.what();
            }
        }
    };

    const int workers = std::max(1, jobs);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
        for (auto& thread : pool) {
            thread.join();
        }
    }

    std::size_t cursor = 0;
    for (std::size_t p = 0; p < spec.values.size(); ++p) {
        const std::string label = spec.axis + "=" + std::to_string(spec.values[p]);
        if (!point_errors[p].empty()) {
            result.failures.push_back(label + ": " + point_errors[p]);
            continue;
        }
        std::vector<RunMetrics> runs;
        std::string error;
        for (int r = 0; r < spec.replications; ++r, ++cursor) {
            if (slots[cursor].metrics) {
                runs.push_back(std::move(*slots[cursor].metrics));
            } else if (error.empty()) {
                error = slots[cursor].error;
            }
        }
        if (!error.empty() || runs.empty()) {
            result.failures.push_back(label + ": " + (error.empty() ? "no runs" : error));
            continue;
        }
        result.rows.push_back(detail::aggregate_point(spec, spec.values[p], runs));
    }
    return result;
}

namespace detail {

inline std::string format_number(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.9g", value);
    return buffer;
}

}  // namespace detail

// CSV for a result table; byte-deterministic for fixed inputs.
inline std::string to_csv(const std::vector<SweepRow>& rows) {
    if (rows.empty()) {
        throw config_error("emit_csv: result table is empty");
    }
    const std::size_t users = rows.front().ratio_mean.size();
    std::string out =
        "scenario,method,axis,axis_value,replications,loss_prob_mean,loss_prob_sd,"
        "util_mean,util_sd,F_mean,F_sd,F1_mean,F1_sd";
    for (std::size_t g = 1; g <= users; ++g) {
        out += ",ratio_user_" + std::to_string(g);
    }
    out += "\n";
    for (const auto& row : rows) {
        out += row.scenario + "," + row.method + "," + row.axis + "," +
               detail::format_number(row.axis_value) + "," + std::to_string(row.replications) + "," +
               detail::format_number(row.loss_mean) + "," + detail::format_number(row.loss_sd) + "," +
               detail::format_number(row.util_mean) + "," + detail::format_number(row.util_sd) + "," +
               detail::format_number(row.f_mean) + "," + detail::format_number(row.f_sd) + "," +
               detail::format_number(row.f1_mean) + "," + detail::format_number(row.f1_sd);
        for (std::size_t g = 0; g < users; ++g) {
            out += ",";
            out += g < row.ratio_mean.size() ? detail::format_number(row.ratio_mean[g]) : "0";
        }
        out += "\n";
    }
    return out;
}

inline void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    const std::string text = to_csv(rows);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error(path + ": cannot open for writing");
    }
    out << text;
    if (!out) {
        throw std::runtime_error(path + ": write failed");
    }
}

// Loads a sweep specification: {"base": {...}, "axis": "...", "values": [...],
// "replications": N}.
inline SweepSpec load_sweep(const std::string& path) {
    const auto node = detail::parse_file(path);
    SweepSpec spec;
    try {
        spec.base = detail::parse_scenario(detail::require_field(node, "base", "$"), "$.base");
        const auto axis = detail::require_field(node, "axis", "$");
        if (!axis.is_string()) {
            throw config_error("$.axis: expected a string");
        }
        spec.axis = axis.get<std::string>();
        const auto values = detail::require_field(node, "values", "$");
        if (!values.is_array() || values.empty()) {
            throw config_error("$.values: expected a nonempty array of numbers");
        }
        for (const auto& v : values) {
            spec.values.push_back(v.get<double>());
        }
        if (node.contains("replications")) {
            spec.replications = node.at("replications").get<int>();
        }
    } catch (const config_error&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw config_error(path + ": " + e.what());
    }
    validate_or_throw(spec.base);
    return spec;
}

}  // namespace allocsim
