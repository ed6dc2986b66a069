#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "allocsim/scenario.hpp"
#include "allocsim/workload.hpp"

namespace allocsim {

namespace detail {

using json = nlohmann::json;

inline json require_field(const json& object, const std::string& key, const std::string& where) {
    if (!object.is_object() || !object.contains(key)) {
        throw config_error(where + "." + key + ": missing required field");
    }
    return object.at(key);
}

inline double require_number(const json& object, const std::string& key, const std::string& where) {
    const json value = require_field(object, key, where);
    if (!value.is_number()) {
        throw config_error(where + "." + key + ": expected a number");
    }
    return value.get<double>();
}

inline double number_or(const json& object, const std::string& key, double fallback) {
    if (!object.is_object() || !object.contains(key)) {
        return fallback;
    }
    return object.at(key).get<double>();
}

inline UserWorkload parse_user(const json& node, const std::string& where) {
    UserWorkload user;
    const json pattern = require_field(node, "pattern", where);
    if (!pattern.is_string()) {
        throw config_error(where + ".pattern: expected a pattern string");
    }
    try {
        user.pattern = parse_pattern(pattern.get<std::string>());
    } catch (const pattern_error& e) {
        throw config_error(where + ".pattern: " + e.what());
    }
    user.mean_interarrival = require_number(node, "mean_interarrival", where);
    user.hold = require_number(node, "hold", where);
    if (node.contains("jitter")) {
        const json jitter = node.at("jitter");
        const std::string mode = jitter.is_string()
                                     ? jitter.get<std::string>()
                                     : require_field(jitter, "mode", where + ".jitter").get<std::string>();
        if (mode == "deterministic") {
            user.jitter = JitterMode::Deterministic;
        } else if (mode == "gaussian") {
            user.jitter = JitterMode::Gaussian;
            if (jitter.is_object()) {
                user.sigma_ratio = number_or(jitter, "sigma_ratio", user.sigma_ratio);
            }
        } else {
            throw config_error(where + ".jitter: expected \"deterministic\" or \"gaussian\"");
        }
    }
    return user;
}

inline ScenarioConfig parse_scenario(const json& node, const std::string& where) {
    ScenarioConfig config;
    if (!node.is_object()) {
        throw config_error(where + ": expected an object");
    }
    if (node.contains("name")) {
        config.name = node.at("name").get<std::string>();
    }

    const json method = require_field(node, "method", where);
    if (!method.is_string()) {
        throw config_error(where + ".method: expected a string");
    }
    const auto policy = parse_policy(method.get<std::string>());
    if (!policy) {
        throw config_error(where + ".method: expected \"method1\", \"method2\" or \"method3\"");
    }
    config.policy = *policy;

    const json centers = require_field(node, "centers", where);
    if (!centers.is_array()) {
        throw config_error(where + ".centers: expected an array");
    }
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const std::string center_where = where + ".centers[" + std::to_string(i) + "]";
        config.centers.push_back(ResourceVector{require_number(centers.at(i), "cpu", center_where),
                                                require_number(centers.at(i), "bw", center_where)});
    }

    const json users = require_field(node, "users", where);
    if (!users.is_array()) {
        throw config_error(where + ".users: expected an array");
    }
    for (std::size_t g = 0; g < users.size(); ++g) {
        config.users.push_back(parse_user(users.at(g), where + ".users[" + std::to_string(g) + "]"));
    }

    config.block_length = require_number(node, "block_length", where);
    config.max_completion = number_or(node, "max_completion", 0.0);
    if (node.contains("seed")) {
        config.seed = node.at("seed").get<std::uint64_t>();
    }
    if (node.contains("horizon_requests")) {
        config.horizon_requests = node.at("horizon_requests").get<std::uint64_t>();
    }
    config.warmup_fraction = number_or(node, "warmup_fraction", config.warmup_fraction);
    return config;
}

inline json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw config_error(path + ": cannot open file");
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw config_error(path + ": " + e.what());
    }
}

}  // namespace detail

// Loads and validates one scenario from a JSON file.
inline ScenarioConfig load_config(const std::string& path) {
    ScenarioConfig config;
    try {
        config = detail::parse_scenario(detail::parse_file(path), "$");
    } catch (const config_error&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw config_error(path + ": " + e.what());
    }
    validate_or_throw(config);
    return config;
}

}  // namespace allocsim
