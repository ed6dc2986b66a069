#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "allocsim/core.hpp"
#include "allocsim/workload.hpp"

namespace allocsim {

// Center-selection policies exposed to configuration files.
enum class PolicyKind {
    RoundRobin,   // "method1": cycle through centers in fixed order
    BestFit,      // "method2": best-fit on the identified resource
    FairBestFit,  // "method3": best-fit plus delayed fill-up of imbalances
};

inline std::optional<PolicyKind> parse_policy(const std::string& name) {
    if (name == "method1") {
        return PolicyKind::RoundRobin;
    }
    if (name == "method2") {
        return PolicyKind::BestFit;
    }
    if (name == "method3") {
        return PolicyKind::FairBestFit;
    }
    return std::nullopt;
}

inline const char* to_string(PolicyKind policy) noexcept {
    switch (policy) {
        case PolicyKind::RoundRobin:
            return "method1";
        case PolicyKind::BestFit:
            return "method2";
        case PolicyKind::FairBestFit:
            return "method3";
    }
    return "unknown";
}

class config_error : public std::runtime_error {
public:
    explicit config_error(std::vector<std::string> issues)
        : std::runtime_error(join(issues)), issues_(std::move(issues)) {}

    explicit config_error(std::string issue) : config_error(std::vector<std::string>{std::move(issue)}) {}

    const std::vector<std::string>& issues() const noexcept { return issues_; }

private:
    static std::string join(const std::vector<std::string>& issues) {
        std::string out = "invalid configuration:";
        for (const auto& issue : issues) {
            out += "\n  - " + issue;
        }
        return out;
    }

    std::vector<std::string> issues_;
};

// Full description of one experiment.
struct ScenarioConfig {
    std::string name = "scenario";
    PolicyKind policy = PolicyKind::BestFit;
    std::vector<ResourceVector> centers;
    std::vector<UserWorkload> users;
    double block_length = 0.0;       // fairness accounting window L
    double max_completion = 0.0;     // deadline T for delayed allocations (method3)
    std::uint64_t seed = 1;
    std::uint64_t horizon_requests = 100000;
    double warmup_fraction = 0.1;

    ResourceVector total_capacity() const noexcept {
        ResourceVector total;
        for (const auto& cap : centers) {
            total += cap;
        }
        return total;
    }
};

// Every violated constraint, not just the first.
inline std::vector<std::string> validate(const ScenarioConfig& config) {
    std::vector<std::string> issues;
    const auto finite = [](double v) { return std::isfinite(v); };

    if (config.centers.empty()) {
        issues.push_back("centers: at least one center is required");
    }
    bool any_usable_center = false;
    for (std::size_t i = 0; i < config.centers.size(); ++i) {
        const auto& cap = config.centers[i];
        if (!finite(cap.cpu) || !finite(cap.bw) || !cap.non_negative()) {
            issues.push_back("centers[" + std::to_string(i) + "]: capacities must be finite and non-negative");
        }
        if (cap.cpu > 0.0 && cap.bw > 0.0) {
            any_usable_center = true;
        }
    }
    if (!config.centers.empty() && !any_usable_center) {
        issues.push_back("centers: at least one center needs positive capacity of both types");
    }

    if (config.users.empty()) {
        issues.push_back("users: at least one user is required");
    }
    double max_hold = 0.0;
    for (std::size_t g = 0; g < config.users.size(); ++g) {
        const auto& user = config.users[g];
        const std::string where = "users[" + std::to_string(g) + "]";
        if (user.pattern.entries.empty()) {
            issues.push_back(where + ".pattern: at least one entry is required");
        }
        for (const auto& entry : user.pattern.entries) {
            if (!(entry.cpu_mean > 0.0) || !(entry.bw_mean > 0.0) || !finite(entry.cpu_mean) ||
                !finite(entry.bw_mean)) {
                issues.push_back(where + ".pattern: demand means must be positive and finite");
                break;
            }
        }
        if (!(user.mean_interarrival > 0.0) || !finite(user.mean_interarrival)) {
            issues.push_back(where + ".mean_interarrival: must be positive");
        }
        if (!(user.hold > 0.0) || !finite(user.hold)) {
            issues.push_back(where + ".hold: must be positive");
        }
        if (!(user.sigma_ratio >= 0.0) || !finite(user.sigma_ratio)) {
            issues.push_back(where + ".sigma_ratio: must be non-negative");
        }
        max_hold = std::max(max_hold, user.hold);
    }

    if (!(config.block_length > 0.0) || !finite(config.block_length)) {
        issues.push_back("block_length: must be positive");
    }
    if (!(config.warmup_fraction >= 0.0 && config.warmup_fraction < 1.0)) {
        issues.push_back("warmup_fraction: must be in [0, 1)");
    }
    if (config.policy == PolicyKind::FairBestFit) {
        if (config.block_length > 0.0 && !(config.block_length > max_hold)) {
            issues.push_back("block_length: must exceed every holding time under method3");
        }
        if (!(config.max_completion >= max_hold) || !finite(config.max_completion)) {
            issues.push_back("max_completion: must be at least the longest holding time under method3");
        }
    }
    return issues;
}

inline void validate_or_throw(const ScenarioConfig& config) {
    auto issues = validate(config);
    if (!issues.empty()) {
        throw config_error(std::move(issues));
    }
}

}  // namespace allocsim
