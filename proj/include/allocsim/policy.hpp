#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "allocsim/core.hpp"
#include "allocsim/rng.hpp"

namespace allocsim {

// Per-scenario denominators that make processing and bandwidth demands
// comparable: the smallest positive per-center capacity of each type.
// Computed once per scenario; capacities never change mid-run.
struct NormalizationBasis {
    double cpu_floor = 1.0;
    double bw_floor = 1.0;

    static NormalizationBasis from_capacities(std::span<const ResourceVector> capacities) {
        NormalizationBasis basis;
        double cpu = std::numeric_limits<double>::infinity();
        double bw = std::numeric_limits<double>::infinity();
        for (const auto& cap : capacities) {
            if (cap.cpu > 0.0 && cap.cpu < cpu) {
                cpu = cap.cpu;
            }
            if (cap.bw > 0.0 && cap.bw < bw) {
                bw = cap.bw;
            }
        }
        // Centers with a zero component never host demand of that type, so
        // they do not contribute a denominator.
        if (cpu != std::numeric_limits<double>::infinity()) {
            basis.cpu_floor = cpu;
        }
        if (bw != std::numeric_limits<double>::infinity()) {
            basis.bw_floor = bw;
        }
        return basis;
    }
};

// The type whose capacity-normalized share of the demand is larger.
// Ties go to bandwidth (strict comparison, else-branch).
inline ResourceType identified_resource(const ResourceVector& demand, const NormalizationBasis& basis) {
    const double cpu_share = demand.cpu / basis.cpu_floor;
    const double bw_share = demand.bw / basis.bw_floor;
    return cpu_share > bw_share ? ResourceType::Processing : ResourceType::Bandwidth;
}

// Best-fit on the identified resource: among centers whose availability
// covers the demand, pick the one with the least available amount of that
// type. Equal candidates are resolved uniformly at random; the rng is only
// consumed when a tie actually occurs.
inline std::optional<std::size_t> select_best_fit(std::span<const ResourceVector> available,
                                                  const ResourceVector& demand,
                                                  const NormalizationBasis& basis, Rng& rng) {
    const ResourceType key = identified_resource(demand, basis);
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < available.size(); ++i) {
        if (!available[i].covers(demand)) {
            continue;
        }
        const double amount = component(available[i], key);
        if (amount < best) {
            best = amount;
            tied.assign(1, i);
        } else if (amount == best) {
            tied.push_back(i);
        }
    }
    if (tied.empty()) {
        return std::nullopt;
    }
    if (tied.size() == 1) {
        return tied.front();
    }
    return tied[static_cast<std::size_t>(rng.below(tied.size()))];
}

struct RoundRobinCursor {
    std::size_t next_first_check = 0;
};

// Round-robin probing: check centers starting at the cursor, wrapping, at
// most one full cycle; take the first that fits. The cursor advances by
// exactly one per request no matter which center (if any) was chosen.
inline std::optional<std::size_t> select_round_robin(std::span<const ResourceVector> available,
                                                     const ResourceVector& demand,
                                                     RoundRobinCursor& cursor) {
    const std::size_t k = available.size();
    if (k == 0) {
        return std::nullopt;
    }
    const std::size_t first = cursor.next_first_check % k;
    cursor.next_first_check = (first + 1) % k;
    for (std::size_t probe = 0; probe < k; ++probe) {
        const std::size_t i = (first + probe) % k;
        if (available[i].covers(demand)) {
            return i;
        }
    }
    return std::nullopt;
}

namespace detail {

inline std::vector<ResourceVector> availability_of(std::span<const Center> centers) {
    std::vector<ResourceVector> out;
    out.reserve(centers.size());
    for (const auto& center : centers) {
        out.push_back(center.available());
    }
    return out;
}

}  // namespace detail

inline std::optional<std::size_t> select_best_fit(std::span<const Center> centers,
                                                  const ResourceVector& demand,
                                                  const NormalizationBasis& basis, Rng& rng) {
    const auto available = detail::availability_of(centers);
    return select_best_fit(std::span<const ResourceVector>(available), demand, basis, rng);
}

inline std::optional<std::size_t> select_round_robin(std::span<const Center> centers,
                                                     const ResourceVector& demand,
                                                     RoundRobinCursor& cursor) {
    const auto available = detail::availability_of(centers);
    return select_round_robin(std::span<const ResourceVector>(available), demand, cursor);
}

}  // namespace allocsim
