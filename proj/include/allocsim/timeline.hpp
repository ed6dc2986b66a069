#pragma once

#include <limits>
#include <map>
#include <optional>
#include <stdexcept>

#include "allocsim/core.hpp"

namespace allocsim {

// Committed free capacity of one center as a step function over time.
// Breakpoints exist only where a commitment starts or ends, so the function
// covers current allocations, their scheduled releases, and reserved future
// starts in one structure. Queries are only meaningful at or after the
// current simulation time; forget_before() folds the past into the baseline.
class AvailabilityTimeline {
public:
    explicit AvailabilityTimeline(ResourceVector capacity) : capacity_(capacity) {
        steps_[-std::numeric_limits<double>::infinity()] = capacity;
    }

    const ResourceVector& capacity() const noexcept { return capacity_; }

    ResourceVector free_at(double t) const {
        return std::prev(steps_.upper_bound(t))->second;
    }

    // Componentwise minimum of free capacity over [from, to).
    ResourceVector min_free(double from, double to) const {
        auto it = std::prev(steps_.upper_bound(from));
        ResourceVector lowest = it->second;
        for (++it; it != steps_.end() && it->first < to; ++it) {
            lowest = min(lowest, it->second);
        }
        return lowest;
    }

    // Reserves `demand` over [start, end). The caller must have verified
    // feasibility; going negative means the engine double-booked.
    void commit(double start, double end, const ResourceVector& demand) {
        if (!(end > start)) {
            throw std::invalid_argument("commit interval must have positive length");
        }
        split_at(start);
        split_at(end);
        for (auto it = steps_.lower_bound(start); it != steps_.end() && it->first < end; ++it) {
            it->second -= demand;
            if (!it->second.non_negative()) {
                throw allocation_error("timeline commit exceeds free capacity");
            }
        }
    }

    // Earliest start in [not_before, latest_start] from which `demand` stays
    // within free capacity for a full holding interval. Free capacity only
    // improves at breakpoints, so those are the only candidate starts.
    std::optional<double> earliest_fit(const ResourceVector& demand, double hold,
                                       double not_before, double latest_start) const {
        if (not_before > latest_start) {
            return std::nullopt;
        }
        double candidate = not_before;
        for (;;) {
            if (min_free(candidate, candidate + hold).covers(demand)) {
                return candidate;
            }
            const auto next = steps_.upper_bound(candidate);
            if (next == steps_.end() || next->first > latest_start) {
                return std::nullopt;
            }
            candidate = next->first;
        }
    }

    // Folds all segments strictly before `t` into the baseline. History is
    // no longer queryable past this point.
    void forget_before(double t) {
        auto keep = std::prev(steps_.upper_bound(t));
        if (keep == steps_.begin()) {
            return;
        }
        const ResourceVector value = keep->second;
        steps_.erase(steps_.begin(), std::next(keep));
        steps_[-std::numeric_limits<double>::infinity()] = value;
    }

    std::size_t breakpoint_count() const noexcept { return steps_.size(); }

private:
    void split_at(double t) {
        const auto it = std::prev(steps_.upper_bound(t));
        if (it->first != t) {
            steps_.emplace(t, it->second);
        }
    }

    std::map<double, ResourceVector> steps_;
    ResourceVector capacity_;
};

}  // namespace allocsim
