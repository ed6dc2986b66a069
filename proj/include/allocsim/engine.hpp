#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "allocsim/core.hpp"
#include "allocsim/metrics.hpp"
#include "allocsim/policy.hpp"
#include "allocsim/rng.hpp"
#include "allocsim/scenario.hpp"
#include "allocsim/timeline.hpp"
#include "allocsim/trace.hpp"
#include "allocsim/workload.hpp"

namespace allocsim {

// What one user accumulated inside the current time block.
struct UserBlockTotals {
    ResourceVector requested;
    ResourceVector allocated;
    int rejected = 0;
};

struct BlockOutcome {
    ResourceType key = ResourceType::Bandwidth;
    double normalized_alloc = 0.0;  // V: allocated key amount times the user weight
    double imbalance = 0.0;         // N: gap to the best-served user
};

// Closes one block: picks each user's key resource from the requested totals,
// weights the allocated key amount, and measures everyone's gap to the
// best-served user. A user with no rejections in the block was not treated
// unfairly, so that gap is zeroed.
inline std::vector<BlockOutcome> finalize_block(std::span<const UserBlockTotals> totals,
                                                std::span<const double> weights,
                                                const ResourceVector& total_capacity) {
    if (totals.size() != weights.size()) {
        throw std::invalid_argument("finalize_block: totals and weights must align");
    }
    std::vector<BlockOutcome> out(totals.size());
    for (std::size_t g = 0; g < totals.size(); ++g) {
        out[g].key = key_resource_of(totals[g].requested, total_capacity);
        out[g].normalized_alloc = component(totals[g].allocated, out[g].key) * weights[g];
    }
    if (out.empty()) {
        return out;
    }
    std::size_t top = 0;
    for (std::size_t g = 1; g < out.size(); ++g) {
        if (out[g].normalized_alloc > out[top].normalized_alloc) {
            top = g;
        }
    }
    for (std::size_t g = 0; g < out.size(); ++g) {
        out[g].imbalance = g == top ? 0.0 : out[top].normalized_alloc - out[g].normalized_alloc;
        if (totals[g].rejected == 0) {
            out[g].imbalance = 0.0;
        }
    }
    return out;
}

struct RunOptions {
    // Re-derive every center's usage from the live-allocation table after
    // each event and compare exactly. Meant for tests with binary-exact
    // demand values.
    bool validate_state = false;
};

namespace detail {

class Simulation {
public:
    Simulation(const ScenarioConfig& config, std::vector<Request> requests, RunOptions options)
        : config_(config),
          requests_(std::move(requests)),
          options_(options),
          total_capacity_(config.total_capacity()),
          tie_rng_(substream(config.seed, 0x7e11)) {
        centers_.reserve(config_.centers.size());
        timelines_.reserve(config_.centers.size());
        for (std::size_t i = 0; i < config_.centers.size(); ++i) {
            centers_.emplace_back(static_cast<int>(i + 1), config_.centers[i]);
            timelines_.emplace_back(config_.centers[i]);
        }
        basis_ = NormalizationBasis::from_capacities(config_.centers);
        weights_ = derive_weights(config_.users, config_.block_length, total_capacity_);
        const std::size_t users = config_.users.size();
        block_totals_.assign(users, UserBlockTotals{});
        fill_.assign(users, ResourceVector{});
        fill_target_.assign(users, 0.0);

        trace_.total_capacity = total_capacity_;
        trace_.block_length = config_.block_length;
        trace_.warmup_fraction = config_.warmup_fraction;
        trace_.user_count = static_cast<int>(users);
        trace_.weights = weights_;
    }

    Trace run() && {
        if (requests_.empty()) {
            return std::move(trace_);
        }
        trace_.requests.reserve(requests_.size());
        for (std::size_t i = 0; i < requests_.size(); ++i) {
            push(requests_[i].arrival, EventKind::Arrival, i);
        }
        push(config_.block_length, EventKind::BlockBoundary, 1);

        while (!queue_.empty()) {
            const Event event = queue_.top();
            queue_.pop();
            if (event.kind != EventKind::BlockBoundary) {
                --substantive_;
            }
            clock_ = event.time;
            switch (event.kind) {
                case EventKind::Release:
                    handle_release(event.payload);
                    break;
                case EventKind::BlockBoundary:
                    handle_block_boundary(static_cast<int>(event.payload));
                    break;
                case EventKind::DelayedStart:
                    handle_delayed_start(event.payload);
                    break;
                case EventKind::Arrival:
                    handle_arrival(requests_[event.payload]);
                    break;
            }
            if (options_.validate_state) {
                check_conservation();
            }
        }
        trace_.end_time = clock_;
        return std::move(trace_);
    }

private:
    // Same-time ordering: releases free capacity first, then the block
    // closes on a settled state, then reserved starts fire, then arrivals
    // compete for what is left.
    enum class EventKind : int { Release = 0, BlockBoundary = 1, DelayedStart = 2, Arrival = 3 };

    struct Event {
        double time = 0.0;
        EventKind kind = EventKind::Arrival;
        std::uint64_t seq = 0;
        std::uint64_t payload = 0;  // request index/id, or block index
    };

    struct LaterEvent {
        bool operator()(const Event& a, const Event& b) const noexcept {
            if (a.time != b.time) {
                return a.time > b.time;
            }
            if (a.kind != b.kind) {
                return static_cast<int>(a.kind) > static_cast<int>(b.kind);
            }
            return a.seq > b.seq;
        }
    };

    struct LiveAllocation {
        std::size_t center = 0;
        ResourceVector demand;
    };

    struct DelayedReservation {
        std::size_t center = 0;
        ResourceVector demand;
        double start = 0.0;
        double release = 0.0;
        int user = 1;
    };

    void push(double time, EventKind kind, std::uint64_t payload) {
        queue_.push(Event{time, kind, next_seq_++, payload});
        if (kind != EventKind::BlockBoundary) {
            ++substantive_;
        }
    }

    void handle_arrival(const Request& request) {
        auto& totals = block_totals_[static_cast<std::size_t>(request.user - 1)];
        totals.requested += request.demand;

        std::optional<std::size_t> choice;
        switch (config_.policy) {
            case PolicyKind::RoundRobin:
                choice = select_round_robin(std::span<const Center>(centers_), request.demand, cursor_);
                break;
            case PolicyKind::BestFit:
                choice = select_best_fit(std::span<const Center>(centers_), request.demand, basis_, tie_rng_);
                break;
            case PolicyKind::FairBestFit: {
                // A reservation may already hold future capacity, so immediate
                // admission must clear the whole holding interval.
                std::vector<ResourceVector> effective;
                effective.reserve(timelines_.size());
                for (const auto& timeline : timelines_) {
                    effective.push_back(timeline.min_free(clock_, clock_ + request.hold));
                }
                choice = select_best_fit(std::span<const ResourceVector>(effective), request.demand,
                                         basis_, tie_rng_);
                break;
            }
        }

        if (choice) {
            start_allocation(*choice, request, totals);
            record(request, AllocationOutcome::accepted(centers_[*choice].id(), clock_));
            return;
        }
        if (config_.policy != PolicyKind::FairBestFit) {
            ++totals.rejected;
            record(request, AllocationOutcome::rejected(RejectReason::NoFeasibleCenter));
            return;
        }
        try_delayed_allocation(request, totals);
    }

    void start_allocation(std::size_t center, const Request& request, UserBlockTotals& totals) {
        centers_[center].allocate(request.demand);
        timelines_[center].commit(clock_, clock_ + request.hold, request.demand);
        live_.emplace(request.id, LiveAllocation{center, request.demand});
        push(clock_ + request.hold, EventKind::Release, request.id);
        totals.allocated += request.demand;
        aggregate_in_use_ += request.demand;
        sample();
    }

    // Delayed path: only a user still owed resources from the previous block
    // may reserve a future slot, and only while this block's fill budget
    // lasts. The slot must complete within the deadline.
    void try_delayed_allocation(const Request& request, UserBlockTotals& totals) {
        const std::size_t g = static_cast<std::size_t>(request.user - 1);
        const auto reject = [&](RejectReason reason) {
            ++totals.rejected;
            record(request, AllocationOutcome::rejected(reason));
        };

        const double target = fill_target_[g];
        if (!(target > 0.0) || fill_[g].cpu > target || fill_[g].bw > target) {
            reject(RejectReason::FillExhausted);
            return;
        }
        const double latest_start = request.arrival + config_.max_completion - request.hold;
        if (latest_start < clock_) {
            reject(RejectReason::DeadlineExceeded);
            return;
        }

        double best_start = 0.0;
        std::vector<std::size_t> tied;
        for (std::size_t i = 0; i < timelines_.size(); ++i) {
            const auto start = timelines_[i].earliest_fit(request.demand, request.hold, clock_, latest_start);
            if (!start) {
                continue;
            }
            if (tied.empty() || *start < best_start) {
                best_start = *start;
                tied.assign(1, i);
            } else if (*start == best_start) {
                tied.push_back(i);
            }
        }
        if (tied.empty()) {
            reject(RejectReason::DeadlineExceeded);
            return;
        }

        std::size_t chosen = tied.front();
        if (tied.size() > 1) {
            // Same start at several centers: fall back to the best-fit rule
            // at that instant, residual ties at random.
            const ResourceType key = identified_resource(request.demand, basis_);
            double least = component(timelines_[tied.front()].free_at(best_start), key);
            std::vector<std::size_t> argmin{tied.front()};
            for (std::size_t idx = 1; idx < tied.size(); ++idx) {
                const double amount = component(timelines_[tied[idx]].free_at(best_start), key);
                if (amount < least) {
                    least = amount;
                    argmin.assign(1, tied[idx]);
                } else if (amount == least) {
                    argmin.push_back(tied[idx]);
                }
            }
            chosen = argmin.size() == 1
                         ? argmin.front()
                         : argmin[static_cast<std::size_t>(tie_rng_.below(argmin.size()))];
        }

        timelines_[chosen].commit(best_start, best_start + request.hold, request.demand);
        reserved_.emplace(request.id, DelayedReservation{chosen, request.demand, best_start,
                                                         best_start + request.hold, request.user});
        fill_[g] += request.demand;
        push(best_start, EventKind::DelayedStart, request.id);
        record(request, AllocationOutcome::delayed(centers_[chosen].id(), best_start));
    }

    void handle_delayed_start(std::uint64_t request_id) {
        const auto it = reserved_.find(request_id);
        if (it == reserved_.end()) {
            throw allocation_error("delayed start for unknown request " + std::to_string(request_id));
        }
        const DelayedReservation reservation = it->second;
        reserved_.erase(it);

        centers_[reservation.center].allocate(reservation.demand);
        live_.emplace(request_id, LiveAllocation{reservation.center, reservation.demand});
        push(reservation.release, EventKind::Release, request_id);
        // The allocation counts toward the block in which service starts.
        block_totals_[static_cast<std::size_t>(reservation.user - 1)].allocated += reservation.demand;
        aggregate_in_use_ += reservation.demand;
        sample();
    }

    void handle_release(std::uint64_t request_id) {
        const auto it = live_.find(request_id);
        if (it == live_.end()) {
            throw allocation_error("release for unknown request " + std::to_string(request_id));
        }
        centers_[it->second.center].release(it->second.demand);
        aggregate_in_use_ -= it->second.demand;
        timelines_[it->second.center].forget_before(clock_);
        live_.erase(it);
        sample();
    }

    void handle_block_boundary(int block) {
        const auto outcomes =
            finalize_block(block_totals_, weights_, total_capacity_);

        BlockRecord closed;
        closed.index = block;
        closed.begin = (block - 1) * config_.block_length;
        closed.end = block * config_.block_length;
        closed.users.reserve(outcomes.size());
        for (std::size_t g = 0; g < outcomes.size(); ++g) {
            closed.users.push_back(UserBlockRecord{block_totals_[g].requested, block_totals_[g].allocated,
                                                   block_totals_[g].rejected, outcomes[g].key,
                                                   outcomes[g].normalized_alloc, outcomes[g].imbalance});
        }
        trace_.blocks.push_back(std::move(closed));

        // The coming block may repair this block's imbalance, up to N/r per
        // user; older budgets do not carry over.
        for (std::size_t g = 0; g < outcomes.size(); ++g) {
            fill_target_[g] = weights_[g] > 0.0 ? outcomes[g].imbalance / weights_[g] : 0.0;
            fill_[g] = ResourceVector{};
            block_totals_[g] = UserBlockTotals{};
        }
        for (auto& timeline : timelines_) {
            timeline.forget_before(clock_);
        }
        if (substantive_ > 0) {
            push((block + 1) * config_.block_length, EventKind::BlockBoundary,
                 static_cast<std::uint64_t>(block) + 1);
        }
    }

    void sample() { trace_.samples.push_back(UtilizationSample{clock_, aggregate_in_use_}); }

    void record(const Request& request, const AllocationOutcome& outcome) {
        trace_.requests.push_back(RequestRecord{request.id, request.user, request.arrival,
                                                request.demand, request.hold, outcome.kind,
                                                outcome.center, outcome.start, outcome.reason});
    }

    void check_conservation() const {
        std::vector<ResourceVector> sums(centers_.size());
        for (const auto& [id, alloc] : live_) {
            sums[alloc.center] += alloc.demand;
        }
        for (std::size_t i = 0; i < centers_.size(); ++i) {
            const auto& center = centers_[i];
            if (!(sums[i] == center.in_use())) {
                throw allocation_error("conservation violated at center " + std::to_string(center.id()));
            }
            if (!center.in_use().non_negative() || !center.capacity().covers(center.in_use())) {
                throw allocation_error("usage out of bounds at center " + std::to_string(center.id()));
            }
            if (!(center.capacity() - timelines_[i].free_at(clock_) == center.in_use())) {
                throw allocation_error("timeline out of sync at center " + std::to_string(center.id()));
            }
        }
    }

    const ScenarioConfig& config_;
    std::vector<Request> requests_;
    RunOptions options_;
    ResourceVector total_capacity_;
    Rng tie_rng_;
    std::vector<Center> centers_;
    std::vector<AvailabilityTimeline> timelines_;
    NormalizationBasis basis_;
    RoundRobinCursor cursor_;
    std::vector<double> weights_;

    std::priority_queue<Event, std::vector<Event>, LaterEvent> queue_;
    std::uint64_t next_seq_ = 0;
    std::size_t substantive_ = 0;  // queued events other than block boundaries
    double clock_ = 0.0;

    std::vector<UserBlockTotals> block_totals_;
    std::vector<ResourceVector> fill_;   // delayed fills admitted this block
    std::vector<double> fill_target_;    // per-user fill budget for this block
    std::unordered_map<std::uint64_t, LiveAllocation> live_;
    std::unordered_map<std::uint64_t, DelayedReservation> reserved_;
    ResourceVector aggregate_in_use_;
    Trace trace_;
};

inline void validate_requests(const ScenarioConfig& config, const std::vector<Request>& requests) {
    const int users = static_cast<int>(config.users.size());
    for (std::size_t i = 0; i < requests.size(); ++i) {
        const auto& request = requests[i];
        if (request.user < 1 || request.user > users) {
            throw std::invalid_argument("request user index out of range");
        }
        if (!request.demand.non_negative() || !(request.demand.cpu > 0.0 || request.demand.bw > 0.0)) {
            throw std::invalid_argument("request demand must be non-negative with a positive component");
        }
        if (!(request.hold > 0.0)) {
            throw std::invalid_argument("request holding time must be positive");
        }
        if (i > 0) {
            if (requests[i].arrival < requests[i - 1].arrival) {
                throw std::invalid_argument("requests must be ordered by arrival time");
            }
            if (requests[i].id <= requests[i - 1].id) {
                throw std::invalid_argument("request ids must strictly increase in arrival order");
            }
        }
    }
}

}  // namespace detail

// Runs the scenario on an explicit, arrival-ordered request sequence.
inline Trace run_simulation(const ScenarioConfig& config, std::vector<Request> requests,
                            RunOptions options = {}) {
    validate_or_throw(config);
    detail::validate_requests(config, requests);
    return detail::Simulation(config, std::move(requests), options).run();
}

// Runs the scenario on requests drawn from its user workloads.
inline Trace run_simulation(const ScenarioConfig& config, RunOptions options = {}) {
    validate_or_throw(config);
    auto requests = generate_requests(config.users, config.seed, config.horizon_requests);
    return detail::Simulation(config, std::move(requests), options).run();
}

}  // namespace allocsim
