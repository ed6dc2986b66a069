#pragma once

#include <cstdint>
#include <vector>

#include "allocsim/core.hpp"

namespace allocsim {

struct RequestRecord {
    std::uint64_t id = 0;
    int user = 1;
    double arrival = 0.0;
    ResourceVector demand;
    double hold = 0.0;
    OutcomeKind outcome = OutcomeKind::Rejected;
    int center = 0;      // 1-based id, 0 when rejected
    double start = 0.0;  // meaningful for accepted/delayed outcomes only
    RejectReason reason = RejectReason::None;
};

// Per-user slice of one finalized time block.
struct UserBlockRecord {
    ResourceVector requested;  // total demand that arrived in the block
    ResourceVector allocated;  // total demand of allocations started in the block
    int rejected = 0;
    ResourceType key = ResourceType::Bandwidth;
    double normalized_alloc = 0.0;  // allocated key amount times the user weight
    double imbalance = 0.0;         // gap to the top user, zero if no rejections
};

struct BlockRecord {
    int index = 0;  // 1-based
    double begin = 0.0;
    double end = 0.0;
    std::vector<UserBlockRecord> users;
};

// Aggregate in-use amount across all centers, sampled after every change.
struct UtilizationSample {
    double time = 0.0;
    ResourceVector in_use;
};

struct Trace {
    std::vector<RequestRecord> requests;  // ordered by request id
    std::vector<BlockRecord> blocks;      // complete blocks only, in order
    std::vector<UtilizationSample> samples;
    ResourceVector total_capacity;
    double end_time = 0.0;
    double block_length = 0.0;
    double warmup_fraction = 0.0;
    int user_count = 0;
    std::vector<double> weights;  // per-user normalization weights r_g

    // Statistics ignore everything before this instant.
    double measurement_start() const noexcept { return warmup_fraction * end_time; }
};

}  // namespace allocsim
