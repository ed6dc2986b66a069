#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "allocsim/core.hpp"
#include "allocsim/trace.hpp"

namespace allocsim {

// Imbalance matrix: one row per time block, one column per user.
using ImbalanceMatrix = std::vector<std::vector<double>>;

struct FairnessReport {
    double f = 0.0;
    double f1 = 0.0;
    ImbalanceMatrix imbalance;       // s blocks x G users
    std::vector<double> average;     // per-user mean imbalance over the blocks
};

// The type whose requested total is the largest fraction of that type's
// capacity. Ties go to bandwidth, mirroring identified_resource.
inline ResourceType key_resource_of(const ResourceVector& requested, const ResourceVector& capacity) {
    if (capacity.cpu <= 0.0 || capacity.bw <= 0.0) {
        throw std::invalid_argument("key_resource_of requires positive capacities");
    }
    return requested.cpu / capacity.cpu > requested.bw / capacity.bw ? ResourceType::Processing
                                                                     : ResourceType::Bandwidth;
}

// F: mean over blocks of the per-block imbalance sum. Smaller is fairer.
inline double fairness_F(const ImbalanceMatrix& n) {
    if (n.empty()) {
        return 0.0;
    }
    double total = 0.0;
    for (const auto& row : n) {
        for (double v : row) {
            total += v;
        }
    }
    return total / static_cast<double>(n.size());
}

// F1: mean over blocks of the per-user squared deviation from that user's
// mean imbalance. Discriminates between allocations with equal F.
inline double fairness_F1(const ImbalanceMatrix& n) {
    if (n.empty() || n.front().empty()) {
        return 0.0;
    }
    const std::size_t blocks = n.size();
    const std::size_t users = n.front().size();
    std::vector<double> mean(users, 0.0);
    for (const auto& row : n) {
        for (std::size_t g = 0; g < users; ++g) {
            mean[g] += row[g];
        }
    }
    for (double& m : mean) {
        m /= static_cast<double>(blocks);
    }
    double total = 0.0;
    for (const auto& row : n) {
        for (std::size_t g = 0; g < users; ++g) {
            const double d = row[g] - mean[g];
            total += d * d;
        }
    }
    return total / static_cast<double>(blocks);
}

namespace detail {

// Blocks fully inside the measurement window.
inline std::vector<const BlockRecord*> measured_blocks(const Trace& trace) {
    std::vector<const BlockRecord*> out;
    const double cutoff = trace.measurement_start();
    for (const auto& block : trace.blocks) {
        if (block.begin >= cutoff) {
            out.push_back(&block);
        }
    }
    return out;
}

}  // namespace detail

// Fraction of post-warmup requests that were finally rejected. A delayed
// allocation is served, so it does not count as lost.
inline double loss_probability(const Trace& trace) {
    const double cutoff = trace.measurement_start();
    std::size_t total = 0;
    std::size_t lost = 0;
    for (const auto& record : trace.requests) {
        if (record.arrival < cutoff) {
            continue;
        }
        ++total;
        if (record.outcome == OutcomeKind::Rejected) {
            ++lost;
        }
    }
    if (total == 0) {
        throw std::invalid_argument("loss_probability: no requests in the measurement window");
    }
    return static_cast<double>(lost) / static_cast<double>(total);
}

// Fraction of post-warmup requests that were served late.
inline double delayed_fraction(const Trace& trace) {
    const double cutoff = trace.measurement_start();
    std::size_t total = 0;
    std::size_t delayed = 0;
    for (const auto& record : trace.requests) {
        if (record.arrival < cutoff) {
            continue;
        }
        ++total;
        if (record.outcome == OutcomeKind::DelayedAccepted) {
            ++delayed;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(delayed) / static_cast<double>(total);
}

// Time-weighted mean of the usage of both types, averaged over the
// measurement window: 1/2 (sum in_use.cpu / sum cap.cpu + same for bw).
inline double avg_utilization(const Trace& trace) {
    const double cutoff = trace.measurement_start();
    const double end = trace.end_time;
    if (!(end > cutoff)) {
        return 0.0;  // nothing ever ran
    }

    const auto usage_ratio = [&trace](const ResourceVector& in_use) {
        double r = 0.0;
        if (trace.total_capacity.cpu > 0.0) {
            r += in_use.cpu / trace.total_capacity.cpu;
        }
        if (trace.total_capacity.bw > 0.0) {
            r += in_use.bw / trace.total_capacity.bw;
        }
        return 0.5 * r;
    };

    // Samples form a step function; several samples can share a time stamp,
    // in which case the last one is current.
    double integral = 0.0;
    double seg_start = cutoff;
    ResourceVector current;  // zero before the first sample
    for (const auto& sample : trace.samples) {
        if (sample.time <= cutoff) {
            current = sample.in_use;
            continue;
        }
        if (sample.time >= end) {
            break;
        }
        if (sample.time > seg_start) {
            integral += usage_ratio(current) * (sample.time - seg_start);
            seg_start = sample.time;
        }
        current = sample.in_use;
    }
    integral += usage_ratio(current) * (end - seg_start);
    return integral / (end - cutoff);
}

// Imbalance matrix over the measured blocks.
inline ImbalanceMatrix imbalance_matrix(const Trace& trace) {
    ImbalanceMatrix n;
    for (const BlockRecord* block : detail::measured_blocks(trace)) {
        std::vector<double> row;
        row.reserve(block->users.size());
        for (const auto& user : block->users) {
            row.push_back(user.imbalance);
        }
        n.push_back(std::move(row));
    }
    return n;
}

inline FairnessReport fairness_report(const Trace& trace) {
    FairnessReport report;
    report.imbalance = imbalance_matrix(trace);
    report.f = fairness_F(report.imbalance);
    report.f1 = fairness_F1(report.imbalance);
    if (!report.imbalance.empty()) {
        const std::size_t users = report.imbalance.front().size();
        report.average.assign(users, 0.0);
        for (const auto& row : report.imbalance) {
            for (std::size_t g = 0; g < users; ++g) {
                report.average[g] += row[g];
            }
        }
        for (double& m : report.average) {
            m /= static_cast<double>(report.imbalance.size());
        }
    }
    return report;
}

// Per-user share of the key resource allocated over the measured blocks.
// Shares sum to 1 when anything was allocated, and are all zero otherwise.
inline std::vector<double> allocation_ratio(const Trace& trace) {
    std::vector<double> amount(static_cast<std::size_t>(trace.user_count), 0.0);
    for (const BlockRecord* block : detail::measured_blocks(trace)) {
        for (std::size_t g = 0; g < block->users.size() && g < amount.size(); ++g) {
            const auto& user = block->users[g];
            amount[g] += component(user.allocated, user.key);
        }
    }
    double total = 0.0;
    for (double a : amount) {
        total += a;
    }
    if (total > 0.0) {
        for (double& a : amount) {
            a /= total;
        }
    }
    return amount;
}

}  // namespace allocsim
