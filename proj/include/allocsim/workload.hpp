#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "allocsim/core.hpp"
#include "allocsim/metrics.hpp"
#include "allocsim/rng.hpp"

namespace allocsim {

class pattern_error : public std::runtime_error {
public:
    pattern_error(const std::string& message, std::size_t position)
        : std::runtime_error(message + " (at offset " + std::to_string(position) + ")"),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_ = 0;
};

struct PatternEntry {
    double cpu_mean = 0.0;
    double bw_mean = 0.0;
};

// The repeating demand sequence of one user, e.g. "{C=4, N=1; C=1, N=4}".
struct PatternSpec {
    std::vector<PatternEntry> entries;
};

enum class JitterMode { Deterministic, Gaussian };

struct UserWorkload {
    PatternSpec pattern;
    double mean_interarrival = 1.0;  // q
    double hold = 1.0;               // H
    JitterMode jitter = JitterMode::Deterministic;
    double sigma_ratio = 0.1;        // Gaussian sigma as a fraction of the mean
};

// Parses "{C=a1, N=b1; C=a2, N=b2; ...}". Whitespace is insignificant.
inline PatternSpec parse_pattern(std::string_view text) {
    std::size_t pos = 0;
    const auto skip_ws = [&] {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) {
            ++pos;
        }
    };
    const auto expect = [&](char c) {
        skip_ws();
        if (pos >= text.size() || text[pos] != c) {
            throw pattern_error(std::string("expected '") + c + "'", pos);
        }
        ++pos;
    };
    const auto number = [&]() -> double {
        skip_ws();
        const std::size_t start = pos;
        while (pos < text.size() &&
               (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.' ||
                text[pos] == '-' || text[pos] == '+' || text[pos] == 'e' || text[pos] == 'E')) {
            ++pos;
        }
        if (pos == start) {
            throw pattern_error("expected a number", pos);
        }
        try {
            std::size_t used = 0;
            const double v = std::stod(std::string(text.substr(start, pos - start)), &used);
            if (used != pos - start) {
                throw pattern_error("malformed number", start);
            }
            return v;
        } catch (const pattern_error&) {
            throw;
        } catch (const std::exception&) {
            throw pattern_error("malformed number", start);
        }
    };

    PatternSpec spec;
    expect('{');
    for (;;) {
        expect('C');
        expect('=');
        const std::size_t cpu_pos = pos;
        const double cpu = number();
        expect(',');
        expect('N');
        expect('=');
        const std::size_t bw_pos = pos;
        const double bw = number();
        if (!(cpu > 0.0)) {
            throw pattern_error("demand mean must be positive", cpu_pos);
        }
        if (!(bw > 0.0)) {
            throw pattern_error("demand mean must be positive", bw_pos);
        }
        spec.entries.push_back(PatternEntry{cpu, bw});
        skip_ws();
        if (pos < text.size() && text[pos] == ';') {
            ++pos;
            continue;
        }
        break;
    }
    expect('}');
    skip_ws();
    if (pos != text.size()) {
        throw pattern_error("trailing characters after pattern", pos);
    }
    return spec;
}

inline std::string format_pattern(const PatternSpec& spec) {
    std::string out = "{";
    for (std::size_t i = 0; i < spec.entries.size(); ++i) {
        if (i > 0) {
            out += "; ";
        }
        out += "C=" + std::to_string(spec.entries[i].cpu_mean) +
               ", N=" + std::to_string(spec.entries[i].bw_mean);
    }
    out += "}";
    return out;
}

// Draws one user's requests: exponential inter-arrivals with mean q, demands
// cycling through the pattern, constant holding time. The stream is a pure
// function of (workload, user index, scenario seed).
class RequestStream {
public:
    RequestStream(const UserWorkload& workload, int user, std::uint64_t scenario_seed)
        : workload_(workload),
          user_(user),
          rng_(substream(scenario_seed, static_cast<std::uint64_t>(user))) {
        if (workload_.pattern.entries.empty()) {
            throw std::invalid_argument("workload pattern must have at least one entry");
        }
    }

    // Next request; the caller stamps ids in merged arrival order.
    Request next() {
        clock_ += rng_.exponential(workload_.mean_interarrival);
        const PatternEntry& entry = workload_.pattern.entries[cursor_];
        cursor_ = (cursor_ + 1) % workload_.pattern.entries.size();
        ResourceVector demand{entry.cpu_mean, entry.bw_mean};
        if (workload_.jitter == JitterMode::Gaussian) {
            demand.cpu = truncated_normal(entry.cpu_mean);
            demand.bw = truncated_normal(entry.bw_mean);
        }
        return Request{0, user_, clock_, demand, workload_.hold};
    }

private:
    // Normal(mean, sigma_ratio * mean) redrawn until inside (0, 4 * mean].
    double truncated_normal(double mean) {
        const double sigma = workload_.sigma_ratio * mean;
        if (sigma == 0.0) {
            return mean;
        }
        for (;;) {
            const double v = rng_.normal(mean, sigma);
            if (v > 0.0 && v <= 4.0 * mean) {
                return v;
            }
        }
    }

    UserWorkload workload_;
    int user_ = 1;
    Rng rng_;
    std::size_t cursor_ = 0;
    double clock_ = 0.0;
};

// Merges the per-user streams into one id-stamped arrival sequence. User g is
// the 1-based position in `workloads`.
inline std::vector<Request> generate_requests(const std::vector<UserWorkload>& workloads,
                                              std::uint64_t seed, std::uint64_t count) {
    std::vector<RequestStream> streams;
    streams.reserve(workloads.size());
    for (std::size_t g = 0; g < workloads.size(); ++g) {
        streams.emplace_back(workloads[g], static_cast<int>(g + 1), seed);
    }

    struct Head {
        Request request;
        std::size_t stream;
    };
    const auto later = [](const Head& a, const Head& b) {
        if (a.request.arrival != b.request.arrival) {
            return a.request.arrival > b.request.arrival;
        }
        return a.stream > b.stream;
    };
    std::priority_queue<Head, std::vector<Head>, decltype(later)> heads(later);
    for (std::size_t g = 0; g < streams.size(); ++g) {
        heads.push(Head{streams[g].next(), g});
    }

    std::vector<Request> out;
    out.reserve(count);
    while (out.size() < count && !heads.empty()) {
        Head head = heads.top();
        heads.pop();
        head.request.id = out.size() + 1;
        out.push_back(head.request);
        heads.push(Head{streams[head.stream].next(), head.stream});
    }
    return out;
}

// Expected totals requested by one user over a block of length L:
// L/q arrivals, each at the mean of the pattern entries.
inline ResourceVector expected_block_demand(const UserWorkload& workload, double block_length) {
    if (!(block_length > 0.0)) {
        throw std::invalid_argument("block length must be positive");
    }
    if (workload.pattern.entries.empty()) {
        throw std::invalid_argument("workload pattern must have at least one entry");
    }
    ResourceVector mean;
    for (const auto& entry : workload.pattern.entries) {
        mean += ResourceVector{entry.cpu_mean, entry.bw_mean};
    }
    const double m = static_cast<double>(workload.pattern.entries.size());
    const double arrivals = block_length / workload.mean_interarrival;
    return ResourceVector{arrivals * mean.cpu / m, arrivals * mean.bw / m};
}

// Normalization weights r_g. Each user's key-type expected block total is
// compared; the smallest-demand user gets r = 1 and heavier users get
// proportionally smaller weights, so weighted allocations are comparable.
inline std::vector<double> derive_weights(const std::vector<UserWorkload>& workloads,
                                          double block_length,
                                          const ResourceVector& total_capacity) {
    if (workloads.empty()) {
        throw std::invalid_argument("derive_weights requires at least one workload");
    }
    std::vector<double> expectation(workloads.size(), 0.0);
    for (std::size_t g = 0; g < workloads.size(); ++g) {
        const ResourceVector expected = expected_block_demand(workloads[g], block_length);
        const ResourceType key = key_resource_of(expected, total_capacity);
        expectation[g] = component(expected, key);
        if (!(expectation[g] > 0.0)) {
            throw std::invalid_argument("expected key-resource demand must be positive for user " +
                                        std::to_string(g + 1));
        }
    }
    double least = expectation.front();
    for (double e : expectation) {
        least = std::min(least, e);
    }
    std::vector<double> weights(workloads.size(), 0.0);
    for (std::size_t g = 0; g < workloads.size(); ++g) {
        weights[g] = least / expectation[g];
    }
    return weights;
}

}  // namespace allocsim
