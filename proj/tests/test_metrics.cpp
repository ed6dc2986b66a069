#include <catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

#include "allocsim/engine.hpp"
#include "allocsim/metrics.hpp"

using namespace allocsim;

namespace {

Trace trace_with_outcomes(int accepted, int rejected) {
    Trace trace;
    trace.end_time = 100.0;
    trace.warmup_fraction = 0.0;
    trace.user_count = 1;
    std::uint64_t id = 0;
    for (int i = 0; i < accepted; ++i) {
        RequestRecord r;
        r.id = ++id;
        r.arrival = static_cast<double>(i);
        r.outcome = OutcomeKind::Accepted;
        trace.requests.push_back(r);
    }
    for (int i = 0; i < rejected; ++i) {
        RequestRecord r;
        r.id = ++id;
        r.arrival = static_cast<double>(i);
        r.outcome = OutcomeKind::Rejected;
        trace.requests.push_back(r);
    }
    return trace;
}

}  // namespace

TEST_CASE("loss probability is the rejected fraction") {
    CHECK(loss_probability(trace_with_outcomes(93, 7)) == 0.07);
    CHECK(loss_probability(trace_with_outcomes(50, 0)) == 0.0);
    CHECK_THROWS_AS(loss_probability(Trace{}), std::invalid_argument);
}

TEST_CASE("loss probability matches a hand-counted saturation trace") {
    // one center (10,10), H=6, a saturating demand arriving every time unit:
    // only the arrivals at t=0 and t=6 find the center empty
    ScenarioConfig cfg;
    cfg.centers = {ResourceVector{10, 10}};
    UserWorkload u;
    u.pattern = parse_pattern("{C=10, N=10}");
    u.mean_interarrival = 1.0;
    u.hold = 6.0;
    cfg.users = {u};
    cfg.block_length = 12.0;
    cfg.warmup_fraction = 0.0;

    std::vector<Request> requests;
    for (int i = 0; i < 10; ++i) {
        requests.push_back(Request{static_cast<std::uint64_t>(i + 1), 1, static_cast<double>(i),
                                   ResourceVector{10, 10}, 6.0});
    }
    const auto trace = run_simulation(cfg, requests);
    int accepted = 0;
    for (const auto& r : trace.requests) {
        if (r.outcome == OutcomeKind::Accepted) {
            ++accepted;
        }
    }
    CHECK(accepted == 2);
    CHECK(loss_probability(trace) == 0.8);
}

TEST_CASE("utilization averages both resource shares over time") {
    Trace trace;
    trace.total_capacity = ResourceVector{20, 20};
    trace.end_time = 10.0;
    trace.warmup_fraction = 0.0;

    SECTION("idle system") {
        CHECK(avg_utilization(trace) == 0.0);
    }

    SECTION("full occupancy for the whole window") {
        trace.total_capacity = ResourceVector{10, 10};
        trace.samples = {{0.0, ResourceVector{10, 10}}, {10.0, ResourceVector{0, 0}}};
        CHECK(avg_utilization(trace) == 1.0);
    }

    SECTION("a (4,1) allocation held for half the window") {
        trace.samples = {{0.0, ResourceVector{4, 1}}, {5.0, ResourceVector{0, 0}}};
        // 1/2 * (4/20 + 1/20) * 0.5 = 0.0625
        CHECK(avg_utilization(trace) == 0.0625);
    }

    SECTION("warm-up trims the leading samples") {
        trace.warmup_fraction = 0.5;
        trace.samples = {{0.0, ResourceVector{20, 20}}, {5.0, ResourceVector{0, 0}}};
        CHECK(avg_utilization(trace) == 0.0);
    }
}

TEST_CASE("key resource is the largest capacity share of the request totals") {
    const ResourceVector capacity{40, 40};
    CHECK(key_resource_of(ResourceVector{30, 10}, capacity) == ResourceType::Processing);
    CHECK(key_resource_of(ResourceVector{10, 30}, capacity) == ResourceType::Bandwidth);
    CHECK(key_resource_of(ResourceVector{10, 10}, capacity) == ResourceType::Bandwidth);
    CHECK_THROWS_AS(key_resource_of(ResourceVector{1, 1}, ResourceVector{0, 40}),
                    std::invalid_argument);
}

TEST_CASE("fairness F averages the per-block imbalance sums") {
    CHECK(fairness_F({{0.0, 0.0}, {0.0, 0.0}}) == 0.0);
    CHECK(fairness_F({{0.0, 4.0}, {0.0, 2.0}}) == 3.0);
    CHECK(fairness_F({{0.0, 5.0, 7.0}}) == 12.0);
}

TEST_CASE("fairness F1 measures the spread around each user's mean") {
    CHECK(fairness_F1({{0.0, 3.0}, {0.0, 3.0}, {0.0, 3.0}}) == 0.0);
    CHECK(fairness_F1({{0.0, 4.0}, {0.0, 2.0}}) == 1.0);
    CHECK(fairness_F1({{0.0, 5.0, 7.0}}) == 0.0);
}

TEST_CASE("fairness measures are non-negative and permutation invariant") {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        ImbalanceMatrix n;
        const std::size_t blocks = 1 + rng.below(6);
        const std::size_t users = 1 + rng.below(4);
        bool all_zero = true;
        for (std::size_t j = 0; j < blocks; ++j) {
            std::vector<double> row;
            for (std::size_t g = 0; g < users; ++g) {
                const double v = static_cast<double>(rng.below(8));
                row.push_back(v);
                all_zero = all_zero && v == 0.0;
            }
            n.push_back(row);
        }
        const double f = fairness_F(n);
        const double f1 = fairness_F1(n);
        REQUIRE(f >= 0.0);
        REQUIRE(f1 >= 0.0);
        REQUIRE((f == 0.0) == all_zero);

        auto shuffled = n;
        for (std::size_t j = shuffled.size(); j > 1; --j) {
            std::swap(shuffled[j - 1], shuffled[rng.below(j)]);
        }
        REQUIRE(fairness_F(shuffled) == f);
        REQUIRE(fairness_F1(shuffled) == Catch::Approx(f1).epsilon(1e-12));
    }
}

TEST_CASE("a run without rejections is perfectly fair") {
    ScenarioConfig cfg;
    cfg.policy = PolicyKind::BestFit;
    cfg.centers = {ResourceVector{200, 200}, ResourceVector{200, 200}};
    UserWorkload u;
    u.pattern = parse_pattern("{C=2, N=3}");
    u.mean_interarrival = 1.0;
    u.hold = 6.0;
    UserWorkload v = u;
    v.pattern = parse_pattern("{C=6, N=4}");
    cfg.users = {u, v};
    cfg.block_length = 12.0;
    cfg.horizon_requests = 5000;
    cfg.seed = 17;

    const auto trace = run_simulation(cfg);
    for (const auto& r : trace.requests) {
        REQUIRE(r.outcome == OutcomeKind::Accepted);
    }
    const auto report = fairness_report(trace);
    CHECK(report.f == 0.0);
    CHECK(report.f1 == 0.0);
}

TEST_CASE("allocation ratios come from the measured blocks") {
    SECTION("a single user owns the whole share") {
        ScenarioConfig cfg;
        cfg.centers = {ResourceVector{20, 20}};
        UserWorkload u;
        u.pattern = parse_pattern("{C=2, N=2}");
        u.mean_interarrival = 1.0;
        u.hold = 6.0;
        cfg.users = {u};
        cfg.block_length = 12.0;
        cfg.horizon_requests = 2000;
        const auto ratios = allocation_ratio(run_simulation(cfg));
        REQUIRE(ratios.size() == 1);
        CHECK(ratios[0] == 1.0);
    }

    SECTION("identical users split evenly in the long run") {
        ScenarioConfig cfg;
        cfg.policy = PolicyKind::BestFit;
        cfg.centers = {ResourceVector{20, 20}, ResourceVector{20, 20}};
        UserWorkload u;
        u.pattern = parse_pattern("{C=3, N=3}");
        u.mean_interarrival = 1.5;
        u.hold = 6.0;
        cfg.users = {u, u};
        cfg.block_length = 12.0;
        cfg.horizon_requests = 100000;
        cfg.seed = 23;
        const auto ratios = allocation_ratio(run_simulation(cfg));
        REQUIRE(ratios.size() == 2);
        CHECK(ratios[0] == Catch::Approx(0.5).margin(0.02));
        CHECK(ratios[1] == Catch::Approx(0.5).margin(0.02));
        CHECK(ratios[0] + ratios[1] == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("accepted demand reconciles with the block ledger") {
    ScenarioConfig cfg;
    cfg.policy = PolicyKind::BestFit;
    cfg.centers = {ResourceVector{20, 20}, ResourceVector{20, 20}};
    UserWorkload u;
    u.pattern = parse_pattern("{C=4, N=1; C=1, N=4}");
    u.mean_interarrival = 0.5;
    u.hold = 6.0;
    cfg.users = {u};
    cfg.block_length = 12.0;
    cfg.horizon_requests = 20000;
    cfg.seed = 5;

    const auto trace = run_simulation(cfg);
    REQUIRE_FALSE(trace.blocks.empty());
    const double finalized_until = trace.blocks.back().end;

    ResourceVector from_records;
    for (const auto& r : trace.requests) {
        if (r.outcome != OutcomeKind::Rejected && r.start < finalized_until) {
            from_records += r.demand;
        }
    }
    ResourceVector from_blocks;
    for (const auto& block : trace.blocks) {
        for (const auto& user : block.users) {
            from_blocks += user.allocated;
        }
    }
    CHECK(from_records == from_blocks);
}
