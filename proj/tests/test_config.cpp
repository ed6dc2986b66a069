#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "allocsim/config.hpp"
#include "allocsim/sweep.hpp"

using namespace allocsim;

namespace {

class TempFile {
public:
    TempFile(const std::string& name, const std::string& contents)
        : path_(std::filesystem::temp_directory_path() / name) {
        std::ofstream out(path_);
        out << contents;
    }
    ~TempFile() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    std::string path() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

const char* kAntiphaseScenario = R"({
  "name": "antiphase",
  "method": "method2",
  "centers": [{"cpu": 20, "bw": 20}, {"cpu": 20, "bw": 20}],
  "users": [{"pattern": "{C=4, N=1; C=1, N=4}", "mean_interarrival": 0.45, "hold": 6.0}],
  "block_length": 12.0,
  "seed": 7,
  "horizon_requests": 4000
})";

}  // namespace

TEST_CASE("load_config reads a scenario file") {
    TempFile file("allocsim_test_scenario.json", kAntiphaseScenario);
    const ScenarioConfig cfg = load_config(file.path());
    CHECK(cfg.name == "antiphase");
    CHECK(cfg.policy == PolicyKind::BestFit);
    REQUIRE(cfg.centers.size() == 2);
    CHECK(cfg.centers[0] == ResourceVector{20, 20});
    REQUIRE(cfg.users.size() == 1);
    REQUIRE(cfg.users[0].pattern.entries.size() == 2);
    CHECK(cfg.users[0].pattern.entries[1].bw_mean == 4.0);
    CHECK(cfg.users[0].mean_interarrival == 0.45);
    CHECK(cfg.users[0].jitter == JitterMode::Deterministic);
    CHECK(cfg.seed == 7);
    CHECK(cfg.horizon_requests == 4000);
    CHECK(cfg.warmup_fraction == 0.1);
}

TEST_CASE("load_config rejects a fairness scenario whose block is too short") {
    TempFile file("allocsim_test_short_block.json", R"({
      "method": "method3",
      "centers": [{"cpu": 20, "bw": 20}],
      "users": [{"pattern": "{C=2, N=2}", "mean_interarrival": 1.0, "hold": 6.0}],
      "block_length": 6.0,
      "max_completion": 30.0
    })");
    try {
        load_config(file.path());
        FAIL("expected a config error");
    } catch (const config_error& e) {
        CHECK(std::string(e.what()).find("block_length") != std::string::npos);
    }
}

TEST_CASE("load_config reports missing fields with their path") {
    TempFile file("allocsim_test_missing.json", R"({
      "method": "method2",
      "users": [{"pattern": "{C=2, N=2}", "mean_interarrival": 1.0, "hold": 6.0}],
      "block_length": 12.0
    })");
    try {
        load_config(file.path());
        FAIL("expected a config error");
    } catch (const config_error& e) {
        CHECK(std::string(e.what()).find("$.centers") != std::string::npos);
    }
}

TEST_CASE("load_config surfaces pattern syntax errors") {
    TempFile file("allocsim_test_pattern.json", R"({
      "method": "method2",
      "centers": [{"cpu": 20, "bw": 20}],
      "users": [{"pattern": "{C=2; N=2}", "mean_interarrival": 1.0, "hold": 6.0}],
      "block_length": 12.0
    })");
    try {
        load_config(file.path());
        FAIL("expected a config error");
    } catch (const config_error& e) {
        const std::string what = e.what();
        CHECK(what.find("users[0].pattern") != std::string::npos);
        CHECK(what.find("offset") != std::string::npos);
    }
}

TEST_CASE("gaussian jitter options are parsed") {
    TempFile file("allocsim_test_jitter.json", R"({
      "method": "method2",
      "centers": [{"cpu": 20, "bw": 20}],
      "users": [{"pattern": "{C=2, N=2}", "mean_interarrival": 1.0, "hold": 6.0,
                 "jitter": {"mode": "gaussian", "sigma_ratio": 0.25}}],
      "block_length": 12.0
    })");
    const ScenarioConfig cfg = load_config(file.path());
    CHECK(cfg.users[0].jitter == JitterMode::Gaussian);
    CHECK(cfg.users[0].sigma_ratio == 0.25);
}

TEST_CASE("apply_axis rewrites exactly one knob") {
    ScenarioConfig base;
    base.centers = {ResourceVector{20, 20}, ResourceVector{20, 20}};
    UserWorkload u;
    u.pattern = parse_pattern("{C=2, N=4}");
    u.mean_interarrival = 1.0;
    u.hold = 6.0;
    base.users = {u, u};
    base.block_length = 12.0;

    SECTION("mean_interarrival applies to every user") {
        const auto cfg = apply_axis(base, "mean_interarrival", 0.25);
        CHECK(cfg.users[0].mean_interarrival == 0.25);
        CHECK(cfg.users[1].mean_interarrival == 0.25);
    }

    SECTION("pattern_scale multiplies every entry") {
        const auto cfg = apply_axis(base, "pattern_scale", 2.0);
        CHECK(cfg.users[0].pattern.entries[0].cpu_mean == 4.0);
        CHECK(cfg.users[1].pattern.entries[0].bw_mean == 8.0);
    }

    SECTION("size_ratio rescales later users against the first") {
        const auto cfg = apply_axis(base, "size_ratio", 3.0);
        CHECK(cfg.users[0].pattern.entries[0].cpu_mean == 2.0);
        CHECK(cfg.users[1].pattern.entries[0].cpu_mean == 6.0);
        CHECK(cfg.users[1].pattern.entries[0].bw_mean == 12.0);
    }

    SECTION("center_count clones the first center and holds per-center load") {
        const auto cfg = apply_axis(base, "center_count", 6.0);
        CHECK(cfg.centers.size() == 6);
        CHECK(cfg.centers[5] == ResourceVector{20, 20});
        // base had 2 centers, so arrival intervals shrink by 3x
        CHECK(cfg.users[0].mean_interarrival == Catch::Approx(1.0 / 3.0));
    }

    SECTION("unknown axes are refused") {
        CHECK_THROWS_AS(apply_axis(base, "warp_factor", 9.0), config_error);
    }
}

TEST_CASE("run_sweep aggregates replications per axis value") {
    ScenarioConfig base;
    base.name = "mini";
    base.policy = PolicyKind::BestFit;
    base.centers = {ResourceVector{20, 20}, ResourceVector{20, 20}};
    UserWorkload u;
    u.pattern = parse_pattern("{C=4, N=1; C=1, N=4}");
    u.mean_interarrival = 0.5;
    u.hold = 6.0;
    base.users = {u};
    base.block_length = 12.0;
    base.horizon_requests = 2000;
    base.seed = 9;

    SweepSpec spec;
    spec.base = base;
    spec.axis = "mean_interarrival";
    spec.values = {0.6, 0.5, 0.45, 0.4, 0.35};
    spec.replications = 2;

    const auto result = run_sweep(spec);
    CHECK(result.failures.empty());
    REQUIRE(result.rows.size() == 5);
    for (const auto& row : result.rows) {
        CHECK(row.replications == 2);
        CHECK(row.method == "method2");
        CHECK(row.axis == "mean_interarrival");
        CHECK(row.ratio_mean.size() == 1);
    }
    // heavier load loses more
    CHECK(result.rows.front().loss_mean < result.rows.back().loss_mean);

    SECTION("a failing point is reported and the rest still run") {
        auto bad = spec;
        bad.axis = "center_count";
        bad.values = {2.0, 0.0, 4.0};
        const auto partial = run_sweep(bad);
        REQUIRE(partial.rows.size() == 2);
        REQUIRE(partial.failures.size() == 1);
        CHECK(partial.failures.front().find("center_count=0") != std::string::npos);
    }

    SECTION("points and replications are independent of the worker count") {
        const auto parallel = run_sweep(spec, 4);
        REQUIRE(parallel.rows.size() == result.rows.size());
        CHECK(to_csv(parallel.rows) == to_csv(result.rows));
    }

    SECTION("extending replications never changes the earlier ones") {
        // replication r of any sweep runs with replication_seed(base.seed, r),
        // so a 3-rep mean must equal the mean over those three fixed runs
        auto more = spec;
        more.replications = 3;
        const auto extended = run_sweep(more);

        auto cfg = apply_axis(base, spec.axis, spec.values[0]);
        double losses[3];
        for (int r = 0; r < 3; ++r) {
            cfg.seed = replication_seed(base.seed, static_cast<std::uint64_t>(r));
            losses[r] = loss_probability(run_simulation(cfg));
        }
        CHECK(result.rows[0].loss_mean == (losses[0] + losses[1]) / 2.0);
        CHECK(extended.rows[0].loss_mean == (losses[0] + losses[1] + losses[2]) / 3.0);
    }
}

TEST_CASE("to_csv emits the fixed schema deterministically") {
    SweepRow row;
    row.scenario = "mini";
    row.method = "method2";
    row.axis = "mean_interarrival";
    row.axis_value = 0.5;
    row.replications = 3;
    row.loss_mean = 0.125;
    row.loss_sd = 0.01;
    row.util_mean = 0.75;
    row.util_sd = 0.002;
    row.f_mean = 1.5;
    row.f_sd = 0.25;
    row.f1_mean = 0.75;
    row.f1_sd = 0.1;
    row.ratio_mean = {0.4, 0.6};

    const std::vector<SweepRow> rows(5, row);
    const std::string text = to_csv(rows);

    // header plus five rows
    CHECK(std::count(text.begin(), text.end(), '\n') == 6);
    CHECK(text.rfind("scenario,method,axis,axis_value,replications,loss_prob_mean,loss_prob_sd,"
                     "util_mean,util_sd,F_mean,F_sd,F1_mean,F1_sd,ratio_user_1,ratio_user_2\n",
                     0) == 0);
    CHECK(text.find("mini,method2,mean_interarrival,0.5,3,0.125,0.01,0.75,0.002,1.5,0.25,0.75,0.1,"
                    "0.4,0.6\n") != std::string::npos);
    CHECK(to_csv(rows) == text);

    CHECK_THROWS_AS(to_csv({}), config_error);
}

TEST_CASE("emit_csv writes byte-identical files for identical tables") {
    SweepRow row;
    row.scenario = "x";
    row.method = "method1";
    row.axis = "none";
    row.ratio_mean = {1.0};
    const std::vector<SweepRow> rows{row};

    const auto dir = std::filesystem::temp_directory_path();
    const auto a = dir / "allocsim_csv_a.csv";
    const auto b = dir / "allocsim_csv_b.csv";
    emit_csv(rows, a.string());
    emit_csv(rows, b.string());

    std::ifstream fa(a, std::ios::binary);
    std::ifstream fb(b, std::ios::binary);
    const std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    const std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    CHECK(ca == cb);
    CHECK_FALSE(ca.empty());
    std::filesystem::remove(a);
    std::filesystem::remove(b);
}

TEST_CASE("load_sweep parses the spec envelope") {
    TempFile file("allocsim_test_sweep.json", R"({
      "base": {
        "name": "loadcurve",
        "method": "method1",
        "centers": [{"cpu": 20, "bw": 20}, {"cpu": 20, "bw": 20}],
        "users": [{"pattern": "{C=4, N=1; C=1, N=4}", "mean_interarrival": 0.5, "hold": 6.0}],
        "block_length": 12.0,
        "horizon_requests": 1000
      },
      "axis": "mean_interarrival",
      "values": [0.6, 0.5, 0.4],
      "replications": 4
    })");
    const SweepSpec spec = load_sweep(file.path());
    CHECK(spec.base.name == "loadcurve");
    CHECK(spec.base.policy == PolicyKind::RoundRobin);
    CHECK(spec.axis == "mean_interarrival");
    CHECK(spec.values == std::vector<double>{0.6, 0.5, 0.4});
    CHECK(spec.replications == 4);
}
