// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace rcomp;
using namespace rcomp::test;

namespace {

ExperimentSpec small_p1(const std::string& scenario = "fig3") {
    ExperimentSpec s = preset(scenario);
    s.trials = 2;
    s.noise_grid = {1.0, 0.01};
    return s;
}

ExperimentSpec small_table1(std::uint64_t seed) {
    ExperimentSpec s = preset("table1");
    s.trials = 1;
    s.seed = seed;
    s.max_outer = 3;
    return s;
}

std::string p1_csv(const ExperimentSpec& s) {
    std::ostringstream os;
    write_p1_csv(os, run_p1_sweep(s));
    return os.str();
}

}  // namespace

TEST_CASE("one-trial P1 sweep CSV is bit-identical across runs", "[experiments]") {
    ExperimentSpec s = small_p1();
    s.trials = 1;
    const std::string a = p1_csv(s);
    s.threads = 3;
    CHECK(p1_csv(s) == a);
    CHECK(a.rfind("noise_var,snr_db,", 0) == 0);
    s.seed = 2;
    CHECK(p1_csv(s) != a);
}

TEST_CASE("P1 sweep values are in range", "[experiments]") {
    const P1SweepResult res = run_p1_sweep(small_p1());
    REQUIRE(res.rows.size() == 2);
    CHECK(res.monotone);
    for (const auto& r : res.rows) {
        CHECK(r.robust_sum_amse > 0.0);
        CHECK(r.robust_sum_amse <= 4.0);
        CHECK(r.naive_sum_amse > 0.0);
        CHECK(r.naive_sum_amse <= 4.0);
        CHECK((r.robust_powers.array() >= 0.0).all());
        CHECK((r.naive_powers.array() >= 0.0).all());
        CHECK(std::isfinite(r.snr_db));
    }
    CHECK(res.rows[1].snr_db > res.rows[0].snr_db);
    CHECK(res.kkt.size() == 4);
}

TEST_CASE("presets and their invariants", "[experiments]") {
    for (const char* name : {"fig3", "fig4", "p2-fixture", "table1"}) {
        const ExperimentSpec s = preset(name);
        CHECK_NOTHROW(s.validate());
    }
    const ExperimentSpec f3 = preset("fig3");
    CHECK(f3.trials == 100);
    CHECK(f3.noise_grid.size() == 8);
    CHECK(f3.power_cap == 2.0);
    CHECK(f3.corr.rho(0, 0) == 0.25);
    CHECK(f3.corr.rho(1, 3) == 0.15);
    CHECK(f3.corr.error_var(1, 3) == 0.04);
    const ExperimentSpec f4 = preset("fig4");
    CHECK(((f4.corr.rho - f3.corr.rho).array() >= 0.0).all());
    CHECK((f4.corr.rho - f3.corr.rho).maxCoeff() > 0.0);
    const ExperimentSpec p2 = preset("p2-fixture");
    CHECK(p2.power_cap == 15.0);
    CHECK(p2.amse_target == 0.2);
    const ExperimentSpec t1 = preset("table1");
    CHECK(t1.trials == 20);
    CHECK(t1.users == 38);
    CHECK(t1.power_cap == 5.0);
    CHECK_THROWS_AS(preset("nope"), ConfigError);
}

TEST_CASE("config parsing", "[experiments]") {
    ExperimentSpec s = preset("fig3");
    apply_config({{"seed", "7"}, {"trials", "3"}, {"noise_grid", "1, 0.1"}, {"rho", "0.3"}, {"error_var", "0.01,0.02,0.03,0.04"}},
                 s);
    CHECK(s.seed == 7);
    CHECK(s.trials == 3);
    CHECK(s.noise_grid == std::vector<double>{1.0, 0.1});
    CHECK((s.corr.rho.array() == 0.3).all());
    CHECK(s.corr.error_var(1, 2) == 0.03);

    ExperimentSpec t = preset("fig3");
    apply_config({{"scenario", "table1"}, {"users", "19"}}, t);
    CHECK(t.scenario == "table1");
    CHECK(t.users == 19);
    CHECK(t.corr.rho.cols() == 19);

    const auto bad = [](std::map<std::string, std::string> kv) {
        ExperimentSpec x = preset("fig3");
        apply_config(kv, x);
    };
    CHECK_THROWS_AS(bad({{"bogus", "1"}}), ConfigError);
    CHECK_THROWS_AS(bad({{"trials", "0"}}), ConfigError);
    CHECK_THROWS_AS(bad({{"trials", "x"}}), ConfigError);
    CHECK_THROWS_AS(bad({{"noise_grid", ""}}), ConfigError);
    CHECK_THROWS_AS(bad({{"rho", "1.5"}}), ConfigError);
    CHECK_THROWS_AS(bad({{"rho", "0.1,0.2,0.3"}}), ConfigError);
    CHECK_THROWS_AS(bad({{"amse_target", "1"}}), ConfigError);
    CHECK_THROWS_AS(bad({{"robust", "maybe"}}), ConfigError);
    CHECK_THROWS_AS(bad({{"robust", "false"}, {"naive", "false"}}), ConfigError);
}

TEST_CASE("load_spec reads key/value files", "[experiments]") {
    const std::string path = "rcomp_test_config.cfg";
    {
        std::ofstream out(path);
        out << "# small run\nscenario = fig4\ntrials = 2\nnoise_grid = 0.5\n";
    }
    const ExperimentSpec s = load_spec(path, "fig3");
    std::remove(path.c_str());
    CHECK(s.scenario == "fig4");
    CHECK(s.trials == 2);
    CHECK(s.noise_grid.size() == 1);
    CHECK_THROWS_AS(load_spec("does-not-exist.cfg", "fig3"), ConfigError);
}

TEST_CASE("P2 sweep on a two-point grid", "[experiments]") {
    ExperimentSpec s = preset("p2-fixture");
    s.noise_grid = {0.1, 0.01};
    const P2SweepResult res = run_p2_sweep(s);
    REQUIRE(res.rows.size() == 2);
    CHECK(res.monotone);
    for (const auto& r : res.rows) {
        CHECK(r.robust.verdict == P2Verdict::Feasible);
        CHECK(r.robust.total_power >= r.naive.total_power);
        CHECK((r.robust.amse.array() > 0.0).all());
        CHECK((r.robust.amse.array() <= 0.2 + 1e-6).all());
        CHECK((r.robust.powers.array() >= 0.0).all());
    }
    std::ostringstream os;
    write_p2_csv(os, res);
    CHECK(os.str().rfind("noise_var,robust_total_power,naive_total_power", 0) == 0);
    CHECK_THROWS_AS(run_p2_sweep(preset("fig3")), ConfigError);
}

TEST_CASE("tuning helper matches the naive power and keeps the robust advantage", "[experiments]") {
    ExperimentSpec s = preset("p2-fixture");
    s.noise_grid = {0.05};
    s.tune = true;
    const P2SweepResult res = run_p2_sweep(s);
    const P2SweepRow& r = res.rows[0];
    INFO("scale " << r.tuned.scale << " power " << r.tuned.total_power << " naive " << r.naive.total_power);
    CHECK(r.tuned.matched);
    CHECK(r.tuned.total_power <= 1.01 * r.naive.total_power);
    CHECK(r.tuned.total_power >= 0.99 * r.naive.total_power);
    CHECK(r.tuned.amse.sum() <= r.naive.amse.sum());
}

TEST_CASE("looser delta never needs more iterations", "[experiments]") {
    ExperimentSpec tight = small_table1(1);
    ExperimentSpec loose = tight;
    loose.inner_delta = 1e-6;
    const ConvergenceResult a = run_convergence(tight);
    const ConvergenceResult b = run_convergence(loose);
    REQUIRE(!a.stages.empty());
    REQUIRE(!b.stages.empty());
    // The first stage starts from the same point under either delta.
    CHECK(b.stages[0].iterations <= a.stages[0].iterations);
}

TEST_CASE("two convergence seeds give distinct monotone traces", "[experiments]") {
    const ConvergenceResult a = run_convergence(small_table1(3));
    const ConvergenceResult b = run_convergence(small_table1(4));
    REQUIRE(!a.stages.empty());
    REQUIRE(!b.stages.empty());
    CHECK(a.stages[0].trace != b.stages[0].trace);
    for (const auto& s : a.stages) CHECK(s.monotone);
    for (const auto& s : b.stages) CHECK(s.monotone);
    std::ostringstream os;
    write_convergence_csv(os, a);
    CHECK(os.str().rfind("trial,stage,iterations", 0) == 0);
}

TEST_CASE("verify on a handful of instances", "[experiments]") {
    ExperimentSpec s = preset("fig3");
    s.trials = 5;
    const VerifyResult v = verify(s);
    CHECK(v.rows.size() == 10);
    CHECK(v.passed());
    for (const auto& r : v.rows) CHECK(r.kkt.power_violation <= 1e-8);
}

TEST_CASE("trace writers emit headers and rows", "[experiments]") {
    ExperimentSpec s = small_p1();
    s.trials = 1;
    s.noise_grid = {1.0};
    std::ostringstream p1;
    write_p1_trace(p1, s);
    const std::string text = p1.str();
    CHECK(std::count(text.begin(), text.end(), '\n') > 2);
    ExperimentSpec q = preset("p2-fixture");
    q.noise_grid = {0.1};
    std::ostringstream p2;
    write_p2_trace(p2, q);
    CHECK(p2.str().find("level") != std::string::npos);
}

TEST_CASE("fmt keeps full precision", "[experiments]") {
    CHECK(fmt(0.1) == "0.10000000000000001");
    CHECK(fmt(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(std::stod(fmt(1.0 / 3.0)) == 1.0 / 3.0);
}
