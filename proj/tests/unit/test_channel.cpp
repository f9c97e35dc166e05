// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include <sstream>

using namespace rcomp;
using namespace rcomp::test;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("exp_correlation entries", "[channel]") {
    CHECK(max_abs(exp_correlation(0.0, 3) - CMatrix::Identity(3, 3)) == 0.0);
    CMatrix two(2, 2);
    two << 1.0, 0.5, 0.5, 1.0;
    CHECK(max_abs(exp_correlation(0.5, 2) - two) == 0.0);
    CMatrix three(3, 3);
    three << 1.0, 0.8, 0.64, 0.8, 1.0, 0.8, 0.64, 0.8, 1.0;
    CHECK(max_abs(exp_correlation(0.8, 3) - three) <= 1e-15);
    CHECK_THROWS_AS(exp_correlation(1.0, 2), OutOfRangeRho);
    CHECK_THROWS_AS(exp_correlation(-0.1, 2), OutOfRangeRho);
}

TEST_CASE("exp_correlation is PSD up to n = 64", "[channel]") {
    for (double rho : {0.0, 0.3, 0.9, 0.999})
        for (Index n : {1, 2, 7, 64}) {
            const HermitianEig e = hermitian_eig(exp_correlation(rho, n));
            CHECK(e.values.minCoeff() >= -1e-12 * e.values.maxCoeff());
        }
}

namespace {

NetworkConfig two_by_two() { return NetworkConfig::uniform({2, 2}, 4, 2.0, 0.1); }

CorrelationSpec fig3_corr() { return preset("fig3").corr; }

}  // namespace

TEST_CASE("sample_channel without estimation error", "[channel]") {
    const NetworkConfig cfg = two_by_two();
    const CorrelationSpec corr = CorrelationSpec::uniform(2, 4, 0.4, 0.0);
    Rng rng(3);
    const ChannelSet set = sample_channel(cfg, corr, RMatrix::Ones(2, 4), rng);
    REQUIRE(set.truth.has_value());
    CHECK(max_abs(*set.truth - set.estimates) == 0.0);
    for (const auto& r : set.error_cov) CHECK(max_abs(r) == 0.0);
}

TEST_CASE("sample_channel empirical covariance with rho = 0", "[channel]") {
    const NetworkConfig cfg = NetworkConfig::uniform({2, 1}, 1, 1.0, 0.1);
    const CorrelationSpec corr = CorrelationSpec::uniform(2, 1, 0.0, 0.0);
    RMatrix gains(2, 1);
    gains << 2.0, 0.5;
    Rng rng(4);
    const int draws = 100000;
    CMatrix acc = CMatrix::Zero(3, 3);
    for (int i = 0; i < draws; ++i) {
        const ChannelSet s = sample_channel(cfg, corr, gains, rng);
        acc += s.estimates.col(0) * s.estimates.col(0).adjoint();
    }
    acc /= static_cast<double>(draws);
    const double expected[] = {2.0, 2.0, 0.5};
    for (Index i = 0; i < 3; ++i) CHECK_THAT(acc(i, i).real(), WithinRel(expected[i], 0.03));
    CHECK(std::abs(acc(0, 1)) < 0.03 * 2.0);
    CHECK(std::abs(acc(0, 2)) < 0.03 * 2.0);
}

TEST_CASE("sample_channel determinism and covariance structure", "[channel]") {
    const NetworkConfig cfg = two_by_two();
    Rng a(5), b(5);
    const ChannelSet x = sample_channel(cfg, fig3_corr(), RMatrix::Ones(2, 4), a);
    const ChannelSet y = sample_channel(cfg, fig3_corr(), RMatrix::Ones(2, 4), b);
    CHECK(x.estimates == y.estimates);
    CHECK(*x.truth == *y.truth);
    std::ostringstream sx, sy;
    write_channel_csv(sx, x);
    write_channel_csv(sy, y);
    CHECK(sx.str() == sy.str());

    const CorrelationSpec corr = fig3_corr();
    for (Index k = 0; k < 4; ++k) {
        const CMatrix& r = x.error_cov[static_cast<std::size_t>(k)];
        CHECK(is_hermitian(r, 0.0));
        CHECK(hermitian_eig(r).values.minCoeff() >= -1e-15);
        CHECK(max_abs(r.block(0, 2, 2, 2)) == 0.0);
        CHECK(max_abs(r.block(2, 0, 2, 2)) == 0.0);
        for (Index l = 0; l < 2; ++l) {
            const CMatrix expected = corr.error_var(l, k) * exp_correlation(corr.rho(l, k), 2);
            CHECK(max_abs(r.block(2 * l, 2 * l, 2, 2) - expected) <= 1e-15);
        }
    }
}

TEST_CASE("sample_channel dimension checks", "[channel]") {
    Rng rng(6);
    CHECK_THROWS_AS(sample_channel(two_by_two(), fig3_corr(), RMatrix::Ones(3, 4), rng), DimensionMismatch);
    CHECK_THROWS_AS(sample_channel(two_by_two(), CorrelationSpec::uniform(2, 3, 0.1, 0.01), RMatrix::Ones(2, 4), rng),
                    DimensionMismatch);
}

TEST_CASE("large-scale gain and noise", "[channel]") {
    LargeScaleScenario s;
    s.antenna_gain_dbi = 0.0;
    CHECK_THAT(large_scale_gain(s, s.ref_distance_km), WithinRel(std::pow(10.0, -13.4), 1e-12));
    CHECK_THAT(large_scale_gain(s, 2 * s.ref_distance_km) / large_scale_gain(s, s.ref_distance_km),
               WithinRel(std::pow(2.0, -3.8), 1e-12));
    CHECK(large_scale_gain(s, 0.1) == large_scale_gain(s, s.ref_distance_km));

    const LargeScaleScenario t;
    CHECK_THAT(thermal_noise_power(t), WithinRel(1.380649e-23 * 300.0 * 5e6 * std::pow(10.0, 0.5), 1e-12));
    CHECK_THAT(thermal_noise_power(t), WithinRel(6.549e-14, 1e-3));
    CHECK_THAT(cell_edge_snr_db(t), WithinAbs(18.14, 0.01));
}

TEST_CASE("hex_scenario geometry", "[channel]") {
    const LargeScaleScenario s;
    Rng rng(7);
    const HexLayout lay = hex_scenario(s, rng);
    REQUIRE(lay.bs_positions.rows() == 19);
    REQUIRE(lay.ms_positions.rows() == 38);
    REQUIRE(lay.gains.rows() == 19);
    REQUIRE(lay.gains.cols() == 38);
    CHECK(lay.bs_positions.row(0).norm() == 0.0);
    for (Index k = 0; k < 38; ++k) CHECK(inside_hex_union(lay.ms_positions(k, 0), lay.ms_positions(k, 1), 1.6));
    CHECK((lay.gains.array() > 0.0).all());
    CHECK((lay.gains.array() <= large_scale_gain(s, 0.0)).all());
    CHECK_FALSE(inside_hex_union(20.0, 0.0, 1.6));
    CHECK(inside_hex_union(0.0, 0.0, 1.6));

    Rng again(7);
    CHECK(hex_scenario(s, again).gains == lay.gains);
}

TEST_CASE("fixture_p2 entries", "[channel]") {
    const CMatrix h = fixture_p2();
    CHECK(h(0, 0) == cd(0.2328, -0.0868));
    CHECK(h(1, 0) == cd(1.6717, 0.4976));
    CHECK(h(3, 3) == cd(-0.2692, -0.6244));
    const ChannelSet set = fixture_channel(fig3_corr());
    CHECK(set.estimates(0, 1) == std::conj(h(1, 0)));
}

TEST_CASE("channel CSV round trip", "[channel]") {
    Rng rng(8);
    const ChannelSet a = sample_channel(two_by_two(), fig3_corr(), RMatrix::Ones(2, 4), rng);
    std::stringstream ss;
    write_channel_csv(ss, a);
    const ChannelSet b = read_channel_csv(ss);
    CHECK(b.estimates == a.estimates);
    REQUIRE(b.truth.has_value());
    CHECK(*b.truth == *a.truth);
    for (std::size_t k = 0; k < a.error_cov.size(); ++k) CHECK(b.error_cov[k] == a.error_cov[k]);
}

TEST_CASE("key/value parsing and scenario keys", "[channel]") {
    std::istringstream in("# comment\n temperature_k = 290\n\nusers=12\nextra = 1\n");
    const auto kv = parse_kv_config(in);
    CHECK(kv.at("temperature_k") == "290");
    LargeScaleScenario s;
    const auto unused = apply_scenario_keys(kv, s);
    CHECK(s.temperature_k == 290.0);
    CHECK(s.users == 12);
    REQUIRE(unused.size() == 1);
    CHECK(unused[0] == "extra");
}

TEST_CASE("network validation", "[channel]") {
    NetworkConfig cfg = two_by_two();
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.num_antennas() == 4);
    CHECK(cfg.bs_offset(1) == 2);
    cfg.amse_targets(0) = 1.0;
    CHECK_THROWS(cfg.validate());
}
