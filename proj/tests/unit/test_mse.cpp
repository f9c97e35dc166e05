// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

using namespace rcomp;
using namespace rcomp::test;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ChannelSet fixture_set() { return fixture_channel(preset("p2-fixture").corr); }

}  // namespace

TEST_CASE("amse closed forms", "[mse]") {
    const ChannelSet s = scalar_set(1.0);
    CHECK(amse(s.estimates.col(0), s.error_cov[0], CMatrix::Zero(1, 1), 0, 0.0, 1.0) == 1.0);
    CHECK_THAT(amse(s.estimates.col(0), s.error_cov[0], CMatrix::Constant(1, 1, 1.0), 0, 0.5, 1.0),
               WithinAbs(0.5, 1e-15));
}

TEST_CASE("amse equals the Monte Carlo mean of the instantaneous MSE", "[mse]") {
    const ChannelSet set = fixture_set();
    Rng rng(21);
    const CMatrix b = random_matrix(4, 4, rng) * 0.5;
    const CVector w = sample_cgauss(4, 1.0, rng);
    std::vector<CMatrix> roots;
    for (const auto& r : set.error_cov) roots.push_back(psd_sqrt(r));
    const int draws = 100000;
    for (Index k = 0; k < 4; ++k) {
        double acc = 0.0;
        for (int i = 0; i < draws; ++i) {
            const CVector h = set.estimates.col(k) + roots[static_cast<std::size_t>(k)] * sample_cgauss(4, 1.0, rng);
            acc += instantaneous_mse(h, b, k, w(k), 0.3);
        }
        const double expected = amse(set.estimates.col(k), set.error_cov[static_cast<std::size_t>(k)], b, k, w(k), 0.3);
        CHECK_THAT(acc / draws, WithinRel(expected, 0.01));
    }
}

TEST_CASE("mamse receiver examples", "[mse]") {
    const ChannelSet s = scalar_set(1.0);
    CHECK(mamse_receiver(s.estimates.col(0), s.error_cov[0], CMatrix::Zero(1, 1), 0, 1.0) == cd(0.0));
    CHECK(std::abs(mamse_receiver(s.estimates.col(0), s.error_cov[0], CMatrix::Constant(1, 1, 1.0), 0, 1.0) - 0.5) <
          1e-15);
}

TEST_CASE("mamse receiver beats perturbed receivers", "[mse]") {
    const ChannelSet set = fixture_set();
    Rng rng(22);
    const CMatrix b = random_matrix(4, 4, rng);
    for (Index k = 0; k < 4; ++k) {
        const auto& r = set.error_cov[static_cast<std::size_t>(k)];
        const cd w = mamse_receiver(set.estimates.col(k), r, b, k, 0.2);
        const double best = amse(set.estimates.col(k), r, b, k, w, 0.2);
        CHECK(best > 0.0);
        CHECK(best <= 1.0);
        for (int i = 0; i < 100; ++i) {
            const cd wp = w + 0.1 * sample_cgauss(1, 1.0, rng)(0);
            CHECK(amse(set.estimates.col(k), r, b, k, wp, 0.2) >= best - 1e-15);
        }
    }
}

TEST_CASE("weighted_sum_amse examples and matrix form", "[mse]") {
    const ChannelSet set = fixture_set();
    const RVector noise = RVector::Constant(4, 0.1);
    const Transceiver zero{CMatrix::Zero(4, 4), CVector::Zero(4)};
    CHECK(weighted_sum_amse(set, zero, RVector::Ones(4), noise) == 4.0);
    Rng rng(23);
    const Transceiver trx{random_matrix(4, 4, rng), sample_cgauss(4, 1.0, rng)};
    CHECK(weighted_sum_amse(set, trx, RVector::Zero(4), noise) == 0.0);
    for (int i = 0; i < 10; ++i) {
        const Transceiver t{random_matrix(4, 4, rng), sample_cgauss(4, 1.0, rng)};
        RVector eta(4);
        for (Index k = 0; k < 4; ++k) eta(k) = 0.5 + std::abs(sample_cgauss(1, 1.0, rng)(0));
        const double a = weighted_sum_amse(set, t, eta, noise);
        const double b = weighted_sum_amse_matrix_form(set, t, eta, noise);
        CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("per_antenna_power", "[mse]") {
    CHECK(per_antenna_power(CMatrix::Zero(3, 2)).cwiseAbs().maxCoeff() == 0.0);
    CMatrix b(2, 1);
    b << 1.0, cd(0.0, 2.0);
    const RVector p = per_antenna_power(b);
    CHECK(p(0) == 1.0);
    CHECK(p(1) == 4.0);
    Rng rng(24);
    const CMatrix r = random_matrix(5, 3, rng);
    CHECK_THAT(per_antenna_power(r).sum(), WithinRel(r.squaredNorm(), 1e-14));
}

TEST_CASE("amse invariants", "[mse]") {
    const ChannelSet set = fixture_set();
    Rng rng(25);
    const CMatrix b = random_matrix(4, 4, rng);
    const CVector w = sample_cgauss(4, 1.0, rng);
    for (Index k = 0; k < 4; ++k) {
        const auto& r = set.error_cov[static_cast<std::size_t>(k)];
        const CVector h = set.estimates.col(k);
        const double base = amse(h, r, b, k, w(k), 0.2);
        CMatrix rotated = b;
        const cd phase = std::polar(1.0, 0.7);
        rotated.col(k) *= phase;
        CHECK_THAT(amse(h, r, rotated, k, w(k) * phase, 0.2), WithinRel(base, 1e-12));
        CHECK(amse(h, r, b, k, w(k), 0.5) >= base);
        CHECK_THAT(amse(h, CMatrix::Zero(4, 4), b, k, w(k), 0.2), WithinRel(instantaneous_mse(h, b, k, w(k), 0.2), 1e-12));
    }
    const CVector wm = mamse_receivers(set, b, RVector::Constant(4, 0.2));
    const RVector a = user_amse(set, {b, wm}, RVector::Constant(4, 0.2));
    CHECK((a.array() > 0.0).all());
    CHECK((a.array() <= 1.0).all());
}

TEST_CASE("error-free sampled set gives the perfect-CSI MSE", "[mse]") {
    const NetworkConfig cfg = NetworkConfig::uniform({2, 2}, 4, 2.0, 0.1);
    Rng rng(26);
    const ChannelSet set = sample_channel(cfg, CorrelationSpec::uniform(2, 4, 0.3, 0.0), RMatrix::Ones(2, 4), rng);
    const CMatrix b = random_matrix(4, 4, rng);
    const CVector w = sample_cgauss(4, 1.0, rng);
    const RVector a = user_amse(set, {b, w}, cfg.noise_var);
    for (Index k = 0; k < 4; ++k)
        CHECK_THAT(a(k), WithinRel(instantaneous_mse(set.truth->col(k), b, k, w(k), 0.1), 1e-12));
}

TEST_CASE("mse dimension checks", "[mse]") {
    const ChannelSet set = fixture_set();
    CHECK_THROWS_AS(user_amse(set, {CMatrix::Zero(3, 4), CVector::Zero(4)}, RVector::Ones(4)), DimensionMismatch);
}
