// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

using namespace rcomp;
using namespace rcomp::test;
using Catch::Matchers::WithinAbs;

TEST_CASE("hermitian_inverse of identity and diagonal", "[numerics]") {
    CHECK(max_abs(hermitian_inverse(CMatrix::Identity(3, 3)) - CMatrix::Identity(3, 3)) == 0.0);
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 4.0;
    const CMatrix inv = hermitian_inverse(d);
    CHECK_THAT(inv(0, 0).real(), WithinAbs(0.5, 1e-15));
    CHECK_THAT(inv(1, 1).real(), WithinAbs(0.25, 1e-15));
    CHECK(std::abs(inv(0, 1)) < 1e-15);
}

TEST_CASE("hermitian_inverse reconstructs and round-trips", "[numerics]") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix m = random_pd(6, rng);
        const CMatrix inv = hermitian_inverse(m);
        CHECK(max_abs(m * inv - CMatrix::Identity(6, 6)) <= 1e-9 * max_abs(m));
        CHECK(is_hermitian(inv, 0.0));
        CHECK(max_abs(hermitian_inverse(inv) - m) <= 1e-8 * max_abs(m));
    }
}

TEST_CASE("hermitian_inverse rejects singular and non-Hermitian input", "[numerics]") {
    CMatrix s = CMatrix::Zero(2, 2);
    s(0, 0) = 1.0;
    CHECK_THROWS_AS(hermitian_inverse(s), SingularMatrix);
    CMatrix n = CMatrix::Identity(2, 2);
    n(0, 1) = 0.3;
    CHECK_THROWS_AS(hermitian_inverse(n), NonHermitianInput);
}

TEST_CASE("hermitian_pd_solve matches the inverse", "[numerics]") {
    Rng rng(12);
    const CMatrix a = random_pd(5, rng);
    const CMatrix b = random_matrix(5, 3, rng);
    CHECK(max_abs(hermitian_pd_solve(a, b) - hermitian_inverse(a) * b) <= 1e-10);
    CHECK_THROWS_AS(hermitian_pd_solve(-a, b), SingularMatrix);
}

TEST_CASE("hermitian_eig closed forms", "[numerics]") {
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 3.0;
    const HermitianEig e = hermitian_eig(d);
    CHECK_THAT(e.values(0), WithinAbs(3.0, 1e-15));
    CHECK_THAT(e.values(1), WithinAbs(1.0, 1e-15));
    CHECK(std::abs(std::abs(e.vectors(1, 0)) - 1.0) < 1e-15);

    CMatrix s(2, 2);
    s << 1.0, 0.5, 0.5, 1.0;
    const HermitianEig es = hermitian_eig(s);
    CHECK_THAT(es.values(0), WithinAbs(1.5, 1e-14));
    CHECK_THAT(es.values(1), WithinAbs(0.5, 1e-14));
}

TEST_CASE("diag(3, 1) keeps the identity eigenvector basis", "[numerics]") {
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    const HermitianEig e = hermitian_eig(d);
    CHECK(e.values(0) == 3.0);
    CHECK(e.values(1) == 1.0);
    CHECK(max_abs(e.vectors - CMatrix::Identity(2, 2)) < 1e-15);
}

TEST_CASE("hermitian_eig reconstruction, unitarity, ordering", "[numerics]") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix m = random_hermitian(7, rng);
        const HermitianEig e = hermitian_eig(m);
        const CMatrix rec = e.vectors * e.values.cast<cd>().asDiagonal() * e.vectors.adjoint();
        CHECK(max_abs(rec - m) <= 1e-9 * max_abs(m));
        CHECK(max_abs(e.vectors.adjoint() * e.vectors - CMatrix::Identity(7, 7)) <= 1e-10);
        for (Index i = 1; i < 7; ++i) CHECK(e.values(i) <= e.values(i - 1));
    }
    CMatrix bad = CMatrix::Identity(2, 2);
    bad(1, 0) = cd(0.0, 1.0);
    CHECK_THROWS_AS(hermitian_eig(bad), NonHermitianInput);
}

TEST_CASE("PSD eigenvalues are not significantly negative", "[numerics]") {
    Rng rng(14);
    const CMatrix a = random_matrix(6, 3, rng);
    const CMatrix m = a * a.adjoint();
    const HermitianEig e = hermitian_eig(0.5 * (m + m.adjoint()));
    CHECK(e.values.minCoeff() >= -1e-12 * e.values.cwiseAbs().maxCoeff());
}

TEST_CASE("psd_sqrt examples", "[numerics]") {
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 9.0;
    const CMatrix r = psd_sqrt(d);
    CHECK_THAT(r(0, 0).real(), WithinAbs(2.0, 1e-14));
    CHECK_THAT(r(1, 1).real(), WithinAbs(3.0, 1e-14));
    CHECK(max_abs(psd_sqrt(CMatrix::Zero(3, 3))) == 0.0);

    const CMatrix c = exp_correlation(0.5, 3);
    const CMatrix rc = psd_sqrt(c);
    CHECK(max_abs(rc * rc - c) <= 1e-9 * max_abs(c));
    CHECK(is_hermitian(rc));
    CHECK(hermitian_eig(rc).values.minCoeff() >= -1e-14);
}

TEST_CASE("psd_sqrt commutes with its argument and rejects indefinite input", "[numerics]") {
    Rng rng(15);
    const CMatrix m = random_pd(5, rng, 0.0);
    const CMatrix r = psd_sqrt(m);
    const double scale = max_abs(m);
    CHECK(max_abs(r * m - m * r) <= 1e-9 * scale * scale);
    CHECK(max_abs(r * r - m) <= 1e-9 * scale);
    CMatrix ind = CMatrix::Identity(2, 2);
    ind(1, 1) = -0.5;
    CHECK_THROWS_AS(psd_sqrt(ind), IndefiniteInput);
}

TEST_CASE("sample_cgauss statistics and determinism", "[numerics]") {
    Rng rng(16);
    CHECK(sample_cgauss(4, 0.0, rng).cwiseAbs().maxCoeff() == 0.0);

    const Index n = 100000;
    const CVector z = sample_cgauss(n, 1.0, rng);
    const cd mean = z.mean();
    CHECK(std::abs(mean) <= 0.02);
    const double var = (z.array() - mean).abs2().sum() / static_cast<double>(n - 1);
    CHECK(var >= 0.98);
    CHECK(var <= 1.02);
    const double re_var = z.real().squaredNorm() / static_cast<double>(n);
    CHECK_THAT(re_var, WithinAbs(0.5, 0.01));

    Rng a(99), b(99);
    CHECK(sample_cgauss(8, 2.0, a) == sample_cgauss(8, 2.0, b));
    CHECK_THROWS_AS(sample_cgauss(3, -1.0, rng), NegativeVariance);
}

TEST_CASE("block_diagonal assembles square blocks", "[numerics]") {
    const CMatrix b = block_diagonal({CMatrix::Constant(1, 1, 2.0), CMatrix::Constant(2, 2, 3.0)});
    REQUIRE(b.rows() == 3);
    CHECK(b(0, 0) == cd(2.0));
    CHECK(b(2, 1) == cd(3.0));
    CHECK(b(0, 1) == cd(0.0));
}
