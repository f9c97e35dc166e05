// SPDX-License-Identifier: Apache-2.0
// Shared helpers for the unit tests.

#ifndef RCOMP_TEST_SUPPORT_HPP
#define RCOMP_TEST_SUPPORT_HPP

#include "rcomp/experiments.hpp"

#include <catch_amalgamated.hpp>

namespace rcomp::test {

inline CMatrix random_matrix(Index rows, Index cols, Rng& rng) {
    CMatrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) m.col(j) = sample_cgauss(rows, 1.0, rng);
    return m;
}

inline CMatrix random_hermitian(Index n, Rng& rng) {
    const CMatrix a = random_matrix(n, n, rng);
    return 0.5 * (a + a.adjoint());
}

inline CMatrix random_pd(Index n, Rng& rng, double shift = 0.5) {
    const CMatrix a = random_matrix(n, n, rng);
    CMatrix m = a * a.adjoint();
    m.diagonal().array() += shift;
    return 0.5 * (m + m.adjoint());
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

inline ChannelSet scalar_set(cd h, double r = 0.0) {
    ChannelSet set;
    set.estimates = CMatrix::Constant(1, 1, h);
    set.error_cov = {CMatrix::Constant(1, 1, r)};
    return set;
}

}  // namespace rcomp::test

#endif
