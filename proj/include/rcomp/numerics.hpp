// SPDX-License-Identifier: Apache-2.0
//
// rcomp: robust distributed transceiver design for coordinated base stations
// Copyright (C) 2026 The rcomp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef RCOMP_NUMERICS_HPP
#define RCOMP_NUMERICS_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace rcomp {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Caller-owned generator. std::mt19937_64 output is fully specified by the
// standard, so seeded streams are reproducible.
using Rng = std::mt19937_64;

// ----- Error types ------------------------------------------------------

struct SingularMatrix : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonHermitianInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct IndefiniteInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct NegativeVariance : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// ----- Hermitian kernels -------------------------------------------------

/// Largest absolute entry, 0 for empty matrices.
double max_abs(const CMatrix& m);

/// True when ||M - M^H||_max <= rel_tol * ||M||_max.
bool is_hermitian(const CMatrix& m, double rel_tol = 1e-12);

/// Inverse of a Hermitian matrix through its eigendecomposition.
/// Throws SingularMatrix when min |eig| <= 1e-14 * max |eig|, and
/// NonHermitianInput when the symmetry check fails. The result is exactly
/// Hermitian.
CMatrix hermitian_inverse(const CMatrix& m);

/// Solves A X = rhs for Hermitian positive definite A by Cholesky. Throws
/// SingularMatrix when the factorization fails or its pivots span more than
/// 14 decades.
CMatrix hermitian_pd_solve(const CMatrix& a, const CMatrix& rhs);

struct HermitianEig {
    CMatrix vectors;  // columns, unitary
    RVector values;   // descending
};

/// Eigendecomposition M = V diag(values) V^H with eigenvalues in descending
/// order. Each eigenvector is phase-normalized so that its largest-magnitude
/// component is real and positive, which makes the factorization
/// reproducible across platforms.
HermitianEig hermitian_eig(const CMatrix& m);

/// Unique Hermitian PSD square root. Eigenvalues down to
/// -1e-12 * spectral radius are clipped to zero; anything more negative
/// throws IndefiniteInput.
CMatrix psd_sqrt(const CMatrix& m);

/// Zero-mean circularly symmetric complex Gaussian vector: real and imaginary
/// parts independent, each with variance `variance / 2`. Always consumes 2n
/// standard normal draws, including for variance 0, so streams stay aligned
/// across parameter changes.
CVector sample_cgauss(Index n, double variance, Rng& rng);

/// Block-diagonal assembly of square blocks.
CMatrix block_diagonal(const std::vector<CMatrix>& blocks);

}  // namespace rcomp

#endif
