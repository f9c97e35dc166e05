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

#include "rcomp/numerics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace rcomp {

namespace {

void require_square(const CMatrix& m, const char* what) {
    if (m.rows() != m.cols())
        throw DimensionMismatch(std::string(what) + ": matrix must be square");
}

void require_hermitian(const CMatrix& m, const char* what) {
    require_square(m, what);
    if (!m.allFinite())
        throw std::invalid_argument(std::string(what) + ": non-finite entries");
    if (!is_hermitian(m))
        throw NonHermitianInput(std::string(what) + ": input is not Hermitian");
}

// Raw decomposition in Eigen's ascending order, on the symmetrized input.
Eigen::SelfAdjointEigenSolver<CMatrix> decompose(const CMatrix& m) {
    CMatrix sym = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("hermitian eigensolver did not converge");
    return solver;
}

}  // namespace

double max_abs(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const CMatrix& m, double rel_tol) {
    if (m.rows() != m.cols()) return false;
    const double scale = max_abs(m);
    if (scale == 0.0) return true;
    return max_abs(m - m.adjoint()) <= rel_tol * scale;
}

CMatrix hermitian_inverse(const CMatrix& m) {
    require_hermitian(m, "hermitian_inverse");
    if (m.size() == 0) return m;
    auto solver = decompose(m);
    const RVector& ev = solver.eigenvalues();
    const double largest = ev.cwiseAbs().maxCoeff();
    const double smallest = ev.cwiseAbs().minCoeff();
    if (!(largest > 0.0) || smallest <= 1e-14 * largest)
        throw SingularMatrix("hermitian_inverse: matrix is numerically singular");
    const CMatrix& v = solver.eigenvectors();
    CMatrix inv = v * ev.cwiseInverse().asDiagonal() * v.adjoint();
    return 0.5 * (inv + inv.adjoint());
}

CMatrix hermitian_pd_solve(const CMatrix& a, const CMatrix& rhs) {
    require_hermitian(a, "hermitian_pd_solve");
    if (a.rows() != rhs.rows()) throw DimensionMismatch("hermitian_pd_solve: rhs row count differs");
    if (a.size() == 0) return rhs;
    const Eigen::LLT<CMatrix> llt(0.5 * (a + a.adjoint()));
    if (llt.info() != Eigen::Success) throw SingularMatrix("hermitian_pd_solve: matrix is not positive definite");
    const RVector d = llt.matrixLLT().diagonal().real().cwiseAbs2();
    if (!(d.minCoeff() > 1e-14 * d.maxCoeff()))
        throw SingularMatrix("hermitian_pd_solve: matrix is numerically singular");
    return llt.solve(rhs);
}

HermitianEig hermitian_eig(const CMatrix& m) {
    require_hermitian(m, "hermitian_eig");
    const Index n = m.rows();
    HermitianEig out{CMatrix(n, n), RVector(n)};
    if (n == 0) return out;
    auto solver = decompose(m);
    for (Index j = 0; j < n; ++j) {
        const Index src = n - 1 - j;
        out.values(j) = solver.eigenvalues()(src);
        CVector col = solver.eigenvectors().col(src);
        Index pivot = 0;
        col.cwiseAbs().maxCoeff(&pivot);
        const cd phase = col(pivot) / std::abs(col(pivot));
        out.vectors.col(j) = col * std::conj(phase);
    }
    return out;
}

CMatrix psd_sqrt(const CMatrix& m) {
    require_hermitian(m, "psd_sqrt");
    const Index n = m.rows();
    if (n == 0) return m;
    auto solver = decompose(m);
    RVector ev = solver.eigenvalues();
    const double radius = ev.cwiseAbs().maxCoeff();
    for (Index i = 0; i < n; ++i) {
        if (ev(i) < -1e-12 * radius)
            throw IndefiniteInput("psd_sqrt: matrix has a significantly negative eigenvalue");
        ev(i) = std::sqrt(std::max(ev(i), 0.0));
    }
    const CMatrix& v = solver.eigenvectors();
    CMatrix root = v * ev.asDiagonal() * v.adjoint();
    return 0.5 * (root + root.adjoint());
}

CVector sample_cgauss(Index n, double variance, Rng& rng) {
    if (variance < 0.0 || std::isnan(variance))
        throw NegativeVariance("sample_cgauss: variance must be non-negative");
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = std::sqrt(0.5 * variance);
    CVector out(n);
    for (Index i = 0; i < n; ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        out(i) = cd(scale * re, scale * im);
    }
    return out;
}

CMatrix block_diagonal(const std::vector<CMatrix>& blocks) {
    Index n = 0;
    for (const auto& b : blocks) {
        require_square(b, "block_diagonal");
        n += b.rows();
    }
    CMatrix out = CMatrix::Zero(n, n);
    Index offset = 0;
    for (const auto& b : blocks) {
        out.block(offset, offset, b.rows(), b.cols()) = b;
        offset += b.rows();
    }
    return out;
}

}  // namespace rcomp
