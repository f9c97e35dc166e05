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

#ifndef RCOMP_P1_HPP
#define RCOMP_P1_HPP

#include "rcomp/mse.hpp"

#include <vector>

namespace rcomp {

// Robust weighted-sum-AMSE minimization under per-antenna power caps.
//
// For fixed receivers the precoder problem is convex. Its Lagrange dual over
// the per-antenna multipliers lambda is
//   min_{lambda >= 0}  tr{F^H (R R^H + diag(lambda))^{-1} F} + sum_n lambda_n p_n
// with F F^H = sum_k eta_k^2 |w_k|^2 h_k h_k^H and
//      R R^H = sum_k eta_k |w_k|^2 (h_k h_k^H + R_bk).
// The multipliers are found by a per-antenna fixed-point iteration, the
// precoders follow in closed form, and receivers are refreshed by MAMSE.

/// lambda floor 1e-12 * max(1, mean(p)); keeps the multiplicative update
/// away from an unreachable exact zero.
double default_lambda_floor(const RVector& power_caps);

/// A = sum_i eta_i |w_i|^2 (h_i h_i^H + R_bi) + diag(lambda).
CMatrix build_a(const ChannelSet& set, const CVector& receivers, const RVector& weights,
                const RVector& lambda);

/// b_k = eta_k A^{-1} h_k w_k for every user.
CMatrix precoders_from_dual(const CMatrix& a, const CMatrix& estimates, const CVector& receivers,
                            const RVector& weights);

struct DualFactors {
    CMatrix f;  // N x N, F F^H = H W eta^2 W^H H^H
    CMatrix r;  // N x N, R R^H = H W eta W^H H^H + sum eta |w|^2 R_b
};

/// Square-root factors from the eigendecompositions of the two Gram matrices.
DualFactors dual_factors(const ChannelSet& set, const CVector& receivers, const RVector& weights);

/// tr{F^H (R R^H + diag(lambda))^{-1} F} + sum_n lambda_n p_n.
double dual_objective_p1(const RVector& lambda, const CMatrix& f, const CMatrix& r, const RVector& power_caps);

/// Dual function value g(lambda) = sum_k eta_k (sigma_k^2 |w_k|^2 + 1) - dual_objective_p1.
double dual_function_p1(const RVector& lambda, const CMatrix& f, const CMatrix& r, const RVector& power_caps,
                        const CVector& receivers, const RVector& weights, const RVector& noise_var);

struct AlgorithmIOptions {
    double delta = 1e-12;        // stop once the objective decrease falls below this
    double lambda_floor = -1.0;  // negative selects default_lambda_floor
    int max_iter = 1000;
};

struct AlgorithmIStep {
    double objective;
    double max_power_violation;  // max_n (power_n - p_n)^+ of the closed-form precoders
    double lambda_min;
    double lambda_max;
};

struct DualStateP1 {
    RVector lambda;
    std::vector<double> objective_trace;  // entry 0 is the starting point
    std::vector<AlgorithmIStep> steps;    // parallel to objective_trace
    int iterations = 0;                   // multiplier updates performed
    bool converged = false;
};

/// Per-antenna multiplier iteration. Every sweep reads one lambda snapshot:
///   Gamma = (R R^H + diag(lambda))^{-1} F,  g_n = lambda_n Gamma_n^H,
///   lambda_n <- max(floor, sqrt(|g_n|^2 / p_n)).
/// `initial` defaults to all ones. On max_iter the best state is returned
/// with converged = false.
DualStateP1 algorithm1(const CMatrix& f, const CMatrix& r, const RVector& power_caps,
                       const AlgorithmIOptions& opts = {}, const RVector* initial = nullptr);

struct P1Options {
    AlgorithmIOptions inner;
    double outer_tol = 1e-6;
    int max_outer = 200;
    // Reuse the previous multipliers across outer iterations. Off by default:
    // a multiplier parked at the floor regrows by sqrt(power / p) per step, so
    // the delta stop can fire while the cap is still violated.
    bool warm_start = false;
};

struct P1Report {
    Transceiver transceiver;           // final precoders and refreshed receivers
    CVector design_receivers;          // receivers the final precoders were computed for
    RVector lambda;                    // final multipliers
    std::vector<double> objective_trace;  // weighted-sum AMSE, entry 0 is the initial point
    std::vector<DualStateP1> inner;    // Algorithm I run of every outer stage
    RVector powers;
    double objective = 0.0;            // weighted-sum AMSE of `transceiver`
    int outer_iterations = 0;
    bool converged = false;
    bool rescaled = false;             // post-check shrank B to restore feasibility
};

/// Alternating optimization: multipliers -> closed-form precoders -> MAMSE
/// receivers, starting from B = H_hat with every row scaled to its cap.
P1Report algorithm2(const NetworkConfig& cfg, const ChannelSet& set, const P1Options& opts = {});

/// Initial precoders: rows of the estimate matrix scaled to sqrt(p_n).
CMatrix row_normalized_precoders(const CMatrix& estimates, const RVector& power_caps);

/// True when no entry exceeds its predecessor by more than `tol`.
bool is_non_increasing(const std::vector<double>& trace, double tol = 1e-10);

}  // namespace rcomp

#endif
