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

#ifndef RCOMP_P2_HPP
#define RCOMP_P2_HPP

#include "rcomp/p1.hpp"

#include <stdexcept>
#include <vector>

namespace rcomp {

// Robust total-power minimization subject to per-user AMSE targets eps_k and
// per-antenna caps p_n. For fixed receivers the dual function is
//   g(lambda, nu) = sum_k nu_k alpha_k - sum_k nu_k^2 |w_k|^2 h_k^H At^{-1} h_k - lambda . p
// with alpha_k = 1 + sigma_k^2 |w_k|^2 - eps_k and
//   At = I + sum_i nu_i |w_i|^2 (h_i h_i^H + R_bi) + diag(lambda).

/// Thrown when a user cannot be served at all (rho_k1 = |w_k|^2 |h_k|^2 = 0).
struct InfeasibleUser : std::runtime_error {
    InfeasibleUser(const std::string& what, Index k) : std::runtime_error(what), user(k) {}
    Index user;
};

/// At = I + sum_i nu_i |w_i|^2 (h_i h_i^H + R_bi) + diag(lambda).
CMatrix build_a_tilde(const ChannelSet& set, const CVector& receivers, const RVector& nu, const RVector& lambda);

/// b_k = nu_k At^{-1} h_k w_k.
CMatrix precoders_from_dual_p2(const CMatrix& a_tilde, const CMatrix& estimates, const CVector& receivers,
                               const RVector& nu);

/// Wt_bk = psd_sqrt(|w_k|^2 (h_k h_k^H + R_bk)), one N x N block per user.
std::vector<CMatrix> w_tilde_blocks(const ChannelSet& set, const CVector& receivers);

/// Auxiliary variables of the variational form of the P2 dual.
///
/// With Wbar = [Wt_b1 ... Wt_bK I] and Upsilon = blkdiag(nu_1 I, ..., nu_K I, diag(lambda)):
///   gbar_k   = nu_k Upsilon Wbar^H At^{-1} h_k w_k          (length NK + N)
///   Gt_k     = nu_k Wt_bk^H Gamma_t                          (N x K)
///   u_n      = lambda_n (row n of Gamma_t)^H                 (length K)
/// and Gamma_t = At^{-1} H W diag(nu), i.e. the current precoders.
struct GbarUpdates {
    std::vector<CVector> gbar;
    std::vector<CMatrix> g_tilde;
    CMatrix u;            // N x K, row n holds u_n^H
    CMatrix gamma_tilde;  // N x K
};

GbarUpdates gbar_updates(const ChannelSet& set, const CVector& receivers, const RVector& nu,
                         const RVector& lambda);

/// gbar_k through nu_k (Upsilon^{-1} + Wbar^H Wbar)^{-1} Wbar^H h_k w_k; needs nu, lambda > 0.
CVector gbar_direct(const ChannelSet& set, const CVector& receivers, const RVector& nu, const RVector& lambda,
                    Index user);

struct RhoCoefficients {
    double rho1;  // |w_k|^2 |h_k|^2
    double rho2;  // 2 Re{conj(w_k) h_k^H Wbar gbar_k} + alpha_k
    double rho3;  // |Gt_k|_F^2
};

/// Coefficients of the per-user scalar problem min_nu nu^2 rho1 - nu rho2 + rho3 / nu.
RhoCoefficients rho_coefficients(const ChannelSet& set, const CVector& receivers, Index user,
                                 const CVector& gbar_k, const CMatrix& g_tilde_k, double alpha_k);

/// alpha_k = 1 + sigma_k^2 |w_k|^2 - eps_k for every user.
RVector p2_alpha(const NetworkConfig& cfg, const CVector& receivers);

/// Unique positive root of 2 rho1 nu^3 - rho2 nu^2 - rho3 = 0 by the closed
/// (Cardano) form, with a Newton polish when the cubic residual exceeds
/// 1e-12 relative. Throws InfeasibleUser (user = -1) for rho1 <= 0.
double nu_update(double rho1, double rho2, double rho3);

/// max(floor, sqrt(rho0 / p)).
double lambda_update_p2(double rho0, double power_cap, double floor = 0.0);

/// g(lambda, nu) for fixed receivers.
double dual_function_p2(const NetworkConfig& cfg, const ChannelSet& set, const CVector& receivers,
                        const RVector& nu, const RVector& lambda);

/// Minimization form of the dual, equal to -g(lambda, nu).
double dual_objective_p2(const NetworkConfig& cfg, const ChannelSet& set, const CVector& receivers,
                         const RVector& nu, const RVector& lambda);

enum class P2Status { Converged, Diverging, MaxIter };
const char* to_string(P2Status s);

struct AlgorithmIIIOptions {
    double delta = 1e-14;
    double lambda_floor = -1.0;  // negative selects default_lambda_floor
    int max_iter = 200000;
    double nu_cap = 1e8;
    // Growth rule: nu_k rose at each of the last `growth_window` steps and by
    // `growth_factor` overall. 0 disables it; it fires on feasible instances
    // whose optimal nu sits far above the starting point.
    double growth_factor = 10.0;
    int growth_window = 0;
    bool duality_certificate = true;  // flag divergence once g exceeds sum_n p_n
};

struct AlgorithmIIIStep {
    double objective;  // -g(lambda, nu)
    double nu_max;
    double max_power_violation;
    double max_amse_violation;
};

struct DualStateP2 {
    RVector lambda;
    RVector nu;
    CMatrix precoders;                    // At^{-1} H W diag(nu) at the returned multipliers
    std::vector<double> objective_trace;  // entry 0 is the starting point
    std::vector<AlgorithmIIIStep> steps;
    int iterations = 0;
    P2Status status = P2Status::MaxIter;
    Index trigger_user = -1;  // user that fired the divergence monitor, -1 if none or antenna-side
    std::string reason;       // short divergence diagnostic
};

/// Closed-form multiplier iteration for fixed receivers. Every sweep reads one
/// (lambda, nu) snapshot. Starts from lambda = nu = 1 unless initial values
/// are given.
DualStateP2 algorithm3(const NetworkConfig& cfg, const ChannelSet& set, const CVector& receivers,
                       const AlgorithmIIIOptions& opts = {}, const RVector* initial_lambda = nullptr,
                       const RVector* initial_nu = nullptr);

enum class P2Verdict { Feasible, Infeasible, Unverified };
const char* to_string(P2Verdict v);

struct P2Options {
    AlgorithmIIIOptions inner;
    double outer_tol = 1e-6;
    int max_outer = 200;
    bool warm_start = false;  // Algorithm III restarts from lambda = nu = 1 by default
    double amse_tol = 1e-6;
    double power_tol = 1e-8;
};

struct P2Report {
    Transceiver transceiver;
    CVector design_receivers;  // receivers the final precoders were computed for
    RVector lambda;
    RVector nu;
    double total_power = 0.0;
    RVector amse;
    RVector powers;
    std::vector<double> power_trace;  // total power after every outer iteration
    std::vector<DualStateP2> inner;
    int outer_iterations = 0;
    bool converged = false;
    P2Verdict verdict = P2Verdict::Unverified;
    Index trigger_user = -1;
    std::vector<bool> alpha_margin_negative;  // eps_k - sigma_k^2 |w_k|^2 <= 0 at the final receivers
};

/// Alternates Algorithm III, closed-form precoders and MAMSE receivers.
/// `initial_receivers` normally comes from a weighted-sum solve.
P2Report solve_p2(const NetworkConfig& cfg, const ChannelSet& set, const CVector& initial_receivers,
                  const P2Options& opts = {});

}  // namespace rcomp

#endif
