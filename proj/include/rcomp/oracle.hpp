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

#ifndef RCOMP_ORACLE_HPP
#define RCOMP_ORACLE_HPP

#include "rcomp/p2.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rcomp {

// Reference solvers and residual checks that share no iteration logic with
// the distributed algorithms.

struct BracketFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PgOptions {
    double tol = 1e-10;        // projected-gradient residual, scaled by max(1, max p)
    int max_iter = 200000;
    double initial_step = -1;  // negative selects 1 / (|F|_F^2 + 1)
};

struct PgResultP1 {
    RVector lambda;
    double value = 0.0;          // minimization-form dual objective
    std::vector<double> trace;   // accepted values, non-increasing
    double residual = 0.0;       // |lambda - max(0, lambda - grad)|_inf
    int iterations = 0;
    bool converged = false;
};

/// Projected gradient with Armijo backtracking on
///   phi(lambda) = tr{F^H (R R^H + diag(lambda))^{-1} F} + lambda . p,  lambda >= 0,
/// using d phi / d lambda_n = p_n - [Gamma Gamma^H]_nn. Singular points count
/// as +infinity.
PgResultP1 pg_dual_p1(const CMatrix& f, const CMatrix& r, const RVector& power_caps, const PgOptions& opts = {});

struct PgResultP2 {
    RVector lambda;
    RVector nu;
    double value = 0.0;  // g(lambda, nu), maximization form
    std::vector<double> trace;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    bool unbounded = false;  // g exceeded sum_n p_n, so no feasible point exists
};

/// Same scheme on the power-minimization dual over lambda >= 0, nu >= 1e-12
/// with d(-g)/d lambda_n = p_n - power_n and d(-g)/d nu_k = eps_k - amse_k.
PgResultP2 pg_dual_p2(const NetworkConfig& cfg, const ChannelSet& set, const CVector& receivers,
                      const PgOptions& opts = {});

/// argmin_{nu > 0} nu^2 rho1 - nu rho2 + rho3 / nu by golden-section search
/// on a doubled bracket, then bisection on the sign of the derivative.
/// Throws BracketFailure when no interior minimizer can be bracketed.
double scalar_min(double rho1, double rho2, double rho3);

struct KKTReport {
    double power_violation = 0.0;  // max_n (power_n - p_n)^+, watts
    double slackness = 0.0;        // max of lambda_n |power_n - p_n| / (1 + lambda_n p_n) and the nu analogue
    double amse_violation = 0.0;   // max_k (amse_k - eps_k)^+, power-minimization only
    double dual_gap = 0.0;         // |primal - g| / max(1, |primal|)
    double primal = 0.0;
    double dual = 0.0;
};

/// Residuals of a weighted-sum solution. `receivers` are the receivers the
/// precoders were designed for.
KKTReport kkt_report_p1(const RVector& lambda, const CMatrix& precoders, const CVector& receivers,
                        const NetworkConfig& cfg, const ChannelSet& set);

/// Residuals of a power-minimization solution.
KKTReport kkt_report_p2(const RVector& lambda, const RVector& nu, const CMatrix& precoders,
                        const CVector& receivers, const NetworkConfig& cfg, const ChannelSet& set);

void write_kkt_header(std::ostream& os);
/// One CSV row: label,power_violation,slackness,amse_violation,dual_gap,primal,dual
void write_kkt_row(std::ostream& os, const std::string& label, const KKTReport& rep);

struct Lemma1Result {
    double direct = 0.0;       // tr{F^H (R R^H + lambda)^{-1} F} + lambda . p
    double variational = 0.0;  // sum_i g_i^H lambda^{-1} g_i + t_i^H t_i + lambda . p at the closed forms
    double residual = 0.0;     // |variational - direct| / max(1, direct)
    double constraint_residual = 0.0;  // max_i |R t_i + g_i - f_i| / max(1, |F|)
};

/// Evaluates the variational form at g_i = lambda tau_i, t_i = R^H tau_i with
/// tau_i = (R R^H + lambda)^{-1} f_i, solved by LU. Requires lambda > 0.
Lemma1Result lemma1_check(const RVector& lambda, const CMatrix& f, const CMatrix& r, const RVector& power_caps);

}  // namespace rcomp

#endif
