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

#include "rcomp/p2.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

namespace rcomp {

namespace {

void check_inputs(const ChannelSet& set, const CVector& receivers, const RVector& nu, const RVector& lambda) {
    set.validate();
    if (receivers.size() != set.users() || nu.size() != set.users())
        throw DimensionMismatch("receivers and nu must have length K");
    if (lambda.size() != set.num_antennas()) throw DimensionMismatch("lambda must have length N");
    if ((nu.array() < 0.0).any() || (lambda.array() < 0.0).any())
        throw std::invalid_argument("multipliers must be non-negative");
}

CMatrix dual_precoders(const CMatrix& a_inv, const CMatrix& estimates, const CVector& receivers,
                       const RVector& nu) {
    const CVector scale = nu.cast<cd>().cwiseProduct(receivers);
    return a_inv * (estimates * scale.asDiagonal());
}

// |B^H h_k|^2 + sum_j b_j^H R_bk b_j
double received_power(const ChannelSet& set, const CMatrix& b, Index k) {
    const CMatrix& r = set.error_cov[static_cast<std::size_t>(k)];
    double acc = (b.adjoint() * set.estimates.col(k)).squaredNorm();
    acc += (b.adjoint() * r * b).trace().real();
    return acc;
}

}  // namespace

CMatrix build_a_tilde(const ChannelSet& set, const CVector& receivers, const RVector& nu, const RVector& lambda) {
    check_inputs(set, receivers, nu, lambda);
    const Index n = set.num_antennas();
    CMatrix a = CMatrix::Identity(n, n);
    for (Index i = 0; i < set.users(); ++i) {
        const double c = nu(i) * std::norm(receivers(i));
        if (c == 0.0) continue;
        a.noalias() += c * set.estimates.col(i) * set.estimates.col(i).adjoint();
        a += c * set.error_cov[static_cast<std::size_t>(i)];
    }
    a.diagonal() += lambda.cast<cd>();
    return 0.5 * (a + a.adjoint());
}

CMatrix precoders_from_dual_p2(const CMatrix& a_tilde, const CMatrix& estimates, const CVector& receivers,
                               const RVector& nu) {
    if (a_tilde.rows() != estimates.rows() || receivers.size() != estimates.cols() || nu.size() != estimates.cols())
        throw DimensionMismatch("precoders_from_dual_p2: inconsistent dimensions");
    return dual_precoders(hermitian_inverse(a_tilde), estimates, receivers, nu);
}

std::vector<CMatrix> w_tilde_blocks(const ChannelSet& set, const CVector& receivers) {
    set.validate();
    if (receivers.size() != set.users()) throw DimensionMismatch("receivers must have length K");
    std::vector<CMatrix> out;
    out.reserve(static_cast<std::size_t>(set.users()));
    for (Index k = 0; k < set.users(); ++k) {
        CMatrix m = set.estimates.col(k) * set.estimates.col(k).adjoint() + set.error_cov[static_cast<std::size_t>(k)];
        out.push_back(psd_sqrt(std::norm(receivers(k)) * m));
    }
    return out;
}

GbarUpdates gbar_updates(const ChannelSet& set, const CVector& receivers, const RVector& nu,
                         const RVector& lambda) {
    const CMatrix a_inv = hermitian_inverse(build_a_tilde(set, receivers, nu, lambda));
    const std::vector<CMatrix> wt = w_tilde_blocks(set, receivers);
    const Index n = set.num_antennas();
    const Index users = set.users();

    GbarUpdates out;
    out.gamma_tilde = dual_precoders(a_inv, set.estimates, receivers, nu);
    for (Index k = 0; k < users; ++k) {
        const CVector y = a_inv * set.estimates.col(k) * receivers(k);
        CVector g(n * users + n);
        for (Index j = 0; j < users; ++j)
            g.segment(j * n, n) = nu(k) * nu(j) * (wt[static_cast<std::size_t>(j)].adjoint() * y);
        g.tail(n) = nu(k) * lambda.cast<cd>().cwiseProduct(y);
        out.gbar.push_back(std::move(g));
        out.g_tilde.push_back(nu(k) * wt[static_cast<std::size_t>(k)].adjoint() * out.gamma_tilde);
    }
    out.u = lambda.cast<cd>().asDiagonal() * out.gamma_tilde;
    return out;
}

CVector gbar_direct(const ChannelSet& set, const CVector& receivers, const RVector& nu, const RVector& lambda,
                    Index user) {
    check_inputs(set, receivers, nu, lambda);
    if (user < 0 || user >= set.users()) throw DimensionMismatch("user index out of range");
    if (!(nu.array() > 0.0).all() || !(lambda.array() > 0.0).all())
        throw std::invalid_argument("gbar_direct: multipliers must be positive");
    const std::vector<CMatrix> wt = w_tilde_blocks(set, receivers);
    const Index n = set.num_antennas();
    const Index users = set.users();
    const Index m = n * users + n;

    CMatrix wbar(n, m);
    for (Index j = 0; j < users; ++j) wbar.middleCols(j * n, n) = wt[static_cast<std::size_t>(j)];
    wbar.rightCols(n) = CMatrix::Identity(n, n);

    RVector ups_inv(m);
    for (Index j = 0; j < users; ++j) ups_inv.segment(j * n, n).setConstant(1.0 / nu(j));
    ups_inv.tail(n) = lambda.cwiseInverse();

    CMatrix lhs = wbar.adjoint() * wbar;
    lhs.diagonal() += ups_inv.cast<cd>();
    const CVector rhs = wbar.adjoint() * set.estimates.col(user) * receivers(user);
    return nu(user) * lhs.llt().solve(rhs);
}

RhoCoefficients rho_coefficients(const ChannelSet& set, const CVector& receivers, Index user,
                                 const CVector& gbar_k, const CMatrix& g_tilde_k, double alpha_k) {
    set.validate();
    const Index n = set.num_antennas();
    const Index users = set.users();
    if (user < 0 || user >= users) throw DimensionMismatch("user index out of range");
    if (gbar_k.size() != n * users + n) throw DimensionMismatch("gbar_k must have length NK + N");
    const std::vector<CMatrix> wt = w_tilde_blocks(set, receivers);

    CVector wg = gbar_k.tail(n);
    for (Index j = 0; j < users; ++j) wg += wt[static_cast<std::size_t>(j)] * gbar_k.segment(j * n, n);

    const CVector h = set.estimates.col(user);
    const cd w = receivers(user);
    RhoCoefficients rc;
    rc.rho1 = std::norm(w) * h.squaredNorm();
    rc.rho2 = 2.0 * (std::conj(w) * h.dot(wg)).real() + alpha_k;
    rc.rho3 = g_tilde_k.squaredNorm();
    return rc;
}

RVector p2_alpha(const NetworkConfig& cfg, const CVector& receivers) {
    if (receivers.size() != cfg.users) throw DimensionMismatch("receivers must have length K");
    RVector a(cfg.users);
    for (Index k = 0; k < cfg.users; ++k)
        a(k) = 1.0 + cfg.noise_var(k) * std::norm(receivers(k)) - cfg.amse_targets(k);
    return a;
}

double nu_update(double rho1, double rho2, double rho3) {
    if (!(rho1 > DBL_MIN)) throw InfeasibleUser("nu_update: rho1 is zero, the user cannot be served", -1);
    if (!(rho2 > 0.0) || !(rho3 >= 0.0) || !std::isfinite(rho1) || !std::isfinite(rho2) || !std::isfinite(rho3))
        throw std::domain_error("nu_update: expected rho2 > 0 and rho3 >= 0, got rho2 = " + std::to_string(rho2) +
                                ", rho3 = " + std::to_string(rho3));
    const double p3 = rho2 * rho2 * rho2;
    const double c = 108.0 * rho1 * rho1 * rho3;
    const double zeta = std::sqrt(c * (c + 4.0 * p3));
    const double mu2 = std::cbrt(0.5 * (2.0 * p3 + c + zeta));
    // mu1 * mu2 = rho2^2; dividing avoids the cancellation in 2 rho2^3 + c - zeta.
    const double mu1 = rho2 * rho2 / mu2;
    double nu = (rho2 + mu1 + mu2) / (6.0 * rho1);

    for (int it = 0; it < 8; ++it) {
        const double r = 2.0 * rho1 * nu * nu * nu - rho2 * nu * nu - rho3;
        const double scale = 2.0 * rho1 * nu * nu * nu + rho2 * nu * nu + rho3;
        if (std::abs(r) <= 1e-12 * scale) break;
        nu -= r / (2.0 * nu * (3.0 * rho1 * nu - rho2));
    }
    return nu;
}

double lambda_update_p2(double rho0, double power_cap, double floor) {
    if (!(power_cap > 0.0)) throw std::invalid_argument("lambda_update_p2: p must be > 0");
    if (rho0 < 0.0) throw std::invalid_argument("lambda_update_p2: rho0 must be >= 0");
    return std::max(floor, std::sqrt(rho0 / power_cap));
}

double dual_function_p2(const NetworkConfig& cfg, const ChannelSet& set, const CVector& receivers,
                        const RVector& nu, const RVector& lambda) {
    const CMatrix a_inv = hermitian_inverse(build_a_tilde(set, receivers, nu, lambda));
    const RVector alpha = p2_alpha(cfg, receivers);
    double g = nu.dot(alpha) - lambda.dot(cfg.power_caps);
    for (Index k = 0; k < set.users(); ++k) {
        const CVector h = set.estimates.col(k);
        g -= nu(k) * nu(k) * std::norm(receivers(k)) * h.dot(a_inv * h).real();
    }
    return g;
}

double dual_objective_p2(const NetworkConfig& cfg, const ChannelSet& set, const CVector& receivers,
                         const RVector& nu, const RVector& lambda) {
    return -dual_function_p2(cfg, set, receivers, nu, lambda);
}

const char* to_string(P2Status s) {
    switch (s) {
        case P2Status::Converged: return "converged";
        case P2Status::Diverging: return "diverging";
        case P2Status::MaxIter: return "max_iter";
    }
    return "unknown";
}

const char* to_string(P2Verdict v) {
    switch (v) {
        case P2Verdict::Feasible: return "feasible";
        case P2Verdict::Infeasible: return "infeasible";
        case P2Verdict::Unverified: return "unverified";
    }
    return "unknown";
}

namespace {

struct P2Eval {
    CMatrix b;
    double objective;
};

P2Eval evaluate_p2(const NetworkConfig& cfg, const ChannelSet& set, const CVector& w, const RVector& alpha,
                   const RVector& nu, const RVector& lambda) {
    P2Eval e;
    const CVector scale = nu.cast<cd>().cwiseProduct(w);
    e.b = hermitian_pd_solve(build_a_tilde(set, w, nu, lambda), set.estimates * scale.asDiagonal());
    // nu_k^2 |w_k|^2 h^H At^{-1} h = nu_k Re{conj(w_k) h^H b_k}
    double quad = 0.0;
    for (Index k = 0; k < set.users(); ++k)
        quad += nu(k) * (std::conj(w(k)) * set.estimates.col(k).dot(e.b.col(k))).real();
    e.objective = quad + lambda.dot(cfg.power_caps) - nu.dot(alpha);
    return e;
}

AlgorithmIIIStep make_step(const NetworkConfig& cfg, const ChannelSet& set, const CVector& w, const P2Eval& e,
                           const RVector& nu) {
    const RVector power = per_antenna_power(e.b);
    const RVector amse = user_amse(set, {e.b, w}, cfg.noise_var);
    return {e.objective, nu.maxCoeff(), std::max(0.0, (power - cfg.power_caps).maxCoeff()),
            std::max(0.0, (amse - cfg.amse_targets).maxCoeff())};
}

}  // namespace

DualStateP2 algorithm3(const NetworkConfig& cfg, const ChannelSet& set, const CVector& receivers,
                       const AlgorithmIIIOptions& opts, const RVector* initial_lambda, const RVector* initial_nu) {
    cfg.validate();
    set.validate();
    const Index n = set.num_antennas();
    const Index users = set.users();
    if (n != cfg.num_antennas() || users != cfg.users || receivers.size() != users)
        throw DimensionMismatch("algorithm3: channel set, network and receivers disagree");
    for (Index k = 0; k < users; ++k)
        if (!(cfg.amse_targets(k) > 0.0 && cfg.amse_targets(k) < 1.0))
            throw std::invalid_argument("algorithm3: AMSE targets must lie in (0, 1)");
    if (!(opts.delta > 0.0)) throw std::invalid_argument("algorithm3: delta must be > 0");
    const double floor = opts.lambda_floor < 0.0 ? default_lambda_floor(cfg.power_caps) : opts.lambda_floor;
    const double cap_sum = cfg.power_caps.sum();

    DualStateP2 st;
    st.lambda = RVector::Ones(n);
    st.nu = RVector::Ones(users);
    if (initial_lambda) {
        if (initial_lambda->size() != n) throw DimensionMismatch("algorithm3: initial lambda must have length N");
        st.lambda = initial_lambda->cwiseMax(floor);
    }
    if (initial_nu) {
        if (initial_nu->size() != users) throw DimensionMismatch("algorithm3: initial nu must have length K");
        st.nu = initial_nu->cwiseMax(1e-12);
    }

    const RVector alpha = p2_alpha(cfg, receivers);
    RVector rho1(users);
    for (Index k = 0; k < users; ++k) rho1(k) = std::norm(receivers(k)) * set.estimates.col(k).squaredNorm();

    P2Eval cur = evaluate_p2(cfg, set, receivers, alpha, st.nu, st.lambda);
    st.precoders = cur.b;
    st.objective_trace.push_back(cur.objective);
    st.steps.push_back(make_step(cfg, set, receivers, cur, st.nu));

    for (Index k = 0; k < users; ++k) {
        if (!(rho1(k) > DBL_MIN)) {
            st.status = P2Status::Diverging;
            st.trigger_user = k;
            st.reason = "rho1 = 0";
            return st;
        }
    }

    std::deque<RVector> history{st.nu};
    const auto window = static_cast<std::size_t>(std::max(0, opts.growth_window));

    for (int it = 0; it < opts.max_iter; ++it) {
        RVector next_nu(users);
        for (Index k = 0; k < users; ++k) {
            const double w2 = std::norm(receivers(k));
            const cd hb = set.estimates.col(k).dot(cur.b.col(k));  // h_k^H b_k
            const double rho2 = 2.0 * st.nu(k) * rho1(k) - 2.0 * (std::conj(receivers(k)) * hb).real() + alpha(k);
            const double rho3 = st.nu(k) * st.nu(k) * w2 * received_power(set, cur.b, k);
            next_nu(k) = nu_update(rho1(k), rho2, rho3);
        }
        RVector next_lambda(n);
        for (Index i = 0; i < n; ++i) {
            const double rho0 = st.lambda(i) * st.lambda(i) * cur.b.row(i).squaredNorm();
            next_lambda(i) = lambda_update_p2(rho0, cfg.power_caps(i), floor);
        }

        P2Eval next = evaluate_p2(cfg, set, receivers, alpha, next_nu, next_lambda);
        ++st.iterations;
        const double decrease = cur.objective - next.objective;
        const bool rounding_rise = decrease < 0.0 && -decrease <= 1e-13 * std::max(1.0, std::abs(cur.objective));
        if (rounding_rise) {
            st.status = P2Status::Converged;
            return st;
        }

        st.lambda = next_lambda;
        st.nu = next_nu;
        cur = std::move(next);
        st.precoders = cur.b;
        st.objective_trace.push_back(cur.objective);
        st.steps.push_back(make_step(cfg, set, receivers, cur, st.nu));

        Index k_max = 0;
        st.nu.maxCoeff(&k_max);
        if (st.nu(k_max) > opts.nu_cap) {
            st.status = P2Status::Diverging;
            st.trigger_user = k_max;
            st.reason = "nu above cap";
            return st;
        }
        history.push_back(st.nu);
        if (history.size() > window + 1) history.pop_front();
        if (window > 0 && history.size() == window + 1) {
            for (Index k = 0; k < users; ++k) {
                bool rising = true;
                for (std::size_t j = 1; j < history.size() && rising; ++j) rising = history[j](k) > history[j - 1](k);
                if (rising && history.back()(k) >= opts.growth_factor * history.front()(k)) {
                    st.status = P2Status::Diverging;
                    st.trigger_user = k;
                    st.reason = "nu growth";
                    return st;
                }
            }
        }
        // Weak duality: any feasible point spends at most sum_n p_n in total.
        if (opts.duality_certificate && -cur.objective > cap_sum + 1e-9 * std::max(1.0, cap_sum)) {
            st.status = P2Status::Diverging;
            st.trigger_user = k_max;
            st.reason = "dual value above total power budget";
            return st;
        }

        if (decrease < opts.delta) {
            st.status = P2Status::Converged;
            return st;
        }
    }
    st.status = P2Status::MaxIter;
    return st;
}

P2Report solve_p2(const NetworkConfig& cfg, const ChannelSet& set, const CVector& initial_receivers,
                  const P2Options& opts) {
    cfg.validate();
    set.validate();
    if (set.num_antennas() != cfg.num_antennas() || set.users() != cfg.users)
        throw DimensionMismatch("solve_p2: channel set does not match the network");
    if (initial_receivers.size() != cfg.users) throw DimensionMismatch("solve_p2: receivers must have length K");

    P2Report rep;
    CVector w = initial_receivers;
    CMatrix b = CMatrix::Zero(cfg.num_antennas(), cfg.users);
    RVector lambda = RVector::Ones(cfg.num_antennas());
    RVector nu = RVector::Ones(cfg.users);
    rep.design_receivers = w;
    double previous = std::numeric_limits<double>::infinity();
    bool diverged = false;

    for (int outer = 0; outer < opts.max_outer; ++outer) {
        const bool warm = opts.warm_start && outer > 0;
        DualStateP2 st = algorithm3(cfg, set, w, opts.inner, warm ? &lambda : nullptr, warm ? &nu : nullptr);
        const P2Status status = st.status;
        const Index trigger = st.trigger_user;
        lambda = st.lambda;
        nu = st.nu;
        b = st.precoders;
        rep.design_receivers = w;
        rep.inner.push_back(std::move(st));
        ++rep.outer_iterations;
        if (status == P2Status::Diverging) {
            diverged = true;
            rep.trigger_user = trigger;
            break;
        }
        w = mamse_receivers(set, b, cfg.noise_var);
        const double total = b.squaredNorm();
        rep.power_trace.push_back(total);
        if (previous - total < opts.outer_tol) {
            rep.converged = true;
            break;
        }
        previous = total;
    }

    rep.transceiver = {b, w};
    rep.lambda = lambda;
    rep.nu = nu;
    rep.total_power = b.squaredNorm();
    rep.amse = user_amse(set, rep.transceiver, cfg.noise_var);
    rep.powers = per_antenna_power(b);
    rep.alpha_margin_negative.resize(static_cast<std::size_t>(cfg.users));
    for (Index k = 0; k < cfg.users; ++k)
        rep.alpha_margin_negative[static_cast<std::size_t>(k)] =
            cfg.amse_targets(k) - cfg.noise_var(k) * std::norm(w(k)) <= 0.0;

    if (diverged) {
        rep.verdict = P2Verdict::Infeasible;
    } else {
        const bool targets = ((rep.amse - cfg.amse_targets).array() <= opts.amse_tol).all();
        const bool caps = ((rep.powers - cfg.power_caps).array() <= opts.power_tol).all();
        rep.verdict = targets && caps ? P2Verdict::Feasible : P2Verdict::Unverified;
    }
    return rep;
}

}  // namespace rcomp
