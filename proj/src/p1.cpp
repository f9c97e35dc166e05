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

#include "rcomp/p1.hpp"

#include <algorithm>
#include <cmath>

namespace rcomp {

double default_lambda_floor(const RVector& power_caps) {
    const double mean = power_caps.size() > 0 ? power_caps.mean() : 1.0;
    return 1e-12 * std::max(1.0, mean);
}

namespace {

void check_weights(const ChannelSet& set, const CVector& receivers, const RVector& weights) {
    set.validate();
    if (receivers.size() != set.users() || weights.size() != set.users())
        throw DimensionMismatch("receivers and weights must have length K");
}

// sum_i c_i h_i h_i^H (+ sum_i d_i R_bi when error weights are given).
CMatrix weighted_gram(const ChannelSet& set, const RVector& channel_w, const RVector* error_w) {
    const Index n = set.num_antennas();
    CMatrix out = CMatrix::Zero(n, n);
    for (Index i = 0; i < set.users(); ++i) {
        if (channel_w(i) != 0.0) out.noalias() += channel_w(i) * set.estimates.col(i) * set.estimates.col(i).adjoint();
        if (error_w && (*error_w)(i) != 0.0) out += (*error_w)(i) * set.error_cov[static_cast<std::size_t>(i)];
    }
    return 0.5 * (out + out.adjoint());
}

CMatrix sqrt_factor(const CMatrix& gram) {
    const HermitianEig eig = hermitian_eig(gram);
    const double radius = eig.values.size() ? eig.values.cwiseAbs().maxCoeff() : 0.0;
    RVector root(eig.values.size());
    for (Index i = 0; i < eig.values.size(); ++i) {
        if (eig.values(i) < -1e-12 * radius)
            throw IndefiniteInput("dual_factors: Gram matrix has a significantly negative eigenvalue");
        root(i) = std::sqrt(std::max(eig.values(i), 0.0));
    }
    return eig.vectors * root.asDiagonal();
}

struct Evaluation {
    CMatrix gamma;  // (R R^H + lambda)^{-1} F
    double objective;
};

Evaluation evaluate(const CMatrix& gram, const CMatrix& f, const RVector& lambda, const RVector& power_caps) {
    CMatrix a = gram;
    a.diagonal() += lambda.cast<cd>();
    Evaluation e;
    e.gamma = hermitian_pd_solve(a, f);
    e.objective = f.conjugate().cwiseProduct(e.gamma).sum().real() + lambda.dot(power_caps);  // tr{F^H Gamma}
    return e;
}

AlgorithmIStep make_step(const Evaluation& e, const RVector& lambda, const RVector& power_caps) {
    const RVector power = e.gamma.rowwise().squaredNorm();
    return {e.objective, std::max(0.0, (power - power_caps).maxCoeff()), lambda.minCoeff(), lambda.maxCoeff()};
}

}  // namespace

CMatrix build_a(const ChannelSet& set, const CVector& receivers, const RVector& weights, const RVector& lambda) {
    check_weights(set, receivers, weights);
    if (lambda.size() != set.num_antennas()) throw DimensionMismatch("lambda must have length N");
    if ((lambda.array() < 0.0).any()) throw std::invalid_argument("build_a: lambda must be non-negative");
    const RVector c = weights.cwiseProduct(receivers.cwiseAbs2());
    CMatrix a = weighted_gram(set, c, &c);
    a.diagonal() += lambda.cast<cd>();
    return a;
}

CMatrix precoders_from_dual(const CMatrix& a, const CMatrix& estimates, const CVector& receivers,
                            const RVector& weights) {
    if (a.rows() != estimates.rows() || receivers.size() != estimates.cols() || weights.size() != estimates.cols())
        throw DimensionMismatch("precoders_from_dual: inconsistent dimensions");
    const CVector scale = weights.cast<cd>().cwiseProduct(receivers);
    return hermitian_pd_solve(a, estimates * scale.asDiagonal());
}

DualFactors dual_factors(const ChannelSet& set, const CVector& receivers, const RVector& weights) {
    check_weights(set, receivers, weights);
    const RVector c1 = weights.cwiseProduct(weights).cwiseProduct(receivers.cwiseAbs2());
    const RVector c2 = weights.cwiseProduct(receivers.cwiseAbs2());
    return {sqrt_factor(weighted_gram(set, c1, nullptr)), sqrt_factor(weighted_gram(set, c2, &c2))};
}

double dual_objective_p1(const RVector& lambda, const CMatrix& f, const CMatrix& r, const RVector& power_caps) {
    if (lambda.size() != f.rows() || r.rows() != f.rows() || power_caps.size() != f.rows())
        throw DimensionMismatch("dual_objective_p1: inconsistent dimensions");
    CMatrix gram = r * r.adjoint();
    return evaluate(0.5 * (gram + gram.adjoint()), f, lambda, power_caps).objective;
}

double dual_function_p1(const RVector& lambda, const CMatrix& f, const CMatrix& r, const RVector& power_caps,
                        const CVector& receivers, const RVector& weights, const RVector& noise_var) {
    double constant = 0.0;
    for (Index k = 0; k < receivers.size(); ++k)
        constant += weights(k) * (noise_var(k) * std::norm(receivers(k)) + 1.0);
    return constant - dual_objective_p1(lambda, f, r, power_caps);
}

DualStateP1 algorithm1(const CMatrix& f, const CMatrix& r, const RVector& power_caps,
                       const AlgorithmIOptions& opts, const RVector* initial) {
    const Index n = f.rows();
    if (f.cols() != n || r.rows() != n || power_caps.size() != n)
        throw DimensionMismatch("algorithm1: F, R must be N x N and p length N");
    if (!(power_caps.array() > 0.0).all()) throw std::invalid_argument("algorithm1: p_n must be > 0");
    if (!(opts.delta > 0.0)) throw std::invalid_argument("algorithm1: delta must be > 0");
    const double floor = opts.lambda_floor < 0.0 ? default_lambda_floor(power_caps) : opts.lambda_floor;

    CMatrix gram = r * r.adjoint();
    gram = 0.5 * (gram + gram.adjoint());

    DualStateP1 st;
    st.lambda = RVector::Ones(n);
    if (initial) {
        if (initial->size() != n) throw DimensionMismatch("algorithm1: initial lambda must have length N");
        st.lambda = initial->cwiseMax(floor);
    }

    Evaluation cur = evaluate(gram, f, st.lambda, power_caps);
    st.objective_trace.push_back(cur.objective);
    st.steps.push_back(make_step(cur, st.lambda, power_caps));

    for (int it = 0; it < opts.max_iter; ++it) {
        // One synchronous sweep: every antenna reads the same snapshot.
        RVector next_lambda(n);
        for (Index i = 0; i < n; ++i) {
            const double beta = st.lambda(i) * st.lambda(i) * cur.gamma.row(i).squaredNorm();
            next_lambda(i) = std::max(floor, std::sqrt(beta / power_caps(i)));
        }
        Evaluation next = evaluate(gram, f, next_lambda, power_caps);
        ++st.iterations;
        const double decrease = cur.objective - next.objective;
        if (decrease < 0.0 && -decrease <= 1e-13 * std::max(1.0, std::abs(cur.objective))) {
            // Rounding-level rise: keep the better snapshot.
            st.converged = true;
            break;
        }
        st.lambda = next_lambda;
        cur = std::move(next);
        st.objective_trace.push_back(cur.objective);
        st.steps.push_back(make_step(cur, st.lambda, power_caps));
        if (decrease < opts.delta) {
            st.converged = true;
            break;
        }
    }
    return st;
}

CMatrix row_normalized_precoders(const CMatrix& estimates, const RVector& power_caps) {
    if (power_caps.size() != estimates.rows()) throw DimensionMismatch("power caps must have length N");
    CMatrix b = estimates;
    for (Index n = 0; n < b.rows(); ++n) {
        const double norm = b.row(n).norm();
        if (norm > 0.0) b.row(n) *= std::sqrt(power_caps(n)) / norm;
    }
    return b;
}

bool is_non_increasing(const std::vector<double>& trace, double tol) {
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (trace[i] > trace[i - 1] + tol) return false;
    return true;
}

P1Report algorithm2(const NetworkConfig& cfg, const ChannelSet& set, const P1Options& opts) {
    cfg.validate();
    set.validate();
    if (set.num_antennas() != cfg.num_antennas() || set.users() != cfg.users)
        throw DimensionMismatch("algorithm2: channel set does not match the network");

    P1Report rep;
    CMatrix b = row_normalized_precoders(set.estimates, cfg.power_caps);
    CVector w = mamse_receivers(set, b, cfg.noise_var);
    double objective = weighted_sum_amse(set, {b, w}, cfg.weights, cfg.noise_var);
    rep.objective_trace.push_back(objective);
    rep.design_receivers = w;
    RVector lambda = RVector::Ones(cfg.num_antennas());

    for (int outer = 0; outer < opts.max_outer; ++outer) {
        const DualFactors factors = dual_factors(set, w, cfg.weights);
        DualStateP1 inner = algorithm1(factors.f, factors.r, cfg.power_caps, opts.inner,
                                       opts.warm_start ? &lambda : nullptr);
        lambda = inner.lambda;
        rep.inner.push_back(std::move(inner));

        const CMatrix a = build_a(set, w, cfg.weights, lambda);
        rep.design_receivers = w;
        b = precoders_from_dual(a, set.estimates, w, cfg.weights);
        w = mamse_receivers(set, b, cfg.noise_var);
        const double next = weighted_sum_amse(set, {b, w}, cfg.weights, cfg.noise_var);
        rep.objective_trace.push_back(next);
        ++rep.outer_iterations;
        const double decrease = objective - next;
        objective = next;
        if (decrease < opts.outer_tol) {
            rep.converged = true;
            break;
        }
    }

    RVector powers = per_antenna_power(b);
    if (((powers - cfg.power_caps).array() > 1e-8).any()) {
        const double factor = (cfg.power_caps.array() / powers.array()).sqrt().minCoeff();
        b *= factor;
        w = mamse_receivers(set, b, cfg.noise_var);
        powers = per_antenna_power(b);
        rep.rescaled = true;
    }

    rep.transceiver = {b, w};
    rep.lambda = lambda;
    rep.powers = powers;
    rep.objective = weighted_sum_amse(set, rep.transceiver, cfg.weights, cfg.noise_var);
    return rep;
}

}  // namespace rcomp
