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

#include "rcomp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>

namespace rcomp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Returns +inf outside the domain; fills the gradient otherwise.
using Objective = std::function<double(const RVector&, RVector&)>;

struct PgCore {
    RVector x;
    double value = kInf;
    std::vector<double> trace;
    double residual = kInf;
    int iterations = 0;
    bool converged = false;
    bool stopped = false;
};

PgCore pg_minimize(const Objective& fun, const RVector& x0, const RVector& lower, double step, double tol,
                   int max_iter, const std::function<bool(double)>& stop) {
    PgCore st;
    st.x = x0.cwiseMax(lower);
    RVector g(st.x.size());
    st.value = fun(st.x, g);
    if (!std::isfinite(st.value)) throw std::runtime_error("projected gradient: infeasible starting point");
    st.trace.push_back(st.value);

    RVector gn(st.x.size());
    for (int it = 0; it < max_iter; ++it) {
        st.residual = (st.x - (st.x - g).cwiseMax(lower)).cwiseAbs().maxCoeff();
        if (st.residual <= tol) {
            st.converged = true;
            break;
        }
        bool accepted = false;
        RVector xn, d;
        double fn = kInf;
        for (int bt = 0; bt < 200; ++bt) {
            xn = (st.x - step * g).cwiseMax(lower);
            d = xn - st.x;
            fn = fun(xn, gn);
            const double bound = st.value + g.dot(d) + d.squaredNorm() / (2.0 * step) +
                                 4.0 * std::numeric_limits<double>::epsilon() * std::abs(st.value);
            if (std::isfinite(fn) && fn <= bound) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted || d.squaredNorm() == 0.0) break;

        // Barzilai-Borwein proposal for the next trial step.
        const RVector y = gn - g;
        const double sy = d.dot(y);
        step = sy > 0.0 ? d.squaredNorm() / sy : 2.0 * step;
        step = std::clamp(step, 1e-30, 1e30);

        st.x = xn;
        st.value = fn;
        g = gn;
        st.trace.push_back(fn);
        ++st.iterations;
        if (stop && stop(fn)) {
            st.stopped = true;
            break;
        }
    }
    return st;
}

}  // namespace

PgResultP1 pg_dual_p1(const CMatrix& f, const CMatrix& r, const RVector& power_caps, const PgOptions& opts) {
    const Index n = f.rows();
    if (f.cols() != n || r.rows() != n || power_caps.size() != n)
        throw DimensionMismatch("pg_dual_p1: inconsistent dimensions");
    if (!(power_caps.array() > 0.0).all()) throw std::invalid_argument("pg_dual_p1: p_n must be > 0");

    const CMatrix gram = r * r.adjoint();
    Objective fun = [&](const RVector& lambda, RVector& grad) {
        CMatrix m = 0.5 * (gram + gram.adjoint());
        m.diagonal() += lambda.cast<cd>();
        Eigen::LLT<CMatrix> llt(m);
        if (llt.info() != Eigen::Success) return kInf;
        const CMatrix gamma = llt.solve(f);
        const double value = (f.adjoint() * gamma).trace().real() + lambda.dot(power_caps);
        if (!std::isfinite(value) || !gamma.allFinite()) return kInf;
        grad = power_caps - gamma.rowwise().squaredNorm();
        return value;
    };

    const double step = opts.initial_step > 0.0 ? opts.initial_step : 1.0 / (f.squaredNorm() + 1.0);
    const double tol = opts.tol * std::max(1.0, power_caps.maxCoeff());
    PgCore core = pg_minimize(fun, RVector::Ones(n), RVector::Zero(n), step, tol, opts.max_iter, nullptr);

    PgResultP1 out;
    out.lambda = core.x;
    out.value = core.value;
    out.trace = std::move(core.trace);
    out.residual = core.residual;
    out.iterations = core.iterations;
    out.converged = core.converged;
    return out;
}

PgResultP2 pg_dual_p2(const NetworkConfig& cfg, const ChannelSet& set, const CVector& receivers,
                      const PgOptions& opts) {
    cfg.validate();
    set.validate();
    const Index n = set.num_antennas();
    const Index users = set.users();
    if (n != cfg.num_antennas() || users != cfg.users || receivers.size() != users)
        throw DimensionMismatch("pg_dual_p2: inconsistent dimensions");

    RVector alpha(users);
    for (Index k = 0; k < users; ++k)
        alpha(k) = 1.0 + cfg.noise_var(k) * std::norm(receivers(k)) - cfg.amse_targets(k);

    // x = [lambda; nu]
    Objective fun = [&](const RVector& x, RVector& grad) {
        const RVector lambda = x.head(n);
        const RVector nu = x.tail(users);
        CMatrix a = CMatrix::Identity(n, n);
        for (Index i = 0; i < users; ++i) {
            const double c = nu(i) * std::norm(receivers(i));
            a += c * (set.estimates.col(i) * set.estimates.col(i).adjoint() +
                      set.error_cov[static_cast<std::size_t>(i)]);
        }
        a = 0.5 * (a + a.adjoint());
        a.diagonal() += lambda.cast<cd>();
        Eigen::LLT<CMatrix> llt(a);
        if (llt.info() != Eigen::Success) return kInf;
        const CVector scale = nu.cast<cd>().cwiseProduct(receivers);
        const CMatrix b = llt.solve(set.estimates * scale.asDiagonal());
        double value = lambda.dot(cfg.power_caps) - nu.dot(alpha);
        grad.resize(n + users);
        grad.head(n) = cfg.power_caps - b.rowwise().squaredNorm();
        for (Index k = 0; k < users; ++k) {
            value += nu(k) * (std::conj(receivers(k)) * set.estimates.col(k).dot(b.col(k))).real();
            grad(n + k) = cfg.amse_targets(k) - amse(set.estimates.col(k), set.error_cov[static_cast<std::size_t>(k)],
                                                     b, k, receivers(k), cfg.noise_var(k));
        }
        return std::isfinite(value) ? value : kInf;
    };

    RVector lower(n + users);
    lower.head(n).setZero();
    lower.tail(users).setConstant(1e-12);
    const double budget = cfg.power_caps.sum();
    const auto stop = [&](double value) { return -value > budget + 1e-9 * std::max(1.0, budget); };

    const CMatrix hw = set.estimates * receivers.asDiagonal();
    const double step = opts.initial_step > 0.0 ? opts.initial_step : 1.0 / (hw.squaredNorm() + 1.0);
    const double tol = opts.tol * std::max(1.0, cfg.power_caps.maxCoeff());
    PgCore core = pg_minimize(fun, RVector::Ones(n + users), lower, step, tol, opts.max_iter, stop);

    PgResultP2 out;
    out.lambda = core.x.head(n);
    out.nu = core.x.tail(users);
    out.value = -core.value;
    out.trace.reserve(core.trace.size());
    for (double v : core.trace) out.trace.push_back(-v);
    out.residual = core.residual;
    out.iterations = core.iterations;
    out.converged = core.converged;
    out.unbounded = core.stopped;
    return out;
}

double scalar_min(double rho1, double rho2, double rho3) {
    if (!(rho1 > 0.0) || !(rho3 >= 0.0)) throw std::invalid_argument("scalar_min: need rho1 > 0 and rho3 >= 0");
    const auto obj = [&](double v) { return v * v * rho1 - v * rho2 + rho3 / v; };
    const auto slope = [&](double v) { return 2.0 * rho1 * v - rho2 - rho3 / (v * v); };

    const double lo = 1e-12;
    if (slope(lo) >= 0.0) throw BracketFailure("scalar_min: objective increasing from the lower bracket end");
    double hi = 1.0;
    while (!(obj(hi) > obj(0.5 * hi) && slope(hi) > 0.0)) {
        hi *= 2.0;
        if (!std::isfinite(hi) || hi > 1e300) throw BracketFailure("scalar_min: no upper bracket");
    }

    // Golden section narrows the bracket to where value comparisons stop resolving.
    const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = obj(c), fd = obj(d);
    while (b - a > 1e-7 * b) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = obj(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = obj(d);
        }
    }
    // Widen until the derivative changes sign, then bisect on it.
    double left = a, right = b;
    while (slope(left) > 0.0 && left > lo) left = std::max(lo, left - (b - a));
    while (slope(right) < 0.0 && right < hi) right = std::min(hi, right + (b - a));
    if (slope(left) > 0.0 || slope(right) < 0.0) {
        left = lo;
        right = hi;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (left + right);
        if (mid <= left || mid >= right) break;
        (slope(mid) < 0.0 ? left : right) = mid;
    }
    return 0.5 * (left + right);
}

KKTReport kkt_report_p1(const RVector& lambda, const CMatrix& precoders, const CVector& receivers,
                        const NetworkConfig& cfg, const ChannelSet& set) {
    cfg.validate();
    set.validate();
    if (lambda.size() != cfg.num_antennas()) throw DimensionMismatch("kkt_report_p1: lambda must have length N");
    KKTReport rep;
    const RVector power = per_antenna_power(precoders);
    for (Index n = 0; n < power.size(); ++n) {
        const double diff = power(n) - cfg.power_caps(n);
        rep.power_violation = std::max(rep.power_violation, diff);
        rep.slackness = std::max(rep.slackness, lambda(n) * std::abs(diff) / (1.0 + lambda(n) * cfg.power_caps(n)));
    }
    rep.primal = weighted_sum_amse(set, {precoders, receivers}, cfg.weights, cfg.noise_var);
    const DualFactors factors = dual_factors(set, receivers, cfg.weights);
    rep.dual = dual_function_p1(lambda, factors.f, factors.r, cfg.power_caps, receivers, cfg.weights, cfg.noise_var);
    rep.dual_gap = std::abs(rep.primal - rep.dual) / std::max(1.0, std::abs(rep.primal));
    return rep;
}

KKTReport kkt_report_p2(const RVector& lambda, const RVector& nu, const CMatrix& precoders,
                        const CVector& receivers, const NetworkConfig& cfg, const ChannelSet& set) {
    cfg.validate();
    set.validate();
    if (lambda.size() != cfg.num_antennas() || nu.size() != cfg.users)
        throw DimensionMismatch("kkt_report_p2: multiplier dimensions");
    KKTReport rep;
    const RVector power = per_antenna_power(precoders);
    for (Index n = 0; n < power.size(); ++n) {
        const double diff = power(n) - cfg.power_caps(n);
        rep.power_violation = std::max(rep.power_violation, diff);
        rep.slackness = std::max(rep.slackness, lambda(n) * std::abs(diff) / (1.0 + lambda(n) * cfg.power_caps(n)));
    }
    const RVector amse_k = user_amse(set, {precoders, receivers}, cfg.noise_var);
    for (Index k = 0; k < amse_k.size(); ++k) {
        const double diff = amse_k(k) - cfg.amse_targets(k);
        rep.amse_violation = std::max(rep.amse_violation, diff);
        rep.slackness = std::max(rep.slackness, nu(k) * std::abs(diff) / (1.0 + nu(k) * cfg.amse_targets(k)));
    }
    rep.primal = precoders.squaredNorm();
    rep.dual = dual_function_p2(cfg, set, receivers, nu, lambda);
    rep.dual_gap = std::abs(rep.primal - rep.dual) / std::max(1.0, std::abs(rep.primal));
    return rep;
}

void write_kkt_header(std::ostream& os) {
    os << "label,power_violation,slackness,amse_violation,dual_gap,primal,dual\n";
}

void write_kkt_row(std::ostream& os, const std::string& label, const KKTReport& rep) {
    const auto old = os.precision(17);
    os << label << ',' << rep.power_violation << ',' << rep.slackness << ',' << rep.amse_violation << ','
       << rep.dual_gap << ',' << rep.primal << ',' << rep.dual << '\n';
    os.precision(old);
}

Lemma1Result lemma1_check(const RVector& lambda, const CMatrix& f, const CMatrix& r, const RVector& power_caps) {
    const Index n = f.rows();
    if (f.cols() != n || r.rows() != n || lambda.size() != n || power_caps.size() != n)
        throw DimensionMismatch("lemma1_check: inconsistent dimensions");
    if (!(lambda.array() > 0.0).all()) throw std::invalid_argument("lemma1_check: lambda must be positive");

    CMatrix m = r * r.adjoint();
    m.diagonal() += lambda.cast<cd>();
    const Eigen::PartialPivLU<CMatrix> lu(m);
    const CMatrix tau = lu.solve(f);
    const CMatrix g = lambda.cast<cd>().asDiagonal() * tau;
    const CMatrix t = r.adjoint() * tau;

    Lemma1Result out;
    out.direct = dual_objective_p1(lambda, f, r, power_caps);
    double quad = 0.0;
    for (Index row = 0; row < n; ++row) quad += g.row(row).squaredNorm() / lambda(row);
    out.variational = quad + t.squaredNorm() + lambda.dot(power_caps);
    out.residual = std::abs(out.variational - out.direct) / std::max(1.0, std::abs(out.direct));
    out.constraint_residual = (r * t + g - f).cwiseAbs().maxCoeff() / std::max(1.0, f.norm());
    return out;
}

}  // namespace rcomp
