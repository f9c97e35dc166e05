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

#include "rcomp/mse.hpp"

#include <cmath>

namespace rcomp {

namespace {

void check_user(const CVector& estimate, const CMatrix& precoders, Index user) {
    if (estimate.size() != precoders.rows()) throw DimensionMismatch("channel length differs from precoder rows");
    if (user < 0 || user >= precoders.cols()) throw DimensionMismatch("user index outside precoder columns");
}

// sum_i b_i^H R b_i as a real Hermitian form.
double error_power(const CMatrix& error_cov, const CMatrix& precoders) {
    if (error_cov.rows() != precoders.rows() || error_cov.cols() != precoders.rows())
        throw DimensionMismatch("error covariance must be N x N");
    double acc = 0.0;
    for (Index i = 0; i < precoders.cols(); ++i)
        acc += precoders.col(i).dot(error_cov * precoders.col(i)).real();
    return acc;
}

void check_set(const ChannelSet& set, const CMatrix& precoders, const RVector& noise_var) {
    set.validate();
    if (precoders.rows() != set.num_antennas() || precoders.cols() != set.users())
        throw DimensionMismatch("precoders must be N x K");
    if (noise_var.size() != set.users()) throw DimensionMismatch("noise variances must have length K");
}

}  // namespace

double amse(const CVector& estimate, const CMatrix& error_cov, const CMatrix& precoders, Index user,
            cd receiver, double noise_var) {
    check_user(estimate, precoders, user);
    // Eigen's dot conjugates its left operand: v_i = b_i^H h.
    const CVector v = precoders.adjoint() * estimate;
    const double received = v.squaredNorm() + error_power(error_cov, precoders) + noise_var;
    const cd signal = std::conj(v(user));  // h^H b_k
    return std::norm(receiver) * received - 2.0 * (std::conj(receiver) * signal).real() + 1.0;
}

double instantaneous_mse(const CVector& channel, const CMatrix& precoders, Index user, cd receiver,
                         double noise_var) {
    check_user(channel, precoders, user);
    const CVector v = precoders.adjoint() * channel;
    const cd signal = std::conj(v(user));
    return std::norm(receiver) * (v.squaredNorm() + noise_var) - 2.0 * (std::conj(receiver) * signal).real() +
           1.0;
}

cd mamse_receiver(const CVector& estimate, const CMatrix& error_cov, const CMatrix& precoders, Index user,
                  double noise_var) {
    check_user(estimate, precoders, user);
    const CVector v = precoders.adjoint() * estimate;
    const double denom = v.squaredNorm() + error_power(error_cov, precoders) + noise_var;
    return std::conj(v(user)) / denom;
}

CVector mamse_receivers(const ChannelSet& set, const CMatrix& precoders, const RVector& noise_var) {
    check_set(set, precoders, noise_var);
    CVector w(set.users());
    for (Index k = 0; k < set.users(); ++k)
        w(k) = mamse_receiver(set.estimates.col(k), set.error_cov[static_cast<std::size_t>(k)], precoders, k,
                              noise_var(k));
    return w;
}

RVector user_amse(const ChannelSet& set, const Transceiver& trx, const RVector& noise_var) {
    check_set(set, trx.precoders, noise_var);
    if (trx.receivers.size() != set.users()) throw DimensionMismatch("receivers must have length K");
    RVector out(set.users());
    for (Index k = 0; k < set.users(); ++k)
        out(k) = amse(set.estimates.col(k), set.error_cov[static_cast<std::size_t>(k)], trx.precoders, k,
                      trx.receivers(k), noise_var(k));
    return out;
}

double weighted_sum_amse(const ChannelSet& set, const Transceiver& trx, const RVector& weights,
                         const RVector& noise_var) {
    if (weights.size() != set.users()) throw DimensionMismatch("weights must have length K");
    const RVector per_user = user_amse(set, trx, noise_var);
    double acc = 0.0;
    for (Index k = 0; k < per_user.size(); ++k) acc += weights(k) * per_user(k);
    return acc;
}

double weighted_sum_amse_matrix_form(const ChannelSet& set, const Transceiver& trx, const RVector& weights,
                                     const RVector& noise_var) {
    check_set(set, trx.precoders, noise_var);
    if (weights.size() != set.users() || trx.receivers.size() != set.users())
        throw DimensionMismatch("weights and receivers must have length K");
    const Index k_count = set.users();
    const RVector sqrt_eta = weights.cwiseSqrt();
    // sqrt(eta) W^H H^H B - sqrt(eta)
    const CVector left = sqrt_eta.cast<cd>().cwiseProduct(trx.receivers.conjugate());
    CMatrix m = left.asDiagonal() * (set.estimates.adjoint() * trx.precoders);
    m.diagonal() -= sqrt_eta.cast<cd>();

    CMatrix psi = CMatrix::Zero(set.num_antennas(), set.num_antennas());
    for (Index i = 0; i < k_count; ++i)
        psi += weights(i) * std::norm(trx.receivers(i)) * set.error_cov[static_cast<std::size_t>(i)];

    double noise_term = 0.0;
    for (Index k = 0; k < k_count; ++k) noise_term += noise_var(k) * weights(k) * std::norm(trx.receivers(k));
    return m.squaredNorm() + (trx.precoders.adjoint() * psi * trx.precoders).trace().real() + noise_term;
}

RVector per_antenna_power(const CMatrix& precoders) {
    return precoders.rowwise().squaredNorm();
}

}  // namespace rcomp
