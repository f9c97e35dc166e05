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

#ifndef RCOMP_MSE_HPP
#define RCOMP_MSE_HPP

#include "rcomp/channel.hpp"

namespace rcomp {

/// Precoders (column k = b_k, N x K, units sqrt(W)) and scalar receivers.
struct Transceiver {
    CMatrix precoders;
    CVector receivers;
};

// The receiver estimates d_k as conj(w_k) * (h_k^H sum_i b_i d_i + n_k).

/// AMSE of user k averaged over the estimation error:
///   |w|^2 (|B^H h|^2 + sum_i b_i^H R b_i + sigma^2) - 2 Re{conj(w) h^H b_k} + 1
double amse(const CVector& estimate, const CMatrix& error_cov, const CMatrix& precoders, Index user,
            cd receiver, double noise_var);

/// MSE of user k for a known channel (no error averaging).
double instantaneous_mse(const CVector& channel, const CMatrix& precoders, Index user, cd receiver,
                         double noise_var);

/// Receiver minimizing the AMSE of user k for fixed precoders.
cd mamse_receiver(const CVector& estimate, const CMatrix& error_cov, const CMatrix& precoders, Index user,
                  double noise_var);

/// MAMSE receivers of every user.
CVector mamse_receivers(const ChannelSet& set, const CMatrix& precoders, const RVector& noise_var);

/// Per-user AMSE vector.
RVector user_amse(const ChannelSet& set, const Transceiver& trx, const RVector& noise_var);

/// sum_k eta_k * amse_k, evaluated user by user.
double weighted_sum_amse(const ChannelSet& set, const Transceiver& trx, const RVector& weights,
                         const RVector& noise_var);

/// Same quantity through the quadratic matrix form
///   ||sqrt(eta) W^H H^H B - sqrt(eta)||_F^2 + tr(B^H Psi B) + tr(sigma^2 eta W^H W),
/// Psi = sum_i eta_i |w_i|^2 R_bi.
double weighted_sum_amse_matrix_form(const ChannelSet& set, const Transceiver& trx, const RVector& weights,
                                     const RVector& noise_var);

/// Row power sum_k |B(n, k)|^2 of every antenna.
RVector per_antenna_power(const CMatrix& precoders);

}  // namespace rcomp

#endif
