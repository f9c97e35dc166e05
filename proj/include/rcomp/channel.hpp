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

#ifndef RCOMP_CHANNEL_HPP
#define RCOMP_CHANNEL_HPP

#include "rcomp/numerics.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rcomp {

struct OutOfRangeRho : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Network dimensions and per-antenna / per-user parameters.
///
/// Antennas are numbered from the first antenna of BS 1 to the last antenna
/// of BS L; `power_caps` follows that order. All power quantities are in
/// watts.
struct NetworkConfig {
    std::vector<Index> antennas_per_bs;  // N_l
    Index users = 0;                     // K
    RVector power_caps;                  // p_n, length N
    RVector noise_var;                   // sigma_k^2, length K
    RVector weights;                     // eta_k, length K (weighted-sum problem)
    RVector amse_targets;                // eps_k, length K (power-minimization problem)

    Index num_bs() const { return static_cast<Index>(antennas_per_bs.size()); }
    Index num_antennas() const;
    /// First antenna index of BS l.
    Index bs_offset(Index l) const;

    /// Throws std::invalid_argument on any violated invariant.
    void validate() const;

    /// Equal parameters everywhere; targets default to 0.5.
    static NetworkConfig uniform(std::vector<Index> antennas_per_bs, Index users, double power_cap,
                                 double noise_var, double weight = 1.0, double target = 0.5);
};

/// Per-(BS, user) exponential correlation coefficient and estimation-error
/// variance, stored as L x K matrices.
///
/// The error variance is expressed relative to the unit-variance small-scale
/// fading; the large-scale gain of the link scales estimate and error alike.
struct CorrelationSpec {
    RMatrix rho;        // L x K, in [0, 1)
    RMatrix error_var;  // L x K, in [0, 1)

    void validate(Index bs, Index users) const;
    static CorrelationSpec uniform(Index bs, Index users, double rho, double error_var);
};

/// Estimated aggregate channels and error statistics for all users.
struct ChannelSet {
    CMatrix estimates;               // N x K, column k is h_hat_k
    std::vector<CMatrix> error_cov;  // R_bk, N x N each
    std::optional<CMatrix> truth;    // N x K true channels, when sampled

    Index num_antennas() const { return estimates.rows(); }
    Index users() const { return estimates.cols(); }

    /// Copy with every error covariance forced to zero (perfect-CSI view).
    ChannelSet without_errors() const;
    void validate() const;
};

/// Exponential correlation matrix with entries rho^|i-j|.
CMatrix exp_correlation(double rho, Index n);

/// Draws estimates, true channels and error covariances.
///
/// Per link (l, k) with gain g, correlation C = exp_correlation(rho_lk, N_l)
/// and error variance s = error_var(l, k):
///   h_hat_lk = sqrt(g) C^{1/2} z,  z ~ CN(0, (1 - s) I)
///   h_lk     = h_hat_lk + sqrt(g) C^{1/2} e,  e ~ CN(0, s I)
/// and R_bk = blkdiag(g_1k s_1k C_1k, ..., g_Lk s_Lk C_Lk).
/// `gains` is L x K; pass a matrix of ones for unit large-scale gain.
ChannelSet sample_channel(const NetworkConfig& cfg, const CorrelationSpec& corr,
                          const RMatrix& gains, Rng& rng);

/// Error covariances for fixed estimates (used with the published fixture).
std::vector<CMatrix> error_covariances(const NetworkConfig& cfg, const CorrelationSpec& corr,
                                       const RMatrix& gains);

/// Parameters of the 19-cell hexagonal large-scale scenario.
struct LargeScaleScenario {
    double cell_radius_km = 1.6;
    double ref_distance_km = 1.6;
    double pathloss_exponent = 3.8;
    double pathloss_ref_db = 134.0;
    double bandwidth_hz = 5e6;
    double noise_figure_db = 5.0;
    double antenna_gain_dbi = 10.3;
    double temperature_k = 300.0;
    Index antennas_per_bs = 2;
    Index users = 38;
    double power_per_antenna_w = 5.0;

    void validate() const;
};

struct HexLayout {
    RMatrix bs_positions;  // L x 2, km
    RMatrix ms_positions;  // K x 2, km
    RMatrix gains;         // L x K, linear
    double noise_power_w = 0.0;
};

inline constexpr double kBoltzmann = 1.380649e-23;  // J/K
inline constexpr Index kHexCells = 19;

/// Linear large-scale gain at distance d (km); d is clamped below at d0.
double large_scale_gain(const LargeScaleScenario& spec, double distance_km);

/// k_B T B 10^(NF/10), watts.
double thermal_noise_power(const LargeScaleScenario& spec);

/// SNR (dB) at the cell edge when one BS transmits all its antennas at full
/// power.
double cell_edge_snr_db(const LargeScaleScenario& spec);

/// Centers of the 19 pointy-top hexagonal cells (center, ring 1, ring 2).
RMatrix hex_cell_centers(double radius_km);

/// True when p lies inside the union of the 19 cells.
bool inside_hex_union(double x, double y, double radius_km);

/// BS at every cell center, users uniform over the union of cells.
HexLayout hex_scenario(const LargeScaleScenario& spec, Rng& rng);

/// Published 4 x 4 channel estimate; row k is h_hat_k^H.
CMatrix fixture_p2();

/// Two BSs with two antennas each serving four users.
NetworkConfig fixture_network(double power_cap, double noise_var, double target);

/// Fixture estimates together with error covariances from `corr`.
ChannelSet fixture_channel(const CorrelationSpec& corr);

// ----- Serialization ---------------------------------------------------

/// CSV with interleaved real/imaginary parts, full double precision.
///   dims,N,K
///   estimate,k,re_0,im_0,...
///   error_cov,k,row,re_0,im_0,...
///   truth,k,re_0,im_0,...          (only when present)
void write_channel_csv(std::ostream& os, const ChannelSet& set);
ChannelSet read_channel_csv(std::istream& is);

// ----- Key/value configuration -------------------------------------------

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
std::map<std::string, std::string> parse_kv_config(std::istream& is);

/// Applies recognized keys onto `spec` and returns the keys it did not use.
std::vector<std::string> apply_scenario_keys(const std::map<std::string, std::string>& kv,
                                             LargeScaleScenario& spec);

}  // namespace rcomp

#endif
