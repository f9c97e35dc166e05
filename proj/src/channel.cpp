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

#include "rcomp/channel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace rcomp {

// ----- NetworkConfig ----------------------------------------------------

Index NetworkConfig::num_antennas() const {
    Index n = 0;
    for (Index nl : antennas_per_bs) n += nl;
    return n;
}

Index NetworkConfig::bs_offset(Index l) const {
    Index n = 0;
    for (Index i = 0; i < l; ++i) n += antennas_per_bs[static_cast<std::size_t>(i)];
    return n;
}

void NetworkConfig::validate() const {
    if (antennas_per_bs.empty()) throw std::invalid_argument("NetworkConfig: need at least one BS");
    for (Index nl : antennas_per_bs)
        if (nl < 1) throw std::invalid_argument("NetworkConfig: every BS needs an antenna");
    if (users < 1) throw std::invalid_argument("NetworkConfig: need at least one user");
    const Index n = num_antennas();
    if (power_caps.size() != n) throw DimensionMismatch("NetworkConfig: power_caps must have length N");
    if (noise_var.size() != users) throw DimensionMismatch("NetworkConfig: noise_var must have length K");
    if (weights.size() != users) throw DimensionMismatch("NetworkConfig: weights must have length K");
    if (amse_targets.size() != users)
        throw DimensionMismatch("NetworkConfig: amse_targets must have length K");
    if (!(power_caps.array() > 0.0).all()) throw std::invalid_argument("NetworkConfig: p_n must be > 0");
    if (!(noise_var.array() > 0.0).all())
        throw std::invalid_argument("NetworkConfig: noise variances must be > 0");
    if (!(weights.array() > 0.0).all()) throw std::invalid_argument("NetworkConfig: weights must be > 0");
    if (!((amse_targets.array() > 0.0) && (amse_targets.array() < 1.0)).all())
        throw std::invalid_argument("NetworkConfig: AMSE targets must lie in (0, 1)");
}

NetworkConfig NetworkConfig::uniform(std::vector<Index> antennas_per_bs, Index users, double power_cap,
                                     double noise_var, double weight, double target) {
    NetworkConfig cfg;
    cfg.antennas_per_bs = std::move(antennas_per_bs);
    cfg.users = users;
    const Index n = cfg.num_antennas();
    cfg.power_caps = RVector::Constant(n, power_cap);
    cfg.noise_var = RVector::Constant(users, noise_var);
    cfg.weights = RVector::Constant(users, weight);
    cfg.amse_targets = RVector::Constant(users, target);
    return cfg;
}

// ----- CorrelationSpec --------------------------------------------------

void CorrelationSpec::validate(Index bs, Index users) const {
    if (rho.rows() != bs || rho.cols() != users || error_var.rows() != bs || error_var.cols() != users)
        throw DimensionMismatch("CorrelationSpec: expected L x K matrices");
    if (!((rho.array() >= 0.0) && (rho.array() < 1.0)).all())
        throw OutOfRangeRho("CorrelationSpec: rho must lie in [0, 1)");
    if (!((error_var.array() >= 0.0) && (error_var.array() < 1.0)).all())
        throw std::invalid_argument("CorrelationSpec: error variances must lie in [0, 1)");
}

CorrelationSpec CorrelationSpec::uniform(Index bs, Index users, double rho, double error_var) {
    return {RMatrix::Constant(bs, users, rho), RMatrix::Constant(bs, users, error_var)};
}

// ----- ChannelSet -------------------------------------------------------

ChannelSet ChannelSet::without_errors() const {
    ChannelSet out = *this;
    for (auto& r : out.error_cov) r.setZero();
    return out;
}

void ChannelSet::validate() const {
    const Index n = estimates.rows();
    if (static_cast<Index>(error_cov.size()) != estimates.cols())
        throw DimensionMismatch("ChannelSet: need one error covariance per user");
    for (const auto& r : error_cov)
        if (r.rows() != n || r.cols() != n) throw DimensionMismatch("ChannelSet: error covariance must be N x N");
    if (truth && (truth->rows() != n || truth->cols() != estimates.cols()))
        throw DimensionMismatch("ChannelSet: true channel shape differs from estimates");
}

// ----- Generation -------------------------------------------------------

CMatrix exp_correlation(double rho, Index n) {
    if (!(rho >= 0.0 && rho < 1.0)) throw OutOfRangeRho("exp_correlation: rho must lie in [0, 1)");
    if (n < 1) throw std::invalid_argument("exp_correlation: size must be >= 1");
    CMatrix c(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) c(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    return c;
}

namespace {

void check_gains(const NetworkConfig& cfg, const RMatrix& gains) {
    if (gains.rows() != cfg.num_bs() || gains.cols() != cfg.users)
        throw DimensionMismatch("gains must be L x K");
    if (!(gains.array() > 0.0).all()) throw std::invalid_argument("large-scale gains must be > 0");
}

}  // namespace

std::vector<CMatrix> error_covariances(const NetworkConfig& cfg, const CorrelationSpec& corr,
                                       const RMatrix& gains) {
    corr.validate(cfg.num_bs(), cfg.users);
    check_gains(cfg, gains);
    std::vector<CMatrix> out;
    out.reserve(static_cast<std::size_t>(cfg.users));
    for (Index k = 0; k < cfg.users; ++k) {
        std::vector<CMatrix> blocks;
        for (Index l = 0; l < cfg.num_bs(); ++l) {
            const Index nl = cfg.antennas_per_bs[static_cast<std::size_t>(l)];
            blocks.push_back(gains(l, k) * corr.error_var(l, k) * exp_correlation(corr.rho(l, k), nl));
        }
        out.push_back(block_diagonal(blocks));
    }
    return out;
}

ChannelSet sample_channel(const NetworkConfig& cfg, const CorrelationSpec& corr, const RMatrix& gains,
                          Rng& rng) {
    corr.validate(cfg.num_bs(), cfg.users);
    check_gains(cfg, gains);
    const Index n = cfg.num_antennas();
    ChannelSet set;
    set.estimates = CMatrix::Zero(n, cfg.users);
    CMatrix truth = CMatrix::Zero(n, cfg.users);
    set.error_cov = error_covariances(cfg, corr, gains);

    for (Index k = 0; k < cfg.users; ++k) {
        for (Index l = 0; l < cfg.num_bs(); ++l) {
            const Index nl = cfg.antennas_per_bs[static_cast<std::size_t>(l)];
            const Index off = cfg.bs_offset(l);
            const double s = corr.error_var(l, k);
            const CMatrix root = std::sqrt(gains(l, k)) * psd_sqrt(exp_correlation(corr.rho(l, k), nl));
            const CVector z = sample_cgauss(nl, 1.0 - s, rng);
            const CVector e = sample_cgauss(nl, s, rng);
            set.estimates.col(k).segment(off, nl) = root * z;
            truth.col(k).segment(off, nl) = root * (z + e);
        }
    }
    set.truth = std::move(truth);
    return set;
}

// ----- Hexagonal scenario -----------------------------------------------

void LargeScaleScenario::validate() const {
    if (!(cell_radius_km > 0.0 && ref_distance_km > 0.0))
        throw std::invalid_argument("scenario: distances must be positive");
    if (!(pathloss_exponent > 2.0)) throw std::invalid_argument("scenario: path-loss exponent must exceed 2");
    if (!(bandwidth_hz > 0.0 && temperature_k > 0.0))
        throw std::invalid_argument("scenario: bandwidth and temperature must be positive");
    if (antennas_per_bs < 1 || users < 1) throw std::invalid_argument("scenario: need antennas and users");
    if (!(power_per_antenna_w > 0.0)) throw std::invalid_argument("scenario: antenna power must be positive");
}

double large_scale_gain(const LargeScaleScenario& spec, double distance_km) {
    const double d = std::max(distance_km, spec.ref_distance_km);
    return std::pow(10.0, -spec.pathloss_ref_db / 10.0) *
           std::pow(d / spec.ref_distance_km, -spec.pathloss_exponent) *
           std::pow(10.0, spec.antenna_gain_dbi / 10.0);
}

double thermal_noise_power(const LargeScaleScenario& spec) {
    return kBoltzmann * spec.temperature_k * spec.bandwidth_hz * std::pow(10.0, spec.noise_figure_db / 10.0);
}

double cell_edge_snr_db(const LargeScaleScenario& spec) {
    const double tx = spec.power_per_antenna_w * static_cast<double>(spec.antennas_per_bs);
    return 10.0 * std::log10(tx * large_scale_gain(spec, spec.cell_radius_km) / thermal_noise_power(spec));
}

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

// Axial coordinates (q, r) of the 19 cells, center first.
std::vector<std::pair<int, int>> hex_axial_cells() {
    std::vector<std::pair<int, int>> cells{{0, 0}};
    for (int ring = 1; ring <= 2; ++ring)
        for (int q = -ring; q <= ring; ++q)
            for (int r = -ring; r <= ring; ++r) {
                const int s = -q - r;
                if (std::max({std::abs(q), std::abs(r), std::abs(s)}) == ring) cells.emplace_back(q, r);
            }
    return cells;
}

}  // namespace

RMatrix hex_cell_centers(double radius_km) {
    const auto cells = hex_axial_cells();
    RMatrix out(static_cast<Index>(cells.size()), 2);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto [q, r] = cells[i];
        out(static_cast<Index>(i), 0) = radius_km * kSqrt3 * (q + 0.5 * r);
        out(static_cast<Index>(i), 1) = radius_km * 1.5 * r;
    }
    return out;
}

bool inside_hex_union(double x, double y, double radius_km) {
    // Fractional axial coordinates, then cube rounding to the owning cell.
    const double qf = (kSqrt3 / 3.0 * x - y / 3.0) / radius_km;
    const double rf = (2.0 / 3.0 * y) / radius_km;
    const double sf = -qf - rf;
    double q = std::round(qf), r = std::round(rf), s = std::round(sf);
    const double dq = std::abs(q - qf), dr = std::abs(r - rf), ds = std::abs(s - sf);
    if (dq > dr && dq > ds)
        q = -r - s;
    else if (dr > ds)
        r = -q - s;
    else
        s = -q - r;
    return std::max({std::abs(q), std::abs(r), std::abs(s)}) <= 2.0;
}

HexLayout hex_scenario(const LargeScaleScenario& spec, Rng& rng) {
    spec.validate();
    HexLayout out;
    out.bs_positions = hex_cell_centers(spec.cell_radius_km);
    const double xmax = 2.5 * kSqrt3 * spec.cell_radius_km;  // bounding box of the union
    const double ymax = 4.0 * spec.cell_radius_km;
    std::uniform_real_distribution<double> ux(-xmax, xmax), uy(-ymax, ymax);
    out.ms_positions.resize(spec.users, 2);
    for (Index k = 0; k < spec.users; ++k) {
        double x = 0.0, y = 0.0;
        do {
            x = ux(rng);
            y = uy(rng);
        } while (!inside_hex_union(x, y, spec.cell_radius_km));
        out.ms_positions(k, 0) = x;
        out.ms_positions(k, 1) = y;
    }
    out.gains.resize(kHexCells, spec.users);
    for (Index l = 0; l < kHexCells; ++l)
        for (Index k = 0; k < spec.users; ++k) {
            const double d = (out.bs_positions.row(l) - out.ms_positions.row(k)).norm();
            out.gains(l, k) = large_scale_gain(spec, d);
        }
    out.noise_power_w = thermal_noise_power(spec);
    return out;
}

// ----- Published fixture ------------------------------------------------

CMatrix fixture_p2() {
    CMatrix h(4, 4);
    h << cd(0.2328, -0.0868), cd(0.1344, 0.3848), cd(0.2407, -0.3118), cd(-0.2276, -1.3829),
        cd(1.6717, 0.4976), cd(0.5254, -0.9034), cd(0.0206, 0.1318), cd(1.1292, -0.8314),
        cd(-0.0426, 1.7262), cd(-0.6380, -0.5663), cd(-0.2765, -0.4716), cd(-0.2760, -0.1349),
        cd(0.3266, 0.0882), cd(-0.3655, 0.8997), cd(-0.5944, -1.1556), cd(-0.2692, -0.6244);
    return h;
}

NetworkConfig fixture_network(double power_cap, double noise_var, double target) {
    return NetworkConfig::uniform({2, 2}, 4, power_cap, noise_var, 1.0, target);
}

ChannelSet fixture_channel(const CorrelationSpec& corr) {
    const NetworkConfig cfg = fixture_network(1.0, 1.0, 0.5);
    ChannelSet set;
    set.estimates = fixture_p2().adjoint();
    set.error_cov = error_covariances(cfg, corr, RMatrix::Ones(2, 4));
    return set;
}

// ----- Serialization ----------------------------------------------------

namespace {

void write_row(std::ostream& os, const CVector& v) {
    for (Index i = 0; i < v.size(); ++i) os << ',' << v(i).real() << ',' << v(i).imag();
    os << '\n';
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

CVector parse_values(const std::vector<std::string>& fields, std::size_t first, Index n) {
    if (fields.size() != first + 2 * static_cast<std::size_t>(n))
        throw std::runtime_error("channel csv: wrong number of values in row");
    CVector v(n);
    for (Index i = 0; i < n; ++i) {
        const std::size_t at = first + 2 * static_cast<std::size_t>(i);
        v(i) = cd(std::stod(fields[at]), std::stod(fields[at + 1]));
    }
    return v;
}

}  // namespace

void write_channel_csv(std::ostream& os, const ChannelSet& set) {
    set.validate();
    const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
    const Index n = set.num_antennas();
    const Index k_count = set.users();
    os << "dims," << n << ',' << k_count << '\n';
    for (Index k = 0; k < k_count; ++k) {
        os << "estimate," << k;
        write_row(os, set.estimates.col(k));
    }
    for (Index k = 0; k < k_count; ++k)
        for (Index r = 0; r < n; ++r) {
            os << "error_cov," << k << ',' << r;
            write_row(os, set.error_cov[static_cast<std::size_t>(k)].row(r).transpose());
        }
    if (set.truth)
        for (Index k = 0; k < k_count; ++k) {
            os << "truth," << k;
            write_row(os, set.truth->col(k));
        }
    os.precision(old_precision);
}

ChannelSet read_channel_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("channel csv: empty input");
    auto head = split_csv(line);
    if (head.size() != 3 || head[0] != "dims") throw std::runtime_error("channel csv: missing dims row");
    const Index n = std::stol(head[1]);
    const Index k_count = std::stol(head[2]);
    ChannelSet set;
    set.estimates = CMatrix::Zero(n, k_count);
    set.error_cov.assign(static_cast<std::size_t>(k_count), CMatrix::Zero(n, n));
    CMatrix truth = CMatrix::Zero(n, k_count);
    bool has_truth = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto f = split_csv(line);
        const Index k = std::stol(f.at(1));
        if (k < 0 || k >= k_count) throw std::runtime_error("channel csv: user index out of range");
        if (f[0] == "estimate") {
            set.estimates.col(k) = parse_values(f, 2, n);
        } else if (f[0] == "truth") {
            truth.col(k) = parse_values(f, 2, n);
            has_truth = true;
        } else if (f[0] == "error_cov") {
            const Index r = std::stol(f.at(2));
            if (r < 0 || r >= n) throw std::runtime_error("channel csv: row index out of range");
            set.error_cov[static_cast<std::size_t>(k)].row(r) = parse_values(f, 3, n).transpose();
        } else {
            throw std::runtime_error("channel csv: unknown row kind '" + f[0] + "'");
        }
    }
    if (has_truth) set.truth = std::move(truth);
    return set;
}

// ----- Key/value configuration ------------------------------------------

std::map<std::string, std::string> parse_kv_config(std::istream& is) {
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string{};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    std::map<std::string, std::string> out;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw std::runtime_error("config line " + std::to_string(line_no) + ": empty key");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

std::vector<std::string> apply_scenario_keys(const std::map<std::string, std::string>& kv,
                                             LargeScaleScenario& spec) {
    std::vector<std::string> unused;
    const std::map<std::string, double*> doubles{
        {"cell_radius_km", &spec.cell_radius_km},
        {"reference_distance_km", &spec.ref_distance_km},
        {"path_loss_exponent", &spec.pathloss_exponent},
        {"mean_path_loss_db", &spec.pathloss_ref_db},
        {"bandwidth_hz", &spec.bandwidth_hz},
        {"noise_figure_db", &spec.noise_figure_db},
        {"antenna_gain_dbi", &spec.antenna_gain_dbi},
        {"temperature_k", &spec.temperature_k},
        {"power_per_antenna_w", &spec.power_per_antenna_w},
    };
    for (const auto& [key, value] : kv) {
        if (auto it = doubles.find(key); it != doubles.end()) {
            *it->second = std::stod(value);
        } else if (key == "antennas_per_bs") {
            spec.antennas_per_bs = std::stol(value);
        } else if (key == "users") {
            spec.users = std::stol(value);
        } else {
            unused.push_back(key);
        }
    }
    spec.validate();
    return unused;
}

}  // namespace rcomp
