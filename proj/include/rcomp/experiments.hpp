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

#ifndef RCOMP_EXPERIMENTS_HPP
#define RCOMP_EXPERIMENTS_HPP

#include "rcomp/oracle.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace rcomp {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Scenario, sweep grid and solver switches of one experiment.
///
/// Scenarios: "fig3" and "fig4" (weighted-sum sweeps, 2 BSs x 2 antennas,
/// 4 users), "p2-fixture" (power minimization on the published estimate)
/// and "table1" (19-cell convergence study).
struct ExperimentSpec {
    std::string scenario = "fig3";
    std::uint64_t seed = 1;
    int trials = 100;
    std::vector<double> noise_grid;  // sigma^2 values; unused by table1
    bool robust = true;
    bool naive = true;
    bool warm_start = false;
    int threads = 0;  // 0 selects std::thread::hardware_concurrency()

    std::vector<Index> antennas_per_bs{2, 2};
    Index users = 4;
    double power_cap = 2.0;
    double amse_target = 0.2;
    double weight = 1.0;
    CorrelationSpec corr;

    double inner_delta = 1e-12;  // Algorithm I
    double p2_delta = 1e-14;     // Algorithm III
    int inner_max_iter = 1000;
    int p2_inner_max_iter = 200000;
    double outer_tol = 1e-6;
    int max_outer = 200;

    bool tune = false;            // p2 only: error-variance scale search
    double tune_tolerance = 0.01;  // relative power match

    LargeScaleScenario large_scale;

    std::string out;    // CSV path, empty for stdout
    std::string trace;  // per-iteration trace CSV path, empty to disable

    void validate() const;
    bool is_p1() const { return scenario == "fig3" || scenario == "fig4"; }
};

/// Built-in scenario defaults. Throws ConfigError for unknown names.
ExperimentSpec preset(const std::string& name);

/// Applies key/value pairs to `spec`. Throws ConfigError on unknown keys or
/// unparsable values. A `scenario` key resets `spec` to that preset first.
void apply_config(const std::map<std::string, std::string>& kv, ExperimentSpec& spec);

/// Reads a key/value file and applies it on top of `preset(default_scenario)`.
ExperimentSpec load_spec(const std::string& path, const std::string& default_scenario);

NetworkConfig network_for(const ExperimentSpec& spec, double noise_var);
P1Options p1_options(const ExperimentSpec& spec);
P2Options p2_options(const ExperimentSpec& spec);

// ----- Weighted-sum sweep ----------------------------------------------

struct P1SweepRow {
    double noise_var = 0.0;
    double snr_db = 0.0;          // 10 log10 of the trial mean of P_sum / sigma^2
    double robust_sum_amse = 0.0;
    double naive_sum_amse = 0.0;  // naive design scored with the robust AMSE
    RVector robust_powers;        // mean per-antenna power
    RVector naive_powers;
    double robust_inner_iterations = 0.0;  // mean Algorithm I iterations per outer stage
    double robust_outer_iterations = 0.0;
    double naive_inner_iterations = 0.0;
    double naive_outer_iterations = 0.0;
};

struct P1SweepResult {
    std::vector<P1SweepRow> rows;
    Index antennas = 0;
    bool robust = true;
    bool naive = true;
    bool monotone = true;  // every Algorithm I / II trace non-increasing within 1e-10
    std::vector<KKTReport> kkt;  // one per robust solve, trial-major
};

/// Trial t draws its channel from seed + t and reuses it for every grid point.
/// Disabled designs produce NaN columns.
P1SweepResult run_p1_sweep(const ExperimentSpec& spec);
void write_p1_csv(std::ostream& os, const P1SweepResult& res);

// ----- Power-minimization sweep ----------------------------------------

struct P2Design {
    double total_power = 0.0;
    RVector amse;            // per user, robust AMSE formula
    RVector powers;
    P2Verdict verdict = P2Verdict::Unverified;
    int outer_iterations = 0;
    KKTReport kkt;
};

struct TuneResult {
    double scale = 1.0;  // common multiplier on every error variance
    double total_power = 0.0;
    RVector amse;        // tuned design scored with the true error statistics
    int evaluations = 0;
    bool matched = false;
};

struct P2SweepRow {
    double noise_var = 0.0;
    P2Design robust;
    P2Design naive;
    TuneResult tuned;
};

struct P2SweepResult {
    std::vector<P2SweepRow> rows;
    Index users = 0;
    bool robust = true;
    bool naive = true;
    bool tune = false;
    bool monotone = true;
};

/// Runs on the published estimate with error statistics from `spec.corr`.
/// Receivers are initialized from a weighted-sum solve at the same power caps.
P2SweepResult run_p2_sweep(const ExperimentSpec& spec);
void write_p2_csv(std::ostream& os, const P2SweepResult& res);

/// Largest common error-variance scale s in [0, 1] whose robust design uses at
/// most (1 + tolerance) times `target_power`, found by bisection on s.
TuneResult tune_error_scale(const ExperimentSpec& spec, double noise_var, double target_power);

// ----- Convergence study ------------------------------------------------

struct ConvergenceStage {
    int trial = 0;
    int stage = 0;
    int iterations = 0;  // Algorithm I iterations until the decrease fell below delta
    bool converged = false;
    double initial_objective = 0.0;
    double final_objective = 0.0;
    bool monotone = true;
    std::vector<double> trace;
};

struct ConvergenceResult {
    std::vector<ConvergenceStage> stages;  // trial-major, stage order
    std::vector<double> cell_edge_snr_db;  // per trial (constant for a fixed scenario)
    int max_iterations() const;
};

ConvergenceResult run_convergence(const ExperimentSpec& spec);
void write_convergence_csv(std::ostream& os, const ConvergenceResult& res);

// ----- Verification instances --------------------------------------------

struct Instance {
    NetworkConfig cfg;
    ChannelSet set;
    CVector receivers;
};

/// Random weighted-sum instance with N, K <= 8 and random receivers.
Instance random_p1_instance(Rng& rng);

/// Random power-minimization instance that is strictly feasible by
/// construction: targets sit halfway between the AMSE of a scaled matched
/// filter design and 1.
Instance random_feasible_p2_instance(Rng& rng);

/// Random 2 x 2 antenna, 4 user channel (fig3 statistics) with caps around
/// 1e-4 W, far too small for any design to meet AMSE targets of 0.2.
Instance starved_p2_instance(std::uint64_t seed);

struct VerifyRow {
    int instance = 0;
    std::string problem;  // "p1" or "p2"
    Index antennas = 0;
    Index users = 0;
    double algorithm = 0.0;  // dual value reached by the distributed iteration
    double oracle = 0.0;     // projected-gradient value
    double relative_gap = 0.0;
    int iterations = 0;
    KKTReport kkt;
};

struct VerifyResult {
    std::vector<VerifyRow> rows;
    double max_gap_p1 = 0.0;
    double max_gap_p2 = 0.0;
    bool passed(double tol = 1e-5) const { return max_gap_p1 <= tol && max_gap_p2 <= tol; }
};

/// `spec.trials` instances of each problem drawn from seed + i.
VerifyResult verify(const ExperimentSpec& spec);
void write_verify_csv(std::ostream& os, const VerifyResult& res);

// ----- Traces -----------------------------------------------------------

/// Per-iteration traces of trial 0 (all grid points). `level` is "outer"
/// (alternation objective, remaining columns nan) or "inner". Columns:
///   p1: noise_var,design,level,outer,iteration,objective,max_power_violation,lambda_min,lambda_max
///   p2: noise_var,design,level,outer,iteration,objective,nu_max,max_power_violation,max_amse_violation
void write_p1_trace(std::ostream& os, const ExperimentSpec& spec);
void write_p2_trace(std::ostream& os, const ExperimentSpec& spec);
/// Algorithm I objective per iteration for every stage of trial 0.
void write_convergence_trace(std::ostream& os, const ConvergenceResult& res);

/// Full-precision formatting shared by all writers.
std::string fmt(double v);

}  // namespace rcomp

#endif
