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

#include "rcomp/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace rcomp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

RMatrix rows_from(std::initializer_list<std::initializer_list<double>> rows) {
    RMatrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
    Index i = 0;
    for (const auto& r : rows) {
        Index j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

// Error variances depend on the user only.
RMatrix per_user_error_var() { return rows_from({{0.01, 0.02, 0.03, 0.04}, {0.01, 0.02, 0.03, 0.04}}); }

std::vector<double> log_grid(double first, double ratio, int count) {
    std::vector<double> g;
    for (int i = 0; i < count; ++i) g.push_back(first * std::pow(ratio, i));
    return g;
}

double unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Index pick(Rng& rng, Index lo, Index hi) { return lo + static_cast<Index>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); }

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError("config: '" + key + "' expects a number, got '" + text + "'");
    return v;
}

long long parse_int(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ConfigError("config: '" + key + "' expects an integer, got '" + text + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError("config: '" + key + "' expects a boolean, got '" + text + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
    if (out.empty()) throw ConfigError("config: '" + key + "' is empty");
    return out;
}

// 1 value: every link; K values: per user; L*K values: row-major per BS.
RMatrix expand_links(const std::string& key, const std::vector<double>& v, Index bs, Index users) {
    RMatrix m(bs, users);
    const auto size = static_cast<Index>(v.size());
    if (size == 1) {
        m.setConstant(v[0]);
    } else if (size == users) {
        for (Index l = 0; l < bs; ++l)
            for (Index k = 0; k < users; ++k) m(l, k) = v[static_cast<std::size_t>(k)];
    } else if (size == bs * users) {
        for (Index l = 0; l < bs; ++l)
            for (Index k = 0; k < users; ++k) m(l, k) = v[static_cast<std::size_t>(l * users + k)];
    } else {
        throw ConfigError("config: '" + key + "' needs 1, K or L*K values");
    }
    return m;
}

void sync_table1(ExperimentSpec& s) {
    s.antennas_per_bs.assign(static_cast<std::size_t>(kHexCells), s.large_scale.antennas_per_bs);
    s.users = s.large_scale.users;
    s.power_cap = s.large_scale.power_per_antenna_w;
}

// Runs fn(0..count-1) on a small pool. The first exception is rethrown.
void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::clamp(workers, 1, std::max(1, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

double mean_inner_iterations(const P1Report& rep) {
    if (rep.inner.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& st : rep.inner) sum += st.iterations;
    return sum / static_cast<double>(rep.inner.size());
}

bool p1_monotone(const P1Report& rep) {
    if (!is_non_increasing(rep.objective_trace)) return false;
    for (const auto& st : rep.inner)
        if (!is_non_increasing(st.objective_trace)) return false;
    return true;
}

bool p2_monotone(const P2Report& rep) {
    for (const auto& st : rep.inner)
        if (!is_non_increasing(st.objective_trace)) return false;
    return true;
}

void write_vector_header(std::ostream& os, const char* prefix, Index n) {
    for (Index i = 0; i < n; ++i) os << ',' << prefix << (i + 1);
}

void write_vector(std::ostream& os, const RVector& v, Index n) {
    for (Index i = 0; i < n; ++i) os << ',' << fmt(v.size() == n ? v(i) : kNaN);
}

CorrelationSpec scaled(const CorrelationSpec& c, double s) {
    CorrelationSpec out = c;
    out.error_var *= s;
    return out;
}

}  // namespace

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ----- Spec -------------------------------------------------------------

void ExperimentSpec::validate() const {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (scenario != "table1" && noise_grid.empty()) throw ConfigError("noise grid must be non-empty");
    for (double s : noise_grid)
        if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("noise variances must be finite and > 0");
    if (!robust && !naive) throw ConfigError("at least one of robust / naive must be enabled");
    if (!(power_cap > 0.0)) throw ConfigError("power_cap must be > 0");
    if (!(amse_target > 0.0 && amse_target < 1.0)) throw ConfigError("amse_target must lie in (0, 1)");
    if (!(weight > 0.0)) throw ConfigError("weight must be > 0");
    if (!(inner_delta > 0.0) || !(p2_delta > 0.0) || !(outer_tol > 0.0)) throw ConfigError("tolerances must be > 0");
    if (inner_max_iter < 1 || p2_inner_max_iter < 1 || max_outer < 1) throw ConfigError("iteration limits must be >= 1");
    if (!(tune_tolerance > 0.0)) throw ConfigError("tune_tolerance must be > 0");
    if (users < 1 || antennas_per_bs.empty()) throw ConfigError("network must have users and BSs");
    try {
        corr.validate(static_cast<Index>(antennas_per_bs.size()), users);
        if (scenario == "table1") large_scale.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

ExperimentSpec preset(const std::string& name) {
    ExperimentSpec s;
    s.scenario = name;
    if (name == "fig3" || name == "fig4") {
        s.trials = 100;
        s.noise_grid = log_grid(10.0, 1.0 / std::sqrt(10.0), 8);
        s.power_cap = 2.0;
        s.corr.rho = name == "fig3" ? rows_from({{0.25, 0.5, 0.2, 0.4}, {0.6, 0.1, 0.8, 0.15}})
                                    : rows_from({{0.35, 0.5, 0.3, 0.4}, {0.6, 0.2, 0.8, 0.25}});
        s.corr.error_var = per_user_error_var();
    } else if (name == "p2-fixture") {
        s.trials = 1;
        s.noise_grid = {0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.001};
        s.power_cap = 15.0;
        s.amse_target = 0.2;
        s.corr.rho = rows_from({{0.25, 0.5, 0.2, 0.4}, {0.6, 0.1, 0.8, 0.15}});
        s.corr.error_var = per_user_error_var();
    } else if (name == "table1") {
        s.trials = 20;
        s.naive = false;
        s.warm_start = false;
        sync_table1(s);
        s.corr = CorrelationSpec::uniform(kHexCells, s.users, 0.25, 0.02);
    } else {
        throw ConfigError("unknown scenario '" + name + "' (fig3, fig4, p2-fixture, table1)");
    }
    return s;
}

void apply_config(const std::map<std::string, std::string>& kv, ExperimentSpec& spec) {
    if (auto it = kv.find("scenario"); it != kv.end()) spec = preset(trim(it->second));

    std::map<std::string, std::string> rest;
    for (const auto& [k, v] : kv)
        if (k != "scenario") rest.emplace(k, v);

    if (spec.scenario == "table1") {
        std::vector<std::string> unused;
        try {
            unused = apply_scenario_keys(rest, spec.large_scale);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config: invalid large-scale parameter: ") + e.what());
        }
        std::map<std::string, std::string> left;
        for (const auto& k : unused) left.emplace(k, rest.at(k));
        rest.swap(left);
        const Index old_users = spec.users;
        sync_table1(spec);
        if (spec.users != old_users) spec.corr = CorrelationSpec::uniform(kHexCells, spec.users, 0.25, 0.02);
    } else {
        if (auto it = rest.find("antennas_per_bs"); it != rest.end()) {
            spec.antennas_per_bs.clear();
            for (double v : parse_list(it->first, it->second)) spec.antennas_per_bs.push_back(static_cast<Index>(v));
            rest.erase(it);
        }
        if (auto it = rest.find("users"); it != rest.end()) {
            spec.users = static_cast<Index>(parse_int(it->first, it->second));
            rest.erase(it);
        }
    }

    const Index bs = static_cast<Index>(spec.antennas_per_bs.size());
    if (spec.corr.rho.rows() != bs || spec.corr.rho.cols() != spec.users) {
        spec.corr.rho = RMatrix::Zero(bs, spec.users);
        spec.corr.error_var = RMatrix::Zero(bs, spec.users);
    }

    for (const auto& [key, value] : rest) {
        if (key == "seed") spec.seed = static_cast<std::uint64_t>(parse_int(key, value));
        else if (key == "trials") spec.trials = static_cast<int>(parse_int(key, value));
        else if (key == "noise_grid") spec.noise_grid = parse_list(key, value);
        else if (key == "robust") spec.robust = parse_bool(key, value);
        else if (key == "naive") spec.naive = parse_bool(key, value);
        else if (key == "warm_start") spec.warm_start = parse_bool(key, value);
        else if (key == "threads") spec.threads = static_cast<int>(parse_int(key, value));
        else if (key == "power_cap") spec.power_cap = parse_double(key, value);
        else if (key == "amse_target") spec.amse_target = parse_double(key, value);
        else if (key == "weight") spec.weight = parse_double(key, value);
        else if (key == "rho") spec.corr.rho = expand_links(key, parse_list(key, value), bs, spec.users);
        else if (key == "error_var") spec.corr.error_var = expand_links(key, parse_list(key, value), bs, spec.users);
        else if (key == "inner_delta") spec.inner_delta = parse_double(key, value);
        else if (key == "p2_delta") spec.p2_delta = parse_double(key, value);
        else if (key == "inner_max_iter") spec.inner_max_iter = static_cast<int>(parse_int(key, value));
        else if (key == "p2_inner_max_iter") spec.p2_inner_max_iter = static_cast<int>(parse_int(key, value));
        else if (key == "outer_tol") spec.outer_tol = parse_double(key, value);
        else if (key == "max_outer") spec.max_outer = static_cast<int>(parse_int(key, value));
        else if (key == "tune") spec.tune = parse_bool(key, value);
        else if (key == "tune_tolerance") spec.tune_tolerance = parse_double(key, value);
        else if (key == "out") spec.out = trim(value);
        else if (key == "trace") spec.trace = trim(value);
        else throw ConfigError("config: unknown key '" + key + "'");
    }
    if (spec.scenario == "table1") spec.power_cap = spec.large_scale.power_per_antenna_w;
    spec.validate();
}

ExperimentSpec load_spec(const std::string& path, const std::string& default_scenario) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::map<std::string, std::string> kv;
    try {
        kv = parse_kv_config(in);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    ExperimentSpec spec = preset(default_scenario);
    apply_config(kv, spec);
    return spec;
}

NetworkConfig network_for(const ExperimentSpec& spec, double noise_var) {
    return NetworkConfig::uniform(spec.antennas_per_bs, spec.users, spec.power_cap, noise_var, spec.weight,
                                  spec.amse_target);
}

P1Options p1_options(const ExperimentSpec& spec) {
    P1Options o;
    o.inner.delta = spec.inner_delta;
    o.inner.max_iter = spec.inner_max_iter;
    o.outer_tol = spec.outer_tol;
    o.max_outer = spec.max_outer;
    o.warm_start = spec.warm_start;
    return o;
}

P2Options p2_options(const ExperimentSpec& spec) {
    P2Options o;
    o.inner.delta = spec.p2_delta;
    o.inner.max_iter = spec.p2_inner_max_iter;
    o.outer_tol = spec.outer_tol;
    o.max_outer = spec.max_outer;
    o.warm_start = spec.warm_start;
    return o;
}

// ----- Weighted-sum sweep ----------------------------------------------

namespace {

struct P1Point {
    double snr = kNaN;
    double robust_sum = kNaN, naive_sum = kNaN;
    RVector robust_powers, naive_powers;
    double robust_inner = kNaN, robust_outer = kNaN, naive_inner = kNaN, naive_outer = kNaN;
    bool monotone = true;
    KKTReport kkt;
};

ChannelSet p1_trial_channel(const ExperimentSpec& spec, int trial) {
    Rng rng(spec.seed + static_cast<std::uint64_t>(trial));
    const NetworkConfig cfg = network_for(spec, spec.noise_grid.front());
    const Index bs = static_cast<Index>(spec.antennas_per_bs.size());
    return sample_channel(cfg, spec.corr, RMatrix::Ones(bs, spec.users), rng);
}

P1Point solve_p1_point(const ExperimentSpec& spec, const ChannelSet& set, const ChannelSet& naive_set,
                       double noise_var, P1Report* robust_out, P1Report* naive_out) {
    const NetworkConfig cfg = network_for(spec, noise_var);
    const P1Options opts = p1_options(spec);
    P1Point pt;
    double p_sum = kNaN;
    if (spec.robust) {
        P1Report rep = algorithm2(cfg, set, opts);
        pt.robust_sum = user_amse(set, rep.transceiver, cfg.noise_var).sum();
        pt.robust_powers = rep.powers;
        pt.robust_inner = mean_inner_iterations(rep);
        pt.robust_outer = rep.outer_iterations;
        pt.monotone = pt.monotone && p1_monotone(rep);
        pt.kkt = kkt_report_p1(rep.lambda, rep.transceiver.precoders, rep.design_receivers, cfg, set);
        p_sum = rep.powers.sum();
        if (robust_out) *robust_out = std::move(rep);
    }
    if (spec.naive) {
        P1Report rep = algorithm2(cfg, naive_set, opts);
        pt.naive_sum = user_amse(set, rep.transceiver, cfg.noise_var).sum();
        pt.naive_powers = rep.powers;
        pt.naive_inner = mean_inner_iterations(rep);
        pt.naive_outer = rep.outer_iterations;
        pt.monotone = pt.monotone && p1_monotone(rep);
        if (!spec.robust) p_sum = rep.powers.sum();
        if (naive_out) *naive_out = std::move(rep);
    }
    pt.snr = p_sum / noise_var;
    return pt;
}

}  // namespace

P1SweepResult run_p1_sweep(const ExperimentSpec& spec) {
    spec.validate();
    if (!spec.is_p1()) throw ConfigError("p1-sweep needs a weighted-sum scenario (fig3, fig4)");
    const std::size_t grid = spec.noise_grid.size();
    std::vector<std::vector<P1Point>> results(static_cast<std::size_t>(spec.trials));

    parallel_for(spec.trials, spec.threads, [&](int t) {
        const ChannelSet set = p1_trial_channel(spec, t);
        const ChannelSet naive_set = set.without_errors();
        auto& row = results[static_cast<std::size_t>(t)];
        for (double s2 : spec.noise_grid) row.push_back(solve_p1_point(spec, set, naive_set, s2, nullptr, nullptr));
    });

    P1SweepResult res;
    res.antennas = network_for(spec, 1.0).num_antennas();
    res.robust = spec.robust;
    res.naive = spec.naive;
    const double trials = static_cast<double>(spec.trials);
    for (std::size_t g = 0; g < grid; ++g) {
        P1SweepRow row;
        row.noise_var = spec.noise_grid[g];
        double snr = 0.0, rs = 0.0, ns = 0.0, ri = 0.0, ro = 0.0, ni = 0.0, no = 0.0;
        RVector rp = RVector::Zero(res.antennas), np = RVector::Zero(res.antennas);
        for (const auto& trial : results) {
            const P1Point& pt = trial[g];
            snr += pt.snr;
            rs += pt.robust_sum;
            ns += pt.naive_sum;
            ri += pt.robust_inner;
            ro += pt.robust_outer;
            ni += pt.naive_inner;
            no += pt.naive_outer;
            if (spec.robust) rp += pt.robust_powers;
            if (spec.naive) np += pt.naive_powers;
            res.monotone = res.monotone && pt.monotone;
        }
        row.snr_db = 10.0 * std::log10(snr / trials);
        row.robust_sum_amse = rs / trials;
        row.naive_sum_amse = ns / trials;
        row.robust_inner_iterations = ri / trials;
        row.robust_outer_iterations = ro / trials;
        row.naive_inner_iterations = ni / trials;
        row.naive_outer_iterations = no / trials;
        row.robust_powers = spec.robust ? RVector(rp / trials) : RVector::Constant(res.antennas, kNaN);
        row.naive_powers = spec.naive ? RVector(np / trials) : RVector::Constant(res.antennas, kNaN);
        res.rows.push_back(std::move(row));
    }
    if (spec.robust)
        for (const auto& trial : results)
            for (const auto& pt : trial) res.kkt.push_back(pt.kkt);
    return res;
}

void write_p1_csv(std::ostream& os, const P1SweepResult& res) {
    os << "noise_var,snr_db,robust_sum_amse,naive_sum_amse";
    write_vector_header(os, "robust_power_", res.antennas);
    write_vector_header(os, "naive_power_", res.antennas);
    os << ",robust_inner_iterations,robust_outer_iterations,naive_inner_iterations,naive_outer_iterations\n";
    for (const auto& r : res.rows) {
        os << fmt(r.noise_var) << ',' << fmt(r.snr_db) << ',' << fmt(r.robust_sum_amse) << ','
           << fmt(r.naive_sum_amse);
        write_vector(os, r.robust_powers, res.antennas);
        write_vector(os, r.naive_powers, res.antennas);
        os << ',' << fmt(r.robust_inner_iterations) << ',' << fmt(r.robust_outer_iterations) << ','
           << fmt(r.naive_inner_iterations) << ',' << fmt(r.naive_outer_iterations) << '\n';
    }
}

// ----- Power-minimization sweep ----------------------------------------

namespace {

struct P2Solve {
    P2Report report;
    P2Design design;
};

// Receivers from a weighted-sum solve on the same channel model, then P2.
P2Solve solve_p2_design(const ExperimentSpec& spec, const NetworkConfig& cfg, const ChannelSet& design_set,
                        const ChannelSet& truth_set) {
    const P1Report init = algorithm2(cfg, design_set, p1_options(spec));
    P2Solve out;
    out.report = solve_p2(cfg, design_set, init.transceiver.receivers, p2_options(spec));
    const P2Report& r = out.report;
    out.design.total_power = r.verdict == P2Verdict::Infeasible ? kNaN : r.total_power;
    out.design.amse = user_amse(truth_set, r.transceiver, cfg.noise_var);
    out.design.powers = r.powers;
    out.design.verdict = r.verdict;
    out.design.outer_iterations = r.outer_iterations;
    if (r.verdict != P2Verdict::Infeasible)
        out.design.kkt = kkt_report_p2(r.lambda, r.nu, r.transceiver.precoders, r.design_receivers, cfg, design_set);
    return out;
}

}  // namespace

TuneResult tune_error_scale(const ExperimentSpec& spec, double noise_var, double target_power) {
    const NetworkConfig cfg = network_for(spec, noise_var);
    const ChannelSet truth = fixture_channel(spec.corr);
    const double upper = (1.0 + spec.tune_tolerance) * target_power;
    TuneResult best;
    best.scale = 0.0;

    auto evaluate = [&](double s) {
        ++best.evaluations;
        const ChannelSet set = fixture_channel(scaled(spec.corr, s));
        P2Solve sol = solve_p2_design(spec, cfg, set, truth);
        const double power = sol.report.verdict == P2Verdict::Infeasible ? std::numeric_limits<double>::infinity()
                                                                          : sol.report.total_power;
        if (power <= upper && s >= best.scale) {
            best.scale = s;
            best.total_power = power;
            best.amse = sol.design.amse;
            best.matched = power >= target_power * (1.0 - spec.tune_tolerance);
        }
        return power;
    };

    evaluate(0.0);
    if (evaluate(1.0) <= upper) return best;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double power = evaluate(mid);
        if (power <= upper) {
            lo = mid;
            if (power >= target_power) break;
        } else {
            hi = mid;
        }
    }
    return best;
}

P2SweepResult run_p2_sweep(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.scenario != "p2-fixture") throw ConfigError("p2-sweep needs the p2-fixture scenario");
    if (spec.users != 4 || spec.antennas_per_bs != std::vector<Index>{2, 2})
        throw ConfigError("p2-fixture is defined for 2 BSs x 2 antennas and 4 users");
    const int points = static_cast<int>(spec.noise_grid.size());
    std::vector<P2SweepRow> rows(static_cast<std::size_t>(points));
    std::vector<char> monotone(static_cast<std::size_t>(points), 1);

    parallel_for(points, spec.threads, [&](int i) {
        const double s2 = spec.noise_grid[static_cast<std::size_t>(i)];
        const NetworkConfig cfg = network_for(spec, s2);
        const ChannelSet set = fixture_channel(spec.corr);
        P2SweepRow& row = rows[static_cast<std::size_t>(i)];
        row.noise_var = s2;
        bool mono = true;
        if (spec.robust) {
            P2Solve r = solve_p2_design(spec, cfg, set, set);
            mono = mono && p2_monotone(r.report);
            row.robust = std::move(r.design);
        }
        if (spec.naive) {
            P2Solve n = solve_p2_design(spec, cfg, set.without_errors(), set);
            mono = mono && p2_monotone(n.report);
            row.naive = std::move(n.design);
            if (spec.tune && std::isfinite(row.naive.total_power))
                row.tuned = tune_error_scale(spec, s2, row.naive.total_power);
        }
        monotone[static_cast<std::size_t>(i)] = mono;
    });

    P2SweepResult res;
    res.rows = std::move(rows);
    res.users = spec.users;
    res.robust = spec.robust;
    res.naive = spec.naive;
    res.tune = spec.tune && spec.naive;
    res.monotone = std::all_of(monotone.begin(), monotone.end(), [](char m) { return m != 0; });
    return res;
}

void write_p2_csv(std::ostream& os, const P2SweepResult& res) {
    const Index k = res.users;
    os << "noise_var,robust_total_power,naive_total_power";
    write_vector_header(os, "robust_amse_", k);
    write_vector_header(os, "naive_amse_", k);
    os << ",robust_verdict,naive_verdict";
    if (res.tune) {
        os << ",tuned_scale,tuned_total_power";
        write_vector_header(os, "tuned_amse_", k);
    }
    os << '\n';
    for (const auto& r : res.rows) {
        os << fmt(r.noise_var) << ',' << fmt(res.robust ? r.robust.total_power : kNaN) << ','
           << fmt(res.naive ? r.naive.total_power : kNaN);
        write_vector(os, r.robust.amse, k);
        write_vector(os, r.naive.amse, k);
        os << ',' << (res.robust ? to_string(r.robust.verdict) : "none") << ','
           << (res.naive ? to_string(r.naive.verdict) : "none");
        if (res.tune) {
            os << ',' << fmt(r.tuned.scale) << ',' << fmt(r.tuned.total_power);
            write_vector(os, r.tuned.amse, k);
        }
        os << '\n';
    }
}

// ----- Convergence study ------------------------------------------------

int ConvergenceResult::max_iterations() const {
    int m = 0;
    for (const auto& s : stages) m = std::max(m, s.iterations);
    return m;
}

ConvergenceResult run_convergence(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.scenario != "table1") throw ConfigError("convergence needs the table1 scenario");
    std::vector<std::vector<ConvergenceStage>> per_trial(static_cast<std::size_t>(spec.trials));
    std::vector<double> snr(static_cast<std::size_t>(spec.trials));

    parallel_for(spec.trials, spec.threads, [&](int t) {
        Rng rng(spec.seed + static_cast<std::uint64_t>(t));
        const HexLayout layout = hex_scenario(spec.large_scale, rng);
        const NetworkConfig cfg = network_for(spec, layout.noise_power_w);
        const ChannelSet set = sample_channel(cfg, spec.corr, layout.gains, rng);
        const P1Report rep = algorithm2(cfg, set, p1_options(spec));
        auto& out = per_trial[static_cast<std::size_t>(t)];
        for (std::size_t s = 0; s < rep.inner.size(); ++s) {
            const DualStateP1& st = rep.inner[s];
            ConvergenceStage cs;
            cs.trial = t;
            cs.stage = static_cast<int>(s);
            cs.iterations = st.iterations;
            cs.converged = st.converged;
            cs.initial_objective = st.objective_trace.front();
            cs.final_objective = st.objective_trace.back();
            cs.monotone = is_non_increasing(st.objective_trace);
            cs.trace = st.objective_trace;
            out.push_back(std::move(cs));
        }
        snr[static_cast<std::size_t>(t)] = cell_edge_snr_db(spec.large_scale);
    });

    ConvergenceResult res;
    for (auto& trial : per_trial)
        for (auto& s : trial) res.stages.push_back(std::move(s));
    res.cell_edge_snr_db = std::move(snr);
    return res;
}

void write_convergence_csv(std::ostream& os, const ConvergenceResult& res) {
    os << "trial,stage,iterations,converged,initial_objective,final_objective,monotone\n";
    for (const auto& s : res.stages)
        os << s.trial << ',' << s.stage << ',' << s.iterations << ',' << (s.converged ? 1 : 0) << ','
           << fmt(s.initial_objective) << ',' << fmt(s.final_objective) << ',' << (s.monotone ? 1 : 0) << '\n';
}

void write_convergence_trace(std::ostream& os, const ConvergenceResult& res) {
    os << "trial,stage,iteration,objective\n";
    for (const auto& s : res.stages) {
        if (s.trial != 0) continue;
        for (std::size_t i = 0; i < s.trace.size(); ++i)
            os << s.trial << ',' << s.stage << ',' << i << ',' << fmt(s.trace[i]) << '\n';
    }
}

// ----- Verification instances --------------------------------------------

Instance random_p1_instance(Rng& rng) {
    const Index per_bs = pick(rng, 1, 2);
    const Index bs = std::min<Index>(pick(rng, 1, 4), 8 / per_bs);
    const Index users = pick(rng, 1, 8);
    Instance inst;
    inst.cfg = NetworkConfig::uniform(std::vector<Index>(static_cast<std::size_t>(bs), per_bs), users, 1.0, 1.0);
    for (Index n = 0; n < inst.cfg.num_antennas(); ++n) inst.cfg.power_caps(n) = 0.5 + 2.5 * unit(rng);
    for (Index k = 0; k < users; ++k) {
        inst.cfg.noise_var(k) = 0.05 + unit(rng);
        inst.cfg.weights(k) = 0.5 + 1.5 * unit(rng);
    }
    CorrelationSpec corr;
    corr.rho.resize(bs, users);
    corr.error_var.resize(bs, users);
    for (Index l = 0; l < bs; ++l)
        for (Index k = 0; k < users; ++k) {
            corr.rho(l, k) = 0.9 * unit(rng);
            corr.error_var(l, k) = 0.1 * unit(rng);
        }
    inst.set = sample_channel(inst.cfg, corr, RMatrix::Ones(bs, users), rng);
    inst.receivers = sample_cgauss(users, 1.0, rng);
    return inst;
}

Instance random_feasible_p2_instance(Rng& rng) {
    Instance inst = random_p1_instance(rng);
    const CMatrix b0 = 0.5 * row_normalized_precoders(inst.set.estimates, inst.cfg.power_caps);
    inst.receivers = mamse_receivers(inst.set, b0, inst.cfg.noise_var);
    const RVector a0 = user_amse(inst.set, {b0, inst.receivers}, inst.cfg.noise_var);
    inst.cfg.amse_targets = (a0.array() + 0.5 * (1.0 - a0.array())).matrix();
    return inst;
}

Instance starved_p2_instance(std::uint64_t seed) {
    Rng rng(seed);
    ExperimentSpec spec = preset("fig3");
    Instance inst;
    inst.cfg = NetworkConfig::uniform({2, 2}, 4, 1e-4 * (1.0 + unit(rng)), 0.1, 1.0, 0.2);
    inst.set = sample_channel(inst.cfg, spec.corr, RMatrix::Ones(2, 4), rng);
    inst.receivers = algorithm2(inst.cfg, inst.set).transceiver.receivers;
    return inst;
}

VerifyResult verify(const ExperimentSpec& spec) {
    if (spec.trials < 1) throw ConfigError("trials must be >= 1");
    const int n = spec.trials;
    std::vector<VerifyRow> rows(static_cast<std::size_t>(2 * n));

    parallel_for(2 * n, spec.threads, [&](int j) {
        const int i = j % n;
        VerifyRow& row = rows[static_cast<std::size_t>(j)];
        row.instance = i;
        if (j < n) {
            Rng rng(spec.seed + static_cast<std::uint64_t>(i));
            const Instance inst = random_p1_instance(rng);
            const DualFactors df = dual_factors(inst.set, inst.receivers, inst.cfg.weights);
            AlgorithmIOptions o;
            o.delta = spec.inner_delta;
            o.max_iter = 200000;
            const DualStateP1 st = algorithm1(df.f, df.r, inst.cfg.power_caps, o);
            const PgResultP1 pg = pg_dual_p1(df.f, df.r, inst.cfg.power_caps);
            row.problem = "p1";
            row.algorithm = st.objective_trace.back();
            row.oracle = pg.value;
            row.iterations = st.iterations;
            const CMatrix a = build_a(inst.set, inst.receivers, inst.cfg.weights, st.lambda);
            const CMatrix b = precoders_from_dual(a, inst.set.estimates, inst.receivers, inst.cfg.weights);
            row.kkt = kkt_report_p1(st.lambda, b, inst.receivers, inst.cfg, inst.set);
            row.antennas = inst.cfg.num_antennas();
            row.users = inst.cfg.users;
        } else {
            Rng rng(spec.seed + 1000003u + static_cast<std::uint64_t>(i));
            const Instance inst = random_feasible_p2_instance(rng);
            AlgorithmIIIOptions o;
            o.delta = spec.p2_delta;
            o.max_iter = spec.p2_inner_max_iter;
            const DualStateP2 st = algorithm3(inst.cfg, inst.set, inst.receivers, o);
            const PgResultP2 pg = pg_dual_p2(inst.cfg, inst.set, inst.receivers);
            row.problem = "p2";
            row.algorithm = -st.objective_trace.back();
            row.oracle = pg.value;
            row.iterations = st.iterations;
            row.kkt = kkt_report_p2(st.lambda, st.nu, st.precoders, inst.receivers, inst.cfg, inst.set);
            row.antennas = inst.cfg.num_antennas();
            row.users = inst.cfg.users;
        }
        row.relative_gap = std::abs(row.algorithm - row.oracle) / std::max(1.0, std::abs(row.oracle));
    });

    VerifyResult res;
    res.rows = std::move(rows);
    for (const auto& r : res.rows) {
        double& worst = r.problem == "p1" ? res.max_gap_p1 : res.max_gap_p2;
        worst = std::isfinite(r.relative_gap) ? std::max(worst, r.relative_gap) : std::numeric_limits<double>::infinity();
    }
    return res;
}

void write_verify_csv(std::ostream& os, const VerifyResult& res) {
    os << "instance,problem,antennas,users,algorithm,oracle,relative_gap,iterations,"
          "power_violation,slackness,amse_violation,dual_gap\n";
    for (const auto& r : res.rows)
        os << r.instance << ',' << r.problem << ',' << r.antennas << ',' << r.users << ',' << fmt(r.algorithm) << ','
           << fmt(r.oracle) << ',' << fmt(r.relative_gap) << ',' << r.iterations << ','
           << fmt(r.kkt.power_violation) << ',' << fmt(r.kkt.slackness) << ',' << fmt(r.kkt.amse_violation) << ','
           << fmt(r.kkt.dual_gap) << '\n';
}

// ----- Traces -----------------------------------------------------------

void write_p1_trace(std::ostream& os, const ExperimentSpec& spec) {
    spec.validate();
    if (!spec.is_p1()) throw ConfigError("p1 trace needs a weighted-sum scenario");
    const ChannelSet set = p1_trial_channel(spec, 0);
    const ChannelSet naive_set = set.without_errors();
    os << "noise_var,design,level,outer,iteration,objective,max_power_violation,lambda_min,lambda_max\n";
    for (double s2 : spec.noise_grid) {
        P1Report robust, naive;
        solve_p1_point(spec, set, naive_set, s2, &robust, &naive);
        const std::pair<const char*, const P1Report*> designs[] = {{"robust", spec.robust ? &robust : nullptr},
                                                                   {"naive", spec.naive ? &naive : nullptr}};
        for (const auto& [name, rep] : designs) {
            if (!rep) continue;
            for (std::size_t o = 0; o < rep->objective_trace.size(); ++o)
                os << fmt(s2) << ',' << name << ",outer," << o << ',' << o << ',' << fmt(rep->objective_trace[o])
                   << ",nan,nan,nan\n";
            for (std::size_t o = 0; o < rep->inner.size(); ++o) {
                const auto& steps = rep->inner[o].steps;
                for (std::size_t i = 0; i < steps.size(); ++i)
                    os << fmt(s2) << ',' << name << ",inner," << o << ',' << i << ',' << fmt(steps[i].objective)
                       << ',' << fmt(steps[i].max_power_violation) << ',' << fmt(steps[i].lambda_min) << ','
                       << fmt(steps[i].lambda_max) << '\n';
            }
        }
    }
}

void write_p2_trace(std::ostream& os, const ExperimentSpec& spec) {
    spec.validate();
    if (spec.scenario != "p2-fixture") throw ConfigError("p2 trace needs the p2-fixture scenario");
    os << "noise_var,design,level,outer,iteration,objective,nu_max,max_power_violation,max_amse_violation\n";
    const ChannelSet set = fixture_channel(spec.corr);
    for (double s2 : spec.noise_grid) {
        const NetworkConfig cfg = network_for(spec, s2);
        for (int d = 0; d < 2; ++d) {
            if ((d == 0 && !spec.robust) || (d == 1 && !spec.naive)) continue;
            const char* name = d == 0 ? "robust" : "naive";
            const ChannelSet design_set = d == 0 ? set : set.without_errors();
            const P2Report rep = solve_p2_design(spec, cfg, design_set, set).report;
            for (std::size_t o = 0; o < rep.power_trace.size(); ++o)
                os << fmt(s2) << ',' << name << ",outer," << o << ',' << o << ',' << fmt(rep.power_trace[o])
                   << ",nan,nan,nan\n";
            for (std::size_t o = 0; o < rep.inner.size(); ++o) {
                const auto& steps = rep.inner[o].steps;
                for (std::size_t i = 0; i < steps.size(); ++i)
                    os << fmt(s2) << ',' << name << ",inner," << o << ',' << i << ',' << fmt(steps[i].objective)
                       << ',' << fmt(steps[i].nu_max) << ',' << fmt(steps[i].max_power_violation) << ','
                       << fmt(steps[i].max_amse_violation) << '\n';
            }
        }
    }
}

}  // namespace rcomp
