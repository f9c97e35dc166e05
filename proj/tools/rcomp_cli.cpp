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

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::string out;
    bool naive = false;
    bool trace = false;
};

void add_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "Key/value configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "Base seed; trial t uses seed + t");
    cmd->add_option("--trials", f.trials, "Number of trials")->check(CLI::PositiveNumber);
    cmd->add_option("--out", f.out, "Output CSV path (default: stdout)");
    cmd->add_flag("--naive", f.naive, "Run only the non-robust design (error covariances forced to zero)");
    cmd->add_flag("--trace", f.trace, "Also write per-iteration traces next to --out");
}

std::string trace_path(const std::string& out) {
    if (out.empty()) return "rcomp-trace.csv";
    if (out.size() > 4 && out.compare(out.size() - 4, 4, ".csv") == 0)
        return out.substr(0, out.size() - 4) + ".trace.csv";
    return out + ".trace.csv";
}

rcomp::ExperimentSpec build_spec(const Flags& f, const std::string& default_scenario) {
    rcomp::ExperimentSpec spec =
        f.config.empty() ? rcomp::preset(default_scenario) : rcomp::load_spec(f.config, default_scenario);
    if (f.seed) spec.seed = *f.seed;
    if (f.trials) spec.trials = *f.trials;
    if (!f.out.empty()) spec.out = f.out;
    if (f.naive) {
        spec.robust = false;
        spec.naive = true;
    }
    if (f.trace && spec.trace.empty()) spec.trace = trace_path(spec.out);
    spec.validate();
    return spec;
}

void emit(const std::string& path, const std::function<void(std::ostream&)>& write) {
    if (path.empty()) {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    write(os);
    if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rcomp: robust transceiver design for coordinated base stations"};
    app.require_subcommand(1);

    Flags p1f, p2f, cvf, vf, fxf;
    auto* p1 = app.add_subcommand("p1-sweep", "Weighted-sum AMSE sweep over the noise grid (fig3, fig4)");
    auto* p2 = app.add_subcommand("p2-sweep", "Power-minimization sweep on the published estimate");
    auto* cv = app.add_subcommand("convergence", "Multiplier convergence on the 19-cell layout");
    auto* vf_cmd = app.add_subcommand("verify", "Distributed solvers against the projected-gradient oracles");
    auto* fx = app.add_subcommand("fixture", "Print the published 4 x 4 channel estimate as channel CSV");
    add_flags(p1, p1f);
    add_flags(p2, p2f);
    add_flags(cv, cvf);
    add_flags(vf_cmd, vf);
    add_flags(fx, fxf);

    CLI11_PARSE(app, argc, argv);

    try {
        if (p1->parsed()) {
            const auto spec = build_spec(p1f, "fig3");
            const auto res = rcomp::run_p1_sweep(spec);
            emit(spec.out, [&](std::ostream& os) { rcomp::write_p1_csv(os, res); });
            if (!spec.trace.empty())
                emit(spec.trace, [&](std::ostream& os) { rcomp::write_p1_trace(os, spec); });
        } else if (p2->parsed()) {
            const auto spec = build_spec(p2f, "p2-fixture");
            const auto res = rcomp::run_p2_sweep(spec);
            emit(spec.out, [&](std::ostream& os) { rcomp::write_p2_csv(os, res); });
            if (!spec.trace.empty())
                emit(spec.trace, [&](std::ostream& os) { rcomp::write_p2_trace(os, spec); });
        } else if (cv->parsed()) {
            const auto spec = build_spec(cvf, "table1");
            const auto res = rcomp::run_convergence(spec);
            emit(spec.out, [&](std::ostream& os) { rcomp::write_convergence_csv(os, res); });
            if (!spec.trace.empty())
                emit(spec.trace, [&](std::ostream& os) { rcomp::write_convergence_trace(os, res); });
            std::cerr << "max Algorithm I iterations over all stages: " << res.max_iterations() << '\n';
        } else if (vf_cmd->parsed()) {
            Flags f = vf;
            if (!f.trials) f.trials = 50;
            const auto spec = build_spec(f, "fig3");
            const auto res = rcomp::verify(spec);
            emit(spec.out, [&](std::ostream& os) { rcomp::write_verify_csv(os, res); });
            std::cerr << "max relative gap p1 " << rcomp::fmt(res.max_gap_p1) << ", p2 " << rcomp::fmt(res.max_gap_p2)
                      << (res.passed() ? " (ok)\n" : " (above 1e-5)\n");
            return res.passed() ? 0 : 1;
        } else if (fx->parsed()) {
            const auto spec = build_spec(fxf, "p2-fixture");
            const auto set = rcomp::fixture_channel(spec.corr);
            emit(spec.out, [&](std::ostream& os) { rcomp::write_channel_csv(os, set); });
        }
    } catch (const rcomp::ConfigError& e) {
        std::cerr << "rcomp: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "rcomp: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
