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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace rcomp;

namespace {

template <class Writer, class Result>
std::string to_csv(Writer write, const Result& res) {
    std::ostringstream os;
    write(os, res);
    return os.str();
}

ExperimentSpec spec_from(const std::string& scenario, const std::map<std::string, std::string>& overrides) {
    ExperimentSpec spec = preset(scenario);
    apply_config(overrides, spec);
    return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Robust distributed transceiver design for coordinated base stations";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SingularMatrix>(m, "SingularMatrix", PyExc_ArithmeticError);
    py::register_exception<InfeasibleUser>(m, "InfeasibleUser", PyExc_RuntimeError);
    py::register_exception<BracketFailure>(m, "BracketFailure", PyExc_RuntimeError);

    // numerics / channel
    m.def("hermitian_inverse", &hermitian_inverse, py::arg("m"));
    m.def("psd_sqrt", &psd_sqrt, py::arg("m"));
    m.def("exp_correlation", &exp_correlation, py::arg("rho"), py::arg("n"));
    m.def("fixture_p2", &fixture_p2, "Published 4 x 4 estimate; row k is h_hat_k^H");
    m.def("thermal_noise_power", [] { return thermal_noise_power(LargeScaleScenario{}); },
          "Noise power (W) of the 19-cell scenario");
    m.def("cell_edge_snr_db", [] { return cell_edge_snr_db(LargeScaleScenario{}); });

    // closed forms and oracles
    m.def("nu_update", &nu_update, py::arg("rho1"), py::arg("rho2"), py::arg("rho3"));
    m.def("scalar_min", &scalar_min, py::arg("rho1"), py::arg("rho2"), py::arg("rho3"));
    m.def("lambda_update_p2", &lambda_update_p2, py::arg("rho0"), py::arg("power_cap"), py::arg("floor") = 0.0);

    m.def(
        "algorithm1",
        [](const CMatrix& f, const CMatrix& r, const RVector& p, double delta, int max_iter) {
            AlgorithmIOptions o;
            o.delta = delta;
            o.max_iter = max_iter;
            const DualStateP1 st = algorithm1(f, r, p, o);
            py::dict d;
            d["lambda"] = st.lambda;
            d["objective_trace"] = st.objective_trace;
            d["iterations"] = st.iterations;
            d["converged"] = st.converged;
            return d;
        },
        py::arg("f"), py::arg("r"), py::arg("power_caps"), py::arg("delta") = 1e-12, py::arg("max_iter") = 1000);
    m.def(
        "pg_dual_p1",
        [](const CMatrix& f, const CMatrix& r, const RVector& p) {
            const PgResultP1 pg = pg_dual_p1(f, r, p);
            py::dict d;
            d["lambda"] = pg.lambda;
            d["value"] = pg.value;
            d["iterations"] = pg.iterations;
            d["converged"] = pg.converged;
            return d;
        },
        py::arg("f"), py::arg("r"), py::arg("power_caps"));
    m.def("dual_objective_p1", &dual_objective_p1, py::arg("lambda_"), py::arg("f"), py::arg("r"),
          py::arg("power_caps"));

    // experiments: every entry takes a scenario name and string overrides
    // using the configuration-file keys, and returns CSV text.
    m.def(
        "p1_sweep",
        [](const std::string& scenario, const std::map<std::string, std::string>& overrides) {
            const ExperimentSpec spec = spec_from(scenario, overrides);
            P1SweepResult res;
            {
                py::gil_scoped_release release;
                res = run_p1_sweep(spec);
            }
            return to_csv(write_p1_csv, res);
        },
        py::arg("scenario") = "fig3", py::arg("overrides") = std::map<std::string, std::string>{});
    m.def(
        "p2_sweep",
        [](const std::map<std::string, std::string>& overrides) {
            const ExperimentSpec spec = spec_from("p2-fixture", overrides);
            P2SweepResult res;
            {
                py::gil_scoped_release release;
                res = run_p2_sweep(spec);
            }
            return to_csv(write_p2_csv, res);
        },
        py::arg("overrides") = std::map<std::string, std::string>{});
    m.def(
        "convergence",
        [](const std::map<std::string, std::string>& overrides) {
            const ExperimentSpec spec = spec_from("table1", overrides);
            ConvergenceResult res;
            {
                py::gil_scoped_release release;
                res = run_convergence(spec);
            }
            return to_csv(write_convergence_csv, res);
        },
        py::arg("overrides") = std::map<std::string, std::string>{});
    m.def(
        "verify",
        [](const std::map<std::string, std::string>& overrides) {
            ExperimentSpec spec = preset("fig3");
            spec.trials = 50;
            apply_config(overrides, spec);
            VerifyResult res;
            {
                py::gil_scoped_release release;
                res = verify(spec);
            }
            return py::make_tuple(res.max_gap_p1, res.max_gap_p2, to_csv(write_verify_csv, res));
        },
        py::arg("overrides") = std::map<std::string, std::string>{},
        "Returns (max p1 gap, max p2 gap, csv text)");
}
