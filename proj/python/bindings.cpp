// SPDX-License-Identifier: Apache-2.0
//
// mapbeam — movable-antenna placement and dual-function beamforming
// Copyright (C) 2026 mapbeam contributors
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
//
// Python surface of the library: experiment configuration, scenario
// construction, the proposed scheme and its baselines, the exhaustive
// oracle, Monte-Carlo outage validation and CSV emission.

#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mapbeam/config.hpp"
#include "mapbeam/evaluation.hpp"

namespace py = pybind11;
using namespace mapb;

PYBIND11_MODULE(mapbeam, m)
{
    m.doc() = "movable-antenna placement and dual-function beamforming";
    m.attr("__version__") = "1.0.0";

    py::class_<SdrControls>(m, "SdrControls",
                            "Beamforming-subproblem solver controls")
        .def(py::init<>())
        .def_readwrite("eps", &SdrControls::eps)
        .def_readwrite("max_iters", &SdrControls::max_iters)
        .def_readwrite("rank_tol", &SdrControls::rank_tol)
        .def_readwrite("randomization_draws", &SdrControls::randomization_draws);

    py::class_<AOConfig>(m, "AOConfig", "Alternating-optimization controls")
        .def(py::init<>())
        .def_readwrite("eps_ao", &AOConfig::eps_ao)
        .def_readwrite("max_ao_iters", &AOConfig::max_ao_iters)
        .def_readwrite("restarts", &AOConfig::restarts)
        .def_readwrite("seed", &AOConfig::seed)
        .def_readwrite("baseline_pool", &AOConfig::baseline_pool)
        .def_readwrite("extra_inits", &AOConfig::extra_inits)
        .def_readwrite("p1", &AOConfig::p1)
        .def_readwrite("p2_eps", &AOConfig::p2_eps)
        .def_readwrite("p2_max_iters", &AOConfig::p2_max_iters);

    py::class_<ExperimentConfig>(m, "ExperimentConfig",
                                 "Scenario, sweep and algorithm parameters "
                                 "(defaults are the desk-scale profile)")
        .def(py::init<>())
        .def_readwrite("N", &ExperimentConfig::N)
        .def_readwrite("K", &ExperimentConfig::K)
        .def_readwrite("carrier_hz", &ExperimentConfig::f_c)
        .def_readwrite("wavelength", &ExperimentConfig::lambda)
        .def_readwrite("a", &ExperimentConfig::a)
        .def_readwrite("d", &ExperimentConfig::d)
        .def_readwrite("d_min", &ExperimentConfig::d_min)
        .def_readwrite("L_p", &ExperimentConfig::L_p)
        .def_readwrite("alpha", &ExperimentConfig::alpha)
        .def_readwrite("L0", &ExperimentConfig::L0)
        .def_readwrite("sigma2", &ExperimentConfig::sigma2)
        .def_readwrite("gamma_th", &ExperimentConfig::gamma_th)
        .def_readwrite("user_dist_min", &ExperimentConfig::user_dist_min)
        .def_readwrite("user_dist_max", &ExperimentConfig::user_dist_max)
        .def_readwrite("target_theta_deg", &ExperimentConfig::target_theta_deg)
        .def_readwrite("target_phi_deg", &ExperimentConfig::target_phi_deg)
        .def_readwrite("target_range", &ExperimentConfig::target_range)
        .def_readwrite("Gamma_th", &ExperimentConfig::Gamma_th)
        .def_readwrite("omega_av", &ExperimentConfig::omega_av)
        .def_readwrite("sigma_e2", &ExperimentConfig::sigma_e2)
        .def_readwrite("nu", &ExperimentConfig::nu)
        .def_readwrite("L", &ExperimentConfig::L)
        .def_readwrite("Q", &ExperimentConfig::Q)
        .def_readwrite("half_el_deg", &ExperimentConfig::half_el_deg)
        .def_readwrite("half_az_deg", &ExperimentConfig::half_az_deg)
        .def_readwrite("delta_d", &ExperimentConfig::delta_d)
        .def_readwrite("mse_fit_multiplier", &ExperimentConfig::mse_fit_multiplier)
        .def_readwrite("seeds", &ExperimentConfig::seeds)
        .def_readwrite("schemes", &ExperimentConfig::schemes)
        .def_readwrite("sweep_name", &ExperimentConfig::sweep_name)
        .def_readwrite("sweep_values", &ExperimentConfig::sweep_values)
        .def_readwrite("mc_samples", &ExperimentConfig::mc_samples)
        .def_readwrite("ao", &ExperimentConfig::ao)
        .def_property_readonly("E", &ExperimentConfig::E)
        .def("validate", &ExperimentConfig::validate);

    m.def("paper_profile", &paper_profile,
          "Published simulation parameters (large grid, long runtimes)");
    m.def(
        "parse_config_text",
        [](const std::string &text, const ExperimentConfig &base) {
            return parse_config_text(text, base);
        },
        py::arg("text"), py::arg("base") = ExperimentConfig{},
        "Parse dotted-key config text on top of a base configuration");
    m.def(
        "parse_config_file",
        [](const std::string &path, const ExperimentConfig &base) {
            return parse_config_file(path, base);
        },
        py::arg("path"), py::arg("base") = ExperimentConfig{});
    m.def("serialize_config", &serialize_config,
          "Canonical text form; parse(serialize(cfg)) == cfg");
    m.def("config_hash", &config_hash,
          "Key-order-independent hash of the configuration");

    py::class_<Scenario>(m, "Scenario", "One seeded solver-ready instance")
        .def_readonly("seed", &Scenario::seed)
        .def_readonly("d_min", &Scenario::d_min)
        .def_property_readonly("M", [](const Scenario &sc) { return sc.grid.M; })
        .def_property_readonly("grid_side",
                               [](const Scenario &sc) { return sc.grid.s; })
        .def_property_readonly(
            "delta_d", [](const Scenario &sc) { return sc.bgrid.delta_d; })
        .def_property_readonly("chance_thresholds", [](const Scenario &sc) {
            std::vector<double> thr;
            for (int e = 0; e < sc.targets.E(); e++)
                thr.push_back(chance_threshold(sc.targets, e, sc.chan.paths.L0));
            return thr;
        });

    m.def("build_scenario", &build_scenario, py::arg("config"), py::arg("seed"),
          "Build the seeded scenario (channel draw, targets, beam grid)");

    py::class_<ResultRecord>(m, "ResultRecord")
        .def_readonly("scheme", &ResultRecord::scheme)
        .def_readonly("seed", &ResultRecord::seed)
        .def_readonly("sweep_name", &ResultRecord::sweep_name)
        .def_readonly("sweep_value", &ResultRecord::sweep_value)
        .def_readonly("power_w", &ResultRecord::power_w)
        .def_readonly("power_dbm", &ResultRecord::power_dbm)
        .def_readonly("feasible", &ResultRecord::feasible)
        .def_readonly("iterations", &ResultRecord::iterations)
        .def_readonly("rank_one_all", &ResultRecord::rank_one_all)
        .def_readonly("outage_hat", &ResultRecord::outage_hat)
        .def_readonly("runtime_s", &ResultRecord::runtime_s)
        .def("__repr__", [](const ResultRecord &r) {
            std::ostringstream os;
            os << "<ResultRecord " << r.scheme << " seed=" << r.seed
               << " power_w=" << r.power_w << " feasible=" << r.feasible << ">";
            return os.str();
        });

    py::class_<SchemeRun>(m, "SchemeRun", "Committed design of one scheme run")
        .def_readonly("record", &SchemeRun::record)
        .def_readonly("indices", &SchemeRun::indices)
        .def_readonly("rho0", &SchemeRun::rho0)
        .def_property_readonly("R", [](const SchemeRun &r) { return r.R; })
        .def_property_readonly("w", [](const SchemeRun &r) { return r.w; });

    m.def("baseline_fixed", &baseline_fixed, py::arg("scenario"),
          py::arg("controls") = SdrControls{},
          "Beamforming at the λ/2 array snapped to the lattice");
    m.def("baseline_antenna_selection", &baseline_antenna_selection,
          py::arg("scenario"), py::arg("controls") = SdrControls{},
          "Best of all C(2N,N) subsets of the 2×N λ/2 array positions");
    m.def("proposed", &proposed_scheme, py::arg("scenario"),
          py::arg("config") = AOConfig{},
          "Alternating placement/beamforming optimization");
    m.def("oracle", &oracle_run, py::arg("scenario"),
          py::arg("controls") = SdrControls{}, py::arg("max_assignments") = 1e4,
          "Exhaustive placement search (guarded)");
    m.def("revalidate", &revalidate_run, py::arg("scenario"), py::arg("run"),
          "Independent re-check of every constraint of a feasible run");
    m.def(
        "monte_carlo_outage",
        [](const Scenario &sc, const SchemeRun &run, int samples,
           std::uint64_t seed) {
            Rng rng(seed);
            return monte_carlo_outage(sc.grid, sc.targets, sc.chan.paths.L0,
                                      run.indices, run.w, run.R, samples, rng);
        },
        py::arg("scenario"), py::arg("run"), py::arg("samples") = 100000,
        py::arg("seed") = 1,
        "Empirical per-target outage of a committed design");

    m.def(
        "run_sweep",
        [](const ExperimentConfig &cfg, int workers) {
            return run_sweep(cfg, workers);
        },
        py::arg("config"), py::arg("workers") = 1,
        "Full scheme × seed × sweep-value experiment");
    m.def(
        "results_csv",
        [](const std::vector<ResultRecord> &rows, int num_targets,
           bool mask_runtime) {
            std::ostringstream os;
            write_results_csv(os, rows, num_targets, mask_runtime);
            return os.str();
        },
        py::arg("rows"), py::arg("num_targets"), py::arg("mask_runtime") = false,
        "Rows rendered in the documented CSV schema");
}
