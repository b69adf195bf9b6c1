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
// Experiment layer: scenario construction from a declarative configuration,
// the two reference schemes (fixed array, antenna selection), the exhaustive
// placement oracle, Monte-Carlo validation of the sensing chance constraint,
// and the batch sweep driver with its CSV result schema.

#ifndef mapbeam_evaluation_H
#define mapbeam_evaluation_H

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mapbeam/beamforming.hpp"
#include "mapbeam/channel.hpp"
#include "mapbeam/geometry.hpp"
#include "mapbeam/placement.hpp"
#include "mapbeam/rng.hpp"
#include "mapbeam/sensing.hpp"

namespace mapb
{
    // Complete description of an experiment: the physical scenario, the
    // Monte-Carlo and sweep plumbing, and all algorithm knobs. Defaults are
    // the desk-scale profile (small enough for CI); paper_profile() switches
    // to the published simulation parameters.
    struct ExperimentConfig
    {
        // --- transmitter region and array --------------------------------
        int N = 2;             // movable antennas
        double f_c = 5e9;      // carrier frequency [Hz]
        double lambda = 0.06;  // wavelength [m]
        double a = 2.0;        // normalized region size (side = a·lambda)
        double d = 0.04;       // candidate-lattice pitch [m]
        double d_min = 0.015;  // minimum antenna separation [m]

        // --- users and multipath channel ----------------------------------
        int K = 2;                    // communication users
        int L_p = 8;                  // propagation paths per user
        double alpha = 2.2;           // path-loss exponent
        double L0 = 1e-3;             // reference loss at 1 m (linear)
        double sigma2 = 1e-11;        // receiver noise power [W]
        double gamma_th = 10.0;       // per-user SINR floor (linear)
        double user_dist_min = 10.0;  // user/scatterer distance range [m]
        double user_dist_max = 50.0;

        // --- sensing targets and chance constraint ------------------------
        std::vector<double> target_theta_deg{0.0};  // elevations [deg]
        std::vector<double> target_phi_deg{0.0};    // azimuths [deg]
        std::vector<double> target_range{15.0};     // ranges [m]
        double Gamma_th = 10.0;                     // sensing-SNR floor (linear)
        double omega_av = 1.0;                      // mean radar cross-section [m²]
        double sigma_e2 = 1e-11;                    // echo noise power [W]
        double nu = 0.01;                           // outage tolerance, in (0,1)

        // --- ideal beampattern grid ---------------------------------------
        int L = 31;                       // elevation samples
        int Q = 31;                       // azimuth samples
        double half_el_deg = 5.0;         // beam half-width Δ [deg]
        double half_az_deg = 5.0;         // beam half-width δ [deg]
        double delta_d = 0.0;             // MSE cap; 0 → calibrated per scenario
        double mse_fit_multiplier = 10.0; // cap = multiplier × best achievable

        // --- run plumbing --------------------------------------------------
        std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
        std::vector<std::string> schemes{"proposed", "baseline_fixed",
                                         "baseline_selection"};
        std::string sweep_name = "none";  // none | Gamma_th_db | nu | a
        std::vector<double> sweep_values; // empty for sweep_name == "none"
        int mc_samples = 100000;          // RCS draws per outage estimate

        // --- algorithm knobs -----------------------------------------------
        AOConfig ao; // alternating optimization + inner solver controls

        int E() const { return static_cast<int>(target_theta_deg.size()); }

        // Throws std::invalid_argument naming the offending field.
        void validate() const;
    };

    // Published simulation parameters (large grid; expect long runtimes).
    ExperimentConfig paper_profile();

    // One concrete, solver-ready instance: geometry, a seeded channel draw,
    // targets and the calibrated beampattern grid.
    struct Scenario
    {
        GridSpec grid;
        ChannelMatrix chan;
        TargetSpec targets;
        BeamGrid bgrid;
        double d_min = 0.0;
        std::uint64_t seed = 0;
    };

    // Builds the scenario for one seed. The channel draw consumes the seed
    // stream independently of the grid dimensions, so enlarging the region
    // keeps the channel values at shared candidate positions identical.
    // When cfg.delta_d == 0 the MSE cap is calibrated at the fixed-array
    // placement (falling back to a greedy spread if that array does not fit)
    // and held fixed for every scheme run on the scenario.
    Scenario build_scenario(const ExperimentConfig &cfg, std::uint64_t seed);

    // One row of results.csv. Infeasible rows carry power 0 and outage 1.
    struct ResultRecord
    {
        std::string scheme;
        std::uint64_t seed = 0;
        std::string sweep_name = "none";
        double sweep_value = 0.0;
        double power_w = 0.0;
        double power_dbm = 0.0;
        bool feasible = false;
        int iterations = 0; // AO iterations (1 for single-solve schemes)
        bool rank_one_all = false;
        std::vector<double> outage_hat; // per-target empirical outage
        double runtime_s = 0.0;         // wall-clock, excluded from determinism
    };

    // Committed design of a scheme run, kept for validation and Monte Carlo.
    struct SchemeRun
    {
        ResultRecord record;
        std::vector<int> indices;        // committed placement (sorted)
        std::vector<Eigen::VectorXcd> w; // committed beamformers
        Eigen::MatrixXcd R;              // sensing covariance
        double rho0 = 0.0;
        AOResult ao; // populated by the proposed scheme only
    };

    // Reference scheme 1: beamforming at the λ/2-spaced array snapped to the
    // lattice. Infeasibility is reported in the record, not thrown.
    SchemeRun baseline_fixed(const Scenario &sc, const SdrControls &ctl);

    // Reference scheme 2: enumerate all C(2N, N) subsets of the 2×N λ/2
    // planar-array candidate positions and keep the cheapest feasible one.
    SchemeRun baseline_antenna_selection(const Scenario &sc, const SdrControls &ctl);

    // Proposed scheme: alternating placement/beamforming optimization.
    SchemeRun proposed_scheme(const Scenario &sc, const AOConfig &cfg);

    // Realized beampattern value of a committed design at each target
    // direction, a_e^H (Σ_k w_k w_k^H + R) a_e.
    std::vector<double> committed_target_values(const GridSpec &grid,
                                                const TargetSpec &targets,
                                                const std::vector<int> &indices,
                                                const std::vector<Eigen::VectorXcd> &w,
                                                const Eigen::MatrixXcd &R);

    // Empirical per-target outage Pr{Γ_e ≤ Γ_e^th} of a committed design
    // under the exponential RCS law; one independent sample stream per
    // target, drawn sequentially from rng.
    std::vector<double> monte_carlo_outage(const GridSpec &grid, const TargetSpec &targets,
                                           double L0, const std::vector<int> &indices,
                                           const std::vector<Eigen::VectorXcd> &w,
                                           const Eigen::MatrixXcd &R, int samples,
                                           Rng &rng);

    // Closed-form outage of a design whose beampattern value at the target
    // is `value`: Pr{Γ_e ≤ Γ_e^th} = 1 − exp(−c/Ω_av) with the RCS level c
    // at which the sensing SNR meets its floor exactly.
    double analytic_outage(const TargetSpec &targets, int e, double L0, double value);

    // Ground truth for small instances: enumerate every distance-feasible
    // unordered placement and solve the beamforming problem at each.
    struct OracleResult
    {
        bool feasible = false;
        double power = 0.0;
        std::vector<int> indices; // best placement (sorted)
        int placements = 0;       // feasible placements enumerated
    };

    // Refuses (std::invalid_argument) when the ordered assignment count
    // C(M,N)·N! exceeds max_assignments (default guard 1e4).
    OracleResult oracle_exhaustive(const Scenario &sc, const SdrControls &ctl,
                                   double max_assignments = 1e4);

    // oracle_exhaustive packaged as a scheme run (record + committed design,
    // iterations = placements enumerated) for the batch tool.
    SchemeRun oracle_run(const Scenario &sc, const SdrControls &ctl,
                         double max_assignments = 1e4);

    // Independent re-check of every reported constraint of a feasible run:
    // SINR floors, beampattern floors, the MSE cap and the minimum antenna
    // distance. Used as a gate before any record is written.
    bool revalidate_run(const Scenario &sc, const SchemeRun &run);

    // Applies one sweep-axis value to a configuration (Gamma_th_db in dB,
    // nu as a probability, a as the normalized region size).
    ExperimentConfig apply_sweep(const ExperimentConfig &base, const std::string &axis,
                                 double value);

    // Optimization trace of one sweep cell, kept for trace_<seed>.csv.
    struct SweepCellDetail
    {
        std::string scheme;
        std::uint64_t seed = 0;
        double sweep_value = 0.0;
        std::vector<AOTraceRow> trace;
    };

    // Full experiment: for every scheme × seed × sweep value, build the
    // scenario, run the scheme, attach the Monte-Carlo outage estimate and
    // re-validate. Individual failures are flagged rows; the sweep continues.
    // Rows are ordered deterministically by (scheme, seed, sweep value)
    // regardless of the worker count: each (scheme, seed) chain is an
    // independent task (sweep levels stay sequential within a chain so the
    // previous level can seed the next), and every task writes to its own
    // pre-assigned slots. When details is non-null it receives the
    // alternating-optimization traces of the proposed-scheme cells in the
    // same deterministic order.
    std::vector<ResultRecord> run_sweep(const ExperimentConfig &cfg, int workers = 1,
                                        std::vector<SweepCellDetail> *details = nullptr);

    // CSV emission in the documented column order with %.10g formatting:
    // scheme,seed,sweep_name,sweep_value,power_w,power_dbm,feasible,
    // iterations,rank_one_all,outage_hat_1..E,runtime_s.
    void write_results_csv(std::ostream &os, const std::vector<ResultRecord> &rows,
                           int num_targets, bool mask_runtime = false);

    // Per-seed optimization trace (iteration, objective, binary violation,
    // penalty values, solver status).
    void write_trace_csv(std::ostream &os, const std::vector<AOTraceRow> &trace);

} // namespace mapb

#endif
