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

#ifndef mapbeam_beamforming_H
#define mapbeam_beamforming_H

#include "mapbeam/channel.hpp"
#include "mapbeam/conic.hpp"
#include "mapbeam/geometry.hpp"
#include "mapbeam/sensing.hpp"

#include <cstdint>
#include <vector>

namespace mapb
{
    // Beamforming for a committed (binary) antenna placement. With the
    // placement fixed, every quantity collapses from the selection-expanded
    // MN-dimensional space to the N antennas actually populated: user channels
    // become N-vectors, steering vectors become N-vectors, and the design
    // variables are the K user covariances W_k plus one sensing covariance R,
    // all N×N. The transmit-power minimization is solved as a semidefinite
    // relaxation with SINR floors per user, a beampattern matching error cap,
    // and per-target beampattern floors that enforce the detection-outage
    // chance constraint.

    // Scenario data reduced to the populated antenna positions.
    struct EffectiveScenario
    {
        int N = 0;  // antennas
        int K = 0;  // communication users
        int E = 0;  // sensing targets
        int QL = 0; // beampattern grid points (elevation-major flattening)

        Eigen::MatrixXcd h_eff; // K × N user channels at the selected positions
        Eigen::MatrixXcd a_grid; // QL × N steering vectors over the pattern grid
        Eigen::MatrixXcd a_tgt;  // E × N steering vectors at the target angles
        Eigen::VectorXd ideal;   // QL ideal pattern (0/1), elevation-major
        Eigen::VectorXd thr;     // E beampattern floors from the chance constraint
        Eigen::VectorXd gamma_lin; // K linear SINR targets
        Eigen::VectorXd sigma2;    // K per-user noise powers [W]
        double delta_d = 0.0;      // beampattern MSE cap
    };

    EffectiveScenario make_effective_scenario(const GridSpec &grid, const Placement &placement,
                                              const ChannelMatrix &chan,
                                              const TargetSpec &targets, const BeamGrid &bgrid);

    struct SdrControls
    {
        double eps = 1e-7;    // conic solver tolerance (scaled units)
        int max_iters = 50000;
        double rank_tol = 1e-6; // second-to-first eigenvalue ratio for rank one
        int randomization_draws = 200;
        std::uint64_t randomization_seed = 0x5eedULL;
        bool verbose = false;
        const conic::Solution *warm_start = nullptr;
    };

    // Committed-design feasibility at the reporting tolerances: each ratio is
    // the worst achieved/required quotient (>= 1 means satisfied), and the
    // matching error is compared against its cap with 1e-4 relative slack.
    struct DesignCheck
    {
        bool ok = false;
        double min_sinr_ratio = 0.0;
        double mse = 0.0;
        double min_pattern_ratio = 0.0;
    };

    struct BeamformingResult
    {
        conic::SolveStatus status = conic::SolveStatus::numerical_failure;
        bool feasible = false; // committed design passes check_design
        double power = 0.0;    // committed transmit power [W]
        double rho0 = 0.0;     // matched ideal-pattern amplitude
        std::vector<Eigen::MatrixXcd> W; // SDR user covariances
        Eigen::MatrixXcd R;              // sensing covariance
        std::vector<Eigen::VectorXcd> w; // committed beamformers
        bool rank_one_all = false;
        bool randomized = false; // Gaussian randomization fallback used
        int iterations = 0;
        conic::Solution raw; // solver state (normalized units) for warm starts
        double power_scale = 1.0;
    };

    // Normalization scales; the relaxation is assembled and solved in units
    // where powers, channels, and beampattern levels are all O(1).
    double channel_rms(const EffectiveScenario &sc);
    double p1_power_scale(const EffectiveScenario &sc);

    // Assembles the normalized relaxation: minimize total (scaled) transmit
    // power over PSD W_k, R and the pattern amplitude, subject to SINR floors,
    // the QR-compressed matching-error second-order cone, and per-target
    // beampattern floors.
    conic::Program assemble_p1(const EffectiveScenario &sc, double power_scale,
                               double channel_scale);

    BeamformingResult solve_p1(const EffectiveScenario &sc, const SdrControls &ctl = {});

    // Post-solution analysis helpers (original, unscaled units). The sensing
    // covariance contributes interference at every user, so the SINR of user k
    // is h_k^H W_k h_k / (sum_{j != k} h_k^H W_j h_k + h_k^H R h_k + sigma_k²).
    Eigen::VectorXd evaluate_sinr(const Eigen::MatrixXcd &h_eff, const Eigen::VectorXd &sigma2,
                                  const std::vector<Eigen::MatrixXcd> &W,
                                  const Eigen::MatrixXcd &R);
    Eigen::VectorXd evaluate_sinr(const Eigen::MatrixXcd &h_eff, const Eigen::VectorXd &sigma2,
                                  const std::vector<Eigen::VectorXcd> &w,
                                  const Eigen::MatrixXcd &R);

    // Beampattern levels a_i^H (Σ_k w_k w_k^H + R) a_i for each row a_i.
    Eigen::VectorXd pattern_levels(const Eigen::MatrixXcd &a_rows,
                                   const std::vector<Eigen::VectorXcd> &w,
                                   const Eigen::MatrixXcd &R);

    // Mean squared beampattern matching error of a committed design.
    double committed_mse(const EffectiveScenario &sc, const std::vector<Eigen::VectorXcd> &w,
                         const Eigen::MatrixXcd &R, double rho0);

    DesignCheck check_design(const EffectiveScenario &sc, const std::vector<Eigen::VectorXcd> &w,
                             const Eigen::MatrixXcd &R, double rho0);

    // Eigen-decomposes the sensing covariance into per-beam vectors scaled by
    // the square roots of the eigenvalues (negligible modes dropped).
    std::vector<Eigen::VectorXcd> extract_sensing_beams(const Eigen::MatrixXcd &R,
                                                        double rel_tol = 1e-10);

} // namespace mapb

#endif
