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

#ifndef mapbeam_placement_H
#define mapbeam_placement_H

#include "mapbeam/beamforming.hpp"

#include <array>
#include <string>
#include <vector>

namespace mapb
{
    // Position subproblem: optimize the antenna placement for fixed
    // communication/sensing covariances. Selection binaries are relaxed to
    // [0,1]; pairwise-distance products are linearized exactly at binary
    // points (Glover); the bilinear lifted covariances F_k = B W_k B^T and
    // Y = B R B^T are handled through Schur-complement LMIs plus
    // Taylor-linearized trace bounds that enter the objective as penalties,
    // together with majorized binariness penalties on b and φ. The driver
    // alternates this subproblem with the beamforming subproblem, then rounds,
    // repairs the minimum-distance constraint, and re-solves the beamforming
    // at the committed binary placement.

    // Variable layout of one assembled position subproblem.
    struct P2Layout
    {
        int M = 0;  // candidate positions per antenna
        int N = 0;  // antennas
        int K = 0;  // users
        int MN = 0; // lifted dimension

        std::vector<int> Fk; // K lifted user covariance blocks (MN×MN)
        int Y = -1;          // lifted sensing covariance block
        std::vector<int> Sk; // per-user Schur slack S (MN×MN)
        std::vector<int> Tk; // per-user Schur slack T (MN×MN)
        int U = -1;          // sensing Schur slack (MN×MN)
        int V = -1;          // sensing Schur slack (MN×MN)
        int Gsum = -1;       // M×M block-sum of ΣF_k+Y (beampattern reduction)

        int b0 = -1;   // first of the N·M selection scalars (antenna-major)
        int phi0 = -1; // first of the pairs·M² product scalars
        std::vector<std::pair<int, int>> pairs; // unordered antenna pairs (n<n')

        int b_var(int n, int i) const { return b0 + n * M + i; }
        int phi_var(int pair_idx, int i, int j) const
        {
            return phi0 + (pair_idx * M + i) * M + j;
        }
        int num_pairs() const { return static_cast<int>(pairs.size()); }
    };

    // Declares all variables of the position subproblem on a fresh program.
    P2Layout p2_declare_variables(conic::Program &p, int M, int N, int K);

    // Exact linearization of the pairwise-distance products: for every
    // unordered antenna pair, auxiliary variables φ_{n,n',i,j} ∈ [0,1] with
    //   φ ≤ b_n[i],  φ ≤ b_{n'}[j],  φ ≥ b_n[i] + b_{n'}[j] − 1,
    //   Σ_{i,j} D_ij·φ_{n,n',i,j} ≥ d_min.
    // At binary b the φ are forced to the products, so feasibility coincides
    // with b_n^T D b_{n'} ≥ d_min.
    void glover_constraints(conic::Program &p, const P2Layout &lay, const Eigen::MatrixXd &D,
                            double d_min);

    // Schur-complement LMIs coupling the lifted covariances to B (covariances
    // in normalized units):
    //   [[S_k, F_k, B·W_k], [F_k^H, T_k, B], [W_k^H·B^T, B^T, I_N]] ⪰ 0,
    //   [[U,   Y,   B·R  ], [Y^H,   V,  B], [R^H·B^T,   B^T, I_N]] ⪰ 0.
    void schur_lmi_blocks(conic::Program &p, const P2Layout &lay,
                          const std::vector<Eigen::MatrixXcd> &W_norm,
                          const Eigen::MatrixXcd &R_norm);

    // Affine penalty expressions at the linearization point (b_t, phi_t):
    //   [0] Σ_k (tr S_k − g_{1,k}(B)),  g linearized around B^(t) (minorant)
    //   [1] tr U − g_2(B)
    //   [2] Σ_{n,m} (b − b^t(2b − b^t))   (majorized binariness of b)
    //   [3] Σ (φ − φ^t(2φ − φ^t))        (majorized binariness of φ)
    // All expressions are nonnegative over the feasible set and vanish at a
    // consistent binary point equal to the linearization point.
    std::array<conic::LinExpr, 4> taylor_penalty_terms(const conic::Program &p,
                                                       const P2Layout &lay,
                                                       const Eigen::MatrixXd &b_t,
                                                       const Eigen::MatrixXd &phi_t,
                                                       const std::vector<Eigen::MatrixXcd> &W_norm,
                                                       const Eigen::MatrixXcd &R_norm);

    // Numeric value of an affine expression at a point.
    double evaluate_expr(const conic::LinExpr &e, const Eigen::VectorXd &x);

    struct P2Controls
    {
        std::array<double, 4> tau = {1e3, 1e3, 1e3, 1e3}; // normalized units
        double eps = 1e-6;
        int max_iters = 30000;
        bool verbose = false;
        const conic::Solution *warm_start = nullptr;
    };

    struct P2Result
    {
        conic::SolveStatus status = conic::SolveStatus::numerical_failure;
        Eigen::MatrixXd b;   // N×M relaxed selections
        Eigen::MatrixXd phi; // pairs × M² relaxed products
        std::array<double, 4> penalty_values = {0, 0, 0, 0}; // τ-weighted, watts
        double binary_violation = 0.0; // Σ b(1−b)
        int iterations = 0;
        conic::Solution raw; // for warm starts
    };

    // Assembles the full position subproblem in normalized units. The fixed
    // data (W_k, R, rho0 in watts) is scaled internally by power_scale /
    // channel_scale, matching the beamforming subproblem's normalization.
    conic::Program assemble_p2(const GridSpec &grid, const ChannelMatrix &chan,
                               const TargetSpec &targets, const BeamGrid &bgrid,
                               const Eigen::MatrixXd &D, double d_min,
                               const Eigen::MatrixXd &b_t, const Eigen::MatrixXd &phi_t,
                               const std::vector<Eigen::MatrixXcd> &W,
                               const Eigen::MatrixXcd &R, double rho0,
                               const std::array<double, 4> &tau, double power_scale,
                               double channel_scale, P2Layout &lay);

    P2Result solve_p2(const GridSpec &grid, const ChannelMatrix &chan, const TargetSpec &targets,
                      const BeamGrid &bgrid, const Eigen::MatrixXd &D, double d_min,
                      const Eigen::MatrixXd &b_t, const Eigen::MatrixXd &phi_t,
                      const std::vector<Eigen::MatrixXcd> &W, const Eigen::MatrixXcd &R,
                      double rho0, double power_scale, double channel_scale,
                      const P2Controls &ctl);

    // Outer product point φ^t_{n,n',i,j} = b_n[i]·b_{n'}[j] for a selection
    // matrix (rows b_n), in the layout used by P2Result::phi.
    Eigen::MatrixXd phi_from_selection(const Eigen::MatrixXd &b,
                                       const std::vector<std::pair<int, int>> &pairs);

    // Deterministic maximally-spread initial placement: greedy farthest-point
    // selection on the lattice honoring the minimum separation. Throws if no
    // feasible placement exists for the requested N.
    std::vector<int> greedy_spread_placement(const GridSpec &grid, const Eigen::MatrixXd &D,
                                             int N, double d_min);

    // Seeded random distance-feasible placement (rejection sampling); returns
    // empty when none is found within the attempt budget.
    std::vector<int> random_feasible_placement(const GridSpec &grid, const Eigen::MatrixXd &D,
                                               int N, double d_min, Rng &rng,
                                               int max_attempts = 500);

    // Rounding of a relaxed selection matrix: per-antenna argmax first, then
    // greedy minimum-distance repair (the lower-confidence antenna of a
    // violating pair moves to its best non-violating candidate), then
    // alternative candidates obtained by demoting the least confident antenna
    // to its next-best positions. Deterministic; at most max_candidates
    // distance-feasible placements, best first.
    std::vector<std::vector<int>> rounding_candidates(const Eigen::MatrixXd &b_relaxed,
                                                      const Eigen::MatrixXd &D, double d_min,
                                                      int max_candidates = 5);

    struct AOConfig
    {
        std::array<double, 4> tau0 = {0.0, 0.0, 0.0, 0.0}; // 0 → 10× initial power
        double eps_ao = 1e-3;  // relative objective-change stopping tolerance
        int max_ao_iters = 30;
        int restarts = 1;           // seeded random initial placements
        std::uint64_t seed = 1;
        double rounding_tol = 1e-3; // reported binary-deviation tolerance
        bool baseline_pool = true;  // include fixed-array and selection-array
                                    // placements among the initial candidates
        std::vector<std::vector<int>> extra_inits; // caller-provided candidates

        SdrControls p1;
        // The position subproblem only proposes a relaxed placement that is
        // re-certified by the beamforming stage, so it is solved to a loose
        // tolerance; the first-order solver's dual tail makes tight targets
        // disproportionately expensive on the lifted LMI program.
        double p2_eps = 1e-2;
        int p2_max_iters = 10000;
        double tau_growth = 2.0;
        double tau_cap_factor = 1e6; // cap = factor × initial τ
        double stall_rel = 1e-3;     // binary-violation stall threshold
        int stall_window = 3;
        bool verbose = false;
    };

    struct AOTraceRow
    {
        int iteration = 0;
        double objective_watts = 0.0;  // incumbent power (accepted iterates)
        double binary_violation = 0.0; // Σ b(1−b) of the relaxed iterate
        std::array<double, 4> penalty_values = {0, 0, 0, 0}; // watts
        std::string solver_status;
    };
    using AOTrace = std::vector<AOTraceRow>;

    struct AOResult
    {
        bool feasible = false;
        Placement committed;    // binary
        BeamformingResult beams; // final beamforming at the committed placement
        AOTrace trace;
        double power = 0.0; // watts; meaningful when feasible
        std::vector<int> committed_indices;
        int p1_solves = 0;
        int p2_solves = 0;
    };

    // Alternating-optimization driver. Builds a deterministic pool of initial
    // placements (greedy spread, optional baseline-array placements, caller
    // extras, seeded random restarts), evaluates the beamforming subproblem on
    // each, then iterates beamforming/position subproblems from the best
    // candidate with a monotonicity safeguard (an iterate is accepted only if
    // the recorded power does not increase; otherwise the incumbent is kept
    // and the loop stops). The final relaxed placement is rounded, repaired,
    // and committed through a fresh beamforming solve.
    AOResult ao_run(const GridSpec &grid, const ChannelMatrix &chan, const TargetSpec &targets,
                    const BeamGrid &bgrid, double d_min, const AOConfig &cfg);

    // The two reference placements used by the baseline schemes, snapped to
    // the candidate lattice: a centered uniform planar array with λ/2 pitch
    // (fixed-antenna baseline) and the 2×N λ/2 array whose N-subsets the
    // selection baseline enumerates.
    std::vector<int> fixed_array_placement(const GridSpec &grid, int N);
    std::vector<int> selection_array_positions(const GridSpec &grid, int N);

} // namespace mapb

#endif
