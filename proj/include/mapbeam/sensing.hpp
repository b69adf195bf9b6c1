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

#ifndef mapbeam_sensing_H
#define mapbeam_sensing_H

#include <Eigen/Dense>
#include <vector>

#include "mapbeam/channel.hpp"
#include "mapbeam/geometry.hpp"
#include "mapbeam/rng.hpp"

namespace mapb
{
    // Sensing-target geometry, fluctuation statistics and QoS thresholds.
    // The radar cross-section of each target fluctuates per dwell as an
    // exponential variate with mean omega_av (Swerling-I).
    struct TargetSpec
    {
        std::vector<double> theta;    // E elevations, radians
        std::vector<double> phi;      // E azimuths, radians
        std::vector<double> psi;      // E ranges, meters
        std::vector<double> gamma_th; // E sensing-SNR thresholds, linear
        double omega_av = 1.0;        // mean RCS, m^2
        double sigma_e2 = 0.0;        // echo noise variance, watts
        double nu = 0.0;              // outage tolerance, in (0,1)

        int E() const { return static_cast<int>(theta.size()); }
        void validate() const;
    };

    // Uniform angle grid over [−π/2, π/2]² with the binary ideal beampattern
    // (1 inside the ±Δ elevation / ±δ azimuth box of any target) and the MSE
    // cap δ_d that the realized pattern must meet.
    struct BeamGrid
    {
        int L = 0; // elevation samples
        int Q = 0; // azimuth samples
        double half_width_el = 0.0; // Δ, radians
        double half_width_az = 0.0; // δ, radians
        double delta_d = 0.0;       // beampattern MSE cap (watts²)
        std::vector<double> thetas; // L
        std::vector<double> phis;   // Q
        Eigen::MatrixXd ideal;      // L×Q, entries in {0,1}

        int points() const { return L * Q; }
    };

    // Builds the grid and the piecewise ideal pattern (pointwise union over
    // all targets). delta_d is left at 0 and set by calibrate_delta_d or by
    // configuration.
    BeamGrid ideal_pattern(int L, int Q, double half_width_el, double half_width_az,
                           const TargetSpec &targets);

    // Realized transmit beampattern at one direction: â^H (F_sum + Y) â for
    // the concatenated FRV â and MN×MN covariance factors. Real and
    // nonnegative whenever F_sum + Y is PSD.
    double beampattern_value(const Eigen::VectorXcd &ahat, const Eigen::MatrixXcd &F_sum,
                             const Eigen::MatrixXcd &Y);

    // Mean squared deviation between the scaled ideal pattern ρ0·𝒟 and the
    // realized pattern of F_sum+Y over the whole grid:
    //   (1/(QL))·Σ_{l,q} (ρ0·𝒟(θ_l,φ_q) − â^H(θ_l,φ_q)(F_sum+Y)â(θ_l,φ_q))².
    double beampattern_mse(double rho0, const GridSpec &g, const BeamGrid &grid, int N,
                           const Eigen::MatrixXcd &F_sum_plus_Y);

    // Same metric evaluated for a committed placement with the small (N×N)
    // covariances: lifts via the selected-position steering vectors.
    double beampattern_mse_committed(double rho0, const GridSpec &g, const BeamGrid &grid,
                                     const Eigen::MatrixXd &B,
                                     const std::vector<Eigen::MatrixXcd> &W,
                                     const Eigen::MatrixXcd &R);

    // Closed-form chance-constraint threshold for target e: the beampattern
    // value at the target direction must satisfy
    //   value ≥ −16π·Ψ_e⁴·σ_e²·Γ_e^th / (ln(1−ν)·Ω_av·L0²),
    // which is equivalent to Pr{Γ_e ≤ Γ_e^th} ≤ ν under the exponential RCS
    // law. ln(1−ν) < 0 makes the right-hand side positive.
    double chance_threshold(const TargetSpec &t, int e, double L0);

    // Sensing SNR for one RCS draw: Γ_e = Ω_e·L0²·value/(16π·Ψ_e⁴·σ_e²).
    double sensing_snr(double omega_sample, double L0, double psi_e, double sigma_e2,
                       double beampattern_value_at_target);

    // One Swerling-I RCS draw: exponential with mean omega_av.
    double sample_rcs(double omega_av, Rng &rng);

    // Calibrates the beampattern MSE cap for one scenario. The reference is
    // the minimum achievable MSE of a least-squares pattern fit over the
    // committed-placement pattern space (indefinite Hermitian quadratic form
    // on the selected-position steering vectors, i.e. unconstrained by the
    // PSD/SINR/chance structure), with the scale pinned: ρ0 is fixed to
    // rho_ref and the fit must reach rho_ref on the ideal-pattern support.
    // Returned cap = multiplier × that minimum. Calibrated once per scenario
    // at the initial placement and held fixed so that objectives stay
    // comparable across iterations and schemes.
    double calibrate_delta_d(const GridSpec &g, const BeamGrid &grid,
                             const std::vector<int> &placement_indices, double rho_ref,
                             double multiplier);

} // namespace mapb

#endif
