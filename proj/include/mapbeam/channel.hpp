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

#ifndef mapbeam_channel_H
#define mapbeam_channel_H

#include <Eigen/Dense>
#include <complex>
#include <iosfwd>
#include <vector>

#include "mapbeam/geometry.hpp"
#include "mapbeam/rng.hpp"

namespace mapb
{
    // One propagation path of one user's multipath channel.
    struct PathEntry
    {
        std::complex<double> weight; // complex path gain sigma_{l,k}
        double theta = 0.0;          // elevation AoD, radians, in [-pi/2, pi/2]
        double phi = 0.0;            // azimuth AoD, radians, in [-pi/2, pi/2]
        double distance = 0.0;       // scatterer distance, meters
    };

    // Per-user multipath parameter set plus the large-scale model constants.
    struct PathSet
    {
        int L_p = 0;        // paths per user
        double L0 = 0.0;    // reference path loss at 1 m (linear)
        double alpha = 0.0; // path-loss exponent
        std::vector<std::vector<PathEntry>> users; // K × L_p
        std::vector<double> user_distance;         // K, meters

        int K() const { return static_cast<int>(users.size()); }
    };

    // Stochastic channel over all candidate positions: the K×(M·N) matrix Ĥ
    // whose per-antenna blocks are identical because every movable antenna
    // draws its position from the same lattice. The committed/relaxed channel
    // is H = Ĥ·B with B from expand_block_matrix.
    struct ChannelMatrix
    {
        Eigen::MatrixXcd H_hat;          // K × (M·N)
        std::vector<double> sigma2;      // per-user noise variance, watts
        std::vector<double> gamma_th;    // per-user SINR threshold, linear
        PathSet paths;                   // generating parameters
        int M = 0;                       // candidate positions per antenna
        int N = 0;                       // movable antennas

        int K() const { return static_cast<int>(H_hat.rows()); }

        // Row k of the shared M-column block (identical for every antenna).
        Eigen::RowVectorXcd user_block(int k) const { return H_hat.row(k).head(M); }
    };

    // Field response vector of the full candidate lattice: entry m carries the
    // phase of a plane wave toward (theta, phi) at position p_m relative to
    // the origin position p_1,
    //   exp(j·(2π/λ)·((x_m−x_1)·cosθ·sinφ + (y_m−y_1)·sinθ)).
    Eigen::VectorXcd field_response(const GridSpec &g, double theta, double phi);

    // FRVs of the N identical per-antenna lattices concatenated: the MN-vector
    // â(θ,φ) = [a(θ,φ); ...; a(θ,φ)].
    Eigen::VectorXcd concatenated_field_response(const GridSpec &g, int N, double theta,
                                                 double phi);

    // Draws one angle-of-departure pair. Azimuth φ is uniform on
    // [−π/2, π/2]; elevation θ = arcsin(2u−1) realizes the cosθ/(2π) joint
    // density of the multipath model. Draw order: u (elevation), then azimuth.
    std::pair<double, double> sample_aod(Rng &rng);

    // Samples all path parameters for K users: per user a scatterer/user
    // distance uniform in [dist_lo, dist_hi] (shared by the user's paths) and
    // L_p paths with AoDs from sample_aod and weights CN(0, L0·D^-alpha).
    // Draw order per user: distance; then per path: AoD, Re/Im of the weight.
    PathSet generate_paths(int K, int L_p, double L0, double alpha, double dist_lo,
                           double dist_hi, Rng &rng);

    // Evaluates the channel value of every candidate position from the path
    // parameters, h_k(p_m) = Σ_l σ_{l,k}·[a(θ_l,φ_l)]_m, and assembles Ĥ by
    // tiling the shared block N times.
    ChannelMatrix channel_matrix(const GridSpec &g, int N, const PathSet &paths,
                                 const std::vector<double> &sigma2,
                                 const std::vector<double> &gamma_th);

    // Writes Ĥ and the generating path parameters as documented structured
    // text (complex entries as re/im pairs, row-major).
    void dump_channel(std::ostream &os, const ChannelMatrix &ch, std::uint64_t seed);

} // namespace mapb

#endif
