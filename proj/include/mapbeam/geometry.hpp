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

#ifndef mapbeam_geometry_H
#define mapbeam_geometry_H

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace mapb
{
    // Quantized square transmitter region. Antennas may occupy any of the
    // M = s^2 lattice points of pitch d covering the aλ×aλ area, with the
    // first position at the origin corner. Enumeration is row-major with x
    // varying fastest, so index m (0-based) sits at
    //   (x, y) = ((m mod s)·d, (m div s)·d).
    struct GridSpec
    {
        double a = 0.0;      // normalized size; area side is a·lambda meters
        double d = 0.0;      // lattice pitch in meters
        double lambda = 0.0; // carrier wavelength in meters
        int s = 0;           // lattice side count
        int M = 0;           // number of candidate positions, M = s^2
        Eigen::MatrixX2d positions; // M×2, (x, y) in meters

        double x(int m) const { return positions(m, 0); }
        double y(int m) const { return positions(m, 1); }
    };

    // One antenna's selection over the M candidate positions. In binary mode
    // exactly one entry is 1; in relaxed mode entries lie in [0,1] and sum
    // to 1 (the continuous relaxation used by the placement subproblem).
    struct SelectionVector
    {
        enum class Mode
        {
            binary,
            relaxed
        };
        Eigen::VectorXd b;
        Mode mode = Mode::binary;
    };

    // Joint placement of the N movable antennas plus the minimum-separation
    // requirement b_n^T D b_{n'} >= D_min for every antenna pair.
    struct Placement
    {
        std::vector<SelectionVector> b; // N selection vectors, each length M
        double d_min = 0.0;             // meters

        int N() const { return static_cast<int>(b.size()); }
        bool all_binary() const;

        // Committed position index of antenna n; requires binary mode.
        int position_index(int n) const;
    };

    struct MinDistanceReport
    {
        bool ok = false;
        std::vector<std::pair<int, int>> violating_pairs; // antenna indices (n, n')
    };

    // Builds the candidate lattice. Side count is s = floor(a·lambda/d) + 1 so
    // the lattice spans the full area when a·lambda is a multiple of d; the
    // quotient is evaluated with a tiny relative guard because exact-multiple
    // configurations (e.g. 0.12/0.01) land below the integer in IEEE doubles.
    GridSpec build_grid(double a, double d, double lambda);

    // M×M matrix of pairwise Euclidean distances between candidate positions.
    Eigen::MatrixXd distance_matrix(const GridSpec &g);

    // Helper constructors for selection vectors.
    SelectionVector binary_selection(int M, int position_index);
    SelectionVector relaxed_selection(const Eigen::VectorXd &b);

    // Convenience: binary placement from a list of position indices.
    Placement make_placement(const GridSpec &g, const std::vector<int> &pos_indices,
                             double d_min);

    // The MN×N block matrix with b_n occupying rows nM..(n+1)M-1 of column n
    // and zeros elsewhere; the committed/relaxed channel map is H = Ĥ·B.
    Eigen::MatrixXd expand_block_matrix(const Placement &p);

    // Checks b_n^T D b_{n'} >= d_min for all n != n' on a binary placement and
    // reports every violating pair. Relaxed placements are rejected: the
    // physical separation constraint is only meaningful for committed
    // positions.
    MinDistanceReport check_min_distance(const Placement &p, const Eigen::MatrixXd &D);

} // namespace mapb

#endif
