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

#include "mapbeam/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace mapb
{

    bool Placement::all_binary() const
    {
        for (const auto &sv : b)
            if (sv.mode != SelectionVector::Mode::binary)
                return false;
        return true;
    }

    int Placement::position_index(int n) const
    {
        const auto &sv = b.at(static_cast<std::size_t>(n));
        if (sv.mode != SelectionVector::Mode::binary)
            throw std::invalid_argument("Placement::position_index: selection vector is not binary");
        int idx = 0;
        sv.b.maxCoeff(&idx);
        return idx;
    }

    GridSpec build_grid(double a, double d, double lambda)
    {
        if (a <= 0.0 || d <= 0.0 || lambda <= 0.0)
            throw std::invalid_argument("build_grid: a, d and lambda must be positive");

        // floor(a·lambda/d) with a relative epsilon guard: configurations where
        // a·lambda is an exact multiple of d (the common case in the reference
        // parameter set) otherwise lose one full lattice row to rounding.
        double q = a * lambda / d;
        int side = static_cast<int>(std::floor(q * (1.0 + 1e-12) + 1e-12)) + 1;

        GridSpec g;
        g.a = a;
        g.d = d;
        g.lambda = lambda;
        g.s = side;
        g.M = side * side;
        g.positions.resize(g.M, 2);
        for (int m = 0; m < g.M; ++m)
        {
            g.positions(m, 0) = static_cast<double>(m % side) * d; // x fastest
            g.positions(m, 1) = static_cast<double>(m / side) * d;
        }
        return g;
    }

    Eigen::MatrixXd distance_matrix(const GridSpec &g)
    {
        Eigen::MatrixXd D(g.M, g.M);
        for (int i = 0; i < g.M; ++i)
        {
            D(i, i) = 0.0;
            for (int j = i + 1; j < g.M; ++j)
            {
                double dx = g.positions(i, 0) - g.positions(j, 0);
                double dy = g.positions(i, 1) - g.positions(j, 1);
                D(i, j) = D(j, i) = std::sqrt(dx * dx + dy * dy);
            }
        }
        return D;
    }

    SelectionVector binary_selection(int M, int position_index)
    {
        if (position_index < 0 || position_index >= M)
            throw std::invalid_argument("binary_selection: position index out of range");
        SelectionVector sv;
        sv.b = Eigen::VectorXd::Zero(M);
        sv.b(position_index) = 1.0;
        sv.mode = SelectionVector::Mode::binary;
        return sv;
    }

    SelectionVector relaxed_selection(const Eigen::VectorXd &b)
    {
        constexpr double tol = 1e-9;
        if ((b.array() < -tol).any() || (b.array() > 1.0 + tol).any())
            throw std::invalid_argument("relaxed_selection: entries must lie in [0,1]");
        if (std::abs(b.sum() - 1.0) > tol)
            throw std::invalid_argument("relaxed_selection: entries must sum to 1");
        SelectionVector sv;
        sv.b = b.cwiseMax(0.0).cwiseMin(1.0);
        sv.mode = SelectionVector::Mode::relaxed;
        return sv;
    }

    Placement make_placement(const GridSpec &g, const std::vector<int> &pos_indices,
                             double d_min)
    {
        Placement p;
        p.d_min = d_min;
        p.b.reserve(pos_indices.size());
        for (int idx : pos_indices)
            p.b.push_back(binary_selection(g.M, idx));
        return p;
    }

    Eigen::MatrixXd expand_block_matrix(const Placement &p)
    {
        const int N = p.N();
        if (N == 0)
            throw std::invalid_argument("expand_block_matrix: empty placement");
        const int M = static_cast<int>(p.b.front().b.size());
        for (const auto &sv : p.b)
            if (sv.b.size() != M)
                throw std::invalid_argument("expand_block_matrix: selection vectors differ in length");

        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<long>(M) * N, N);
        for (int n = 0; n < N; ++n)
            B.block(static_cast<long>(n) * M, n, M, 1) = p.b[static_cast<std::size_t>(n)].b;
        return B;
    }

    MinDistanceReport check_min_distance(const Placement &p, const Eigen::MatrixXd &D)
    {
        if (!p.all_binary())
            throw std::invalid_argument("check_min_distance: placement must be binary");

        MinDistanceReport rep;
        rep.ok = true;
        const int N = p.N();
        for (int n = 0; n < N; ++n)
        {
            for (int m = n + 1; m < N; ++m)
            {
                double dist = p.b[static_cast<std::size_t>(n)].b.transpose() * D *
                              p.b[static_cast<std::size_t>(m)].b;
                if (dist < p.d_min) // hard physical limit: >= with no slack
                {
                    rep.ok = false;
                    rep.violating_pairs.emplace_back(n, m);
                }
            }
        }
        return rep;
    }

} // namespace mapb
