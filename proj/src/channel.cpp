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

#include "mapbeam/channel.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace mapb
{
    namespace
    {
        constexpr double pi = 3.14159265358979323846;
    }

    Eigen::VectorXcd field_response(const GridSpec &g, double theta, double phi)
    {
        const double k0 = 2.0 * pi / g.lambda;
        const double cs = std::cos(theta) * std::sin(phi);
        const double st = std::sin(theta);
        const double x0 = g.positions(0, 0);
        const double y0 = g.positions(0, 1);
        Eigen::VectorXcd a(g.M);
        for (int m = 0; m < g.M; ++m)
        {
            double rho = k0 * ((g.positions(m, 0) - x0) * cs + (g.positions(m, 1) - y0) * st);
            a(m) = std::complex<double>(std::cos(rho), std::sin(rho));
        }
        return a;
    }

    Eigen::VectorXcd concatenated_field_response(const GridSpec &g, int N, double theta,
                                                 double phi)
    {
        if (N < 1)
            throw std::invalid_argument("concatenated_field_response: N must be >= 1");
        Eigen::VectorXcd a = field_response(g, theta, phi);
        Eigen::VectorXcd ahat(static_cast<long>(g.M) * N);
        for (int n = 0; n < N; ++n)
            ahat.segment(static_cast<long>(n) * g.M, g.M) = a;
        return ahat;
    }

    std::pair<double, double> sample_aod(Rng &rng)
    {
        // Elevation density cosθ/2 on [−π/2, π/2] by inverse CDF
        // (F(θ) = (1+sinθ)/2), azimuth uniform — jointly cosθ/(2π).
        double u = rng.uniform();
        double theta = std::asin(2.0 * u - 1.0);
        double phi = rng.uniform(-pi / 2.0, pi / 2.0);
        return {theta, phi};
    }

    PathSet generate_paths(int K, int L_p, double L0, double alpha, double dist_lo,
                           double dist_hi, Rng &rng)
    {
        if (K < 1 || L_p < 1)
            throw std::invalid_argument("generate_paths: K and L_p must be >= 1");
        if (L0 <= 0.0 || dist_lo <= 0.0 || dist_hi < dist_lo)
            throw std::invalid_argument("generate_paths: invalid loss/distance parameters");

        PathSet ps;
        ps.L_p = L_p;
        ps.L0 = L0;
        ps.alpha = alpha;
        ps.users.resize(static_cast<std::size_t>(K));
        ps.user_distance.resize(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k)
        {
            double dist = rng.uniform(dist_lo, dist_hi);
            ps.user_distance[static_cast<std::size_t>(k)] = dist;
            auto &paths = ps.users[static_cast<std::size_t>(k)];
            paths.resize(static_cast<std::size_t>(L_p));
            const double var = L0 * std::pow(dist, -alpha);
            for (int l = 0; l < L_p; ++l)
            {
                auto [theta, phi] = sample_aod(rng);
                auto &e = paths[static_cast<std::size_t>(l)];
                e.theta = theta;
                e.phi = phi;
                e.distance = dist;
                e.weight = rng.complex_normal(var);
            }
        }
        return ps;
    }

    ChannelMatrix channel_matrix(const GridSpec &g, int N, const PathSet &paths,
                                 const std::vector<double> &sigma2,
                                 const std::vector<double> &gamma_th)
    {
        const int K = paths.K();
        if (static_cast<int>(sigma2.size()) != K || static_cast<int>(gamma_th.size()) != K)
            throw std::invalid_argument("channel_matrix: sigma2/gamma_th must have K entries");

        ChannelMatrix ch;
        ch.M = g.M;
        ch.N = N;
        ch.paths = paths;
        ch.sigma2 = sigma2;
        ch.gamma_th = gamma_th;
        ch.H_hat.resize(K, static_cast<long>(g.M) * N);

        Eigen::MatrixXcd block(K, g.M);
        block.setZero();
        for (int k = 0; k < K; ++k)
            for (const auto &p : paths.users[static_cast<std::size_t>(k)])
                block.row(k) += p.weight * field_response(g, p.theta, p.phi).transpose();

        for (int n = 0; n < N; ++n)
            ch.H_hat.block(0, static_cast<long>(n) * g.M, K, g.M) = block;
        return ch;
    }

    void dump_channel(std::ostream &os, const ChannelMatrix &ch, std::uint64_t seed)
    {
        os << "# channel dump v1\n";
        os << "K " << ch.K() << "\nM " << ch.M << "\nN " << ch.N << "\nL_p "
           << ch.paths.L_p << "\nseed " << seed << "\n";
        os << "# paths: user path_index re(weight) im(weight) theta phi distance\n";
        os.precision(17);
        for (int k = 0; k < ch.K(); ++k)
        {
            const auto &paths = ch.paths.users[static_cast<std::size_t>(k)];
            for (std::size_t l = 0; l < paths.size(); ++l)
            {
                const auto &p = paths[l];
                os << "path " << k << ' ' << l << ' ' << p.weight.real() << ' '
                   << p.weight.imag() << ' ' << p.theta << ' ' << p.phi << ' '
                   << p.distance << '\n';
            }
        }
        os << "# H_hat: row-major, one user per line, entries re im\n";
        for (int k = 0; k < ch.K(); ++k)
        {
            os << "h " << k;
            for (int c = 0; c < ch.H_hat.cols(); ++c)
                os << ' ' << ch.H_hat(k, c).real() << ' ' << ch.H_hat(k, c).imag();
            os << '\n';
        }
    }

} // namespace mapb
