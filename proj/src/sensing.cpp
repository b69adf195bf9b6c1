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

#include "mapbeam/sensing.hpp"

#include <cmath>
#include <stdexcept>

namespace mapb
{
    namespace
    {
        constexpr double pi = 3.14159265358979323846;

        // Steering vector restricted to a set of committed positions.
        Eigen::VectorXcd steering_at(const GridSpec &g, const std::vector<int> &idx,
                                     double theta, double phi)
        {
            Eigen::VectorXcd full = field_response(g, theta, phi);
            Eigen::VectorXcd a(static_cast<long>(idx.size()));
            for (std::size_t i = 0; i < idx.size(); ++i)
                a(static_cast<long>(i)) = full(idx[i]);
            return a;
        }

        // Linear map from the n² real parameters of an n×n Hermitian matrix
        // (diagonal first, then Re/Im of the upper triangle) to the pattern
        // value a^H X a; one row per grid direction.
        Eigen::MatrixXd hermitian_value_rows(const std::vector<Eigen::VectorXcd> &avecs,
                                             int n)
        {
            const int params = n * n;
            Eigen::MatrixXd Phi(static_cast<long>(avecs.size()), params);
            for (std::size_t r = 0; r < avecs.size(); ++r)
            {
                const auto &a = avecs[r];
                int c = 0;
                for (int i = 0; i < n; ++i)
                    Phi(static_cast<long>(r), c++) = std::norm(a(i));
                for (int i = 0; i < n; ++i)
                {
                    for (int j = i + 1; j < n; ++j)
                    {
                        // a^H X a picks 2·Re(conj(a_i)·X_ij·a_j) from the (i,j)
                        // pair; split into the Re/Im parameters of X_ij.
                        std::complex<double> w = std::conj(a(i)) * a(j);
                        Phi(static_cast<long>(r), c++) = 2.0 * w.real();
                        Phi(static_cast<long>(r), c++) = -2.0 * w.imag();
                    }
                }
            }
            return Phi;
        }
    } // namespace

    void TargetSpec::validate() const
    {
        const std::size_t e = theta.size();
        if (phi.size() != e || psi.size() != e || gamma_th.size() != e)
            throw std::invalid_argument("TargetSpec: per-target arrays differ in length");
        for (double v : psi)
            if (v <= 0.0)
                throw std::invalid_argument("TargetSpec: target ranges must be positive");
        for (double v : gamma_th)
            if (v <= 0.0)
                throw std::invalid_argument("TargetSpec: SNR thresholds must be positive");
        if (omega_av <= 0.0)
            throw std::invalid_argument("TargetSpec: omega_av must be positive");
        if (!(nu > 0.0 && nu < 1.0))
            throw std::invalid_argument("TargetSpec: nu must lie in (0,1)");
    }

    BeamGrid ideal_pattern(int L, int Q, double half_width_el, double half_width_az,
                           const TargetSpec &targets)
    {
        if (L < 1 || Q < 1)
            throw std::invalid_argument("ideal_pattern: L and Q must be >= 1");
        if (half_width_el < 0.0 || half_width_az < 0.0)
            throw std::invalid_argument("ideal_pattern: beam half-widths must be >= 0");

        BeamGrid grid;
        grid.L = L;
        grid.Q = Q;
        grid.half_width_el = half_width_el;
        grid.half_width_az = half_width_az;
        grid.thetas.resize(static_cast<std::size_t>(L));
        grid.phis.resize(static_cast<std::size_t>(Q));
        for (int l = 0; l < L; ++l)
            grid.thetas[static_cast<std::size_t>(l)] =
                L == 1 ? 0.0 : -pi / 2.0 + pi * static_cast<double>(l) / (L - 1);
        for (int q = 0; q < Q; ++q)
            grid.phis[static_cast<std::size_t>(q)] =
                Q == 1 ? 0.0 : -pi / 2.0 + pi * static_cast<double>(q) / (Q - 1);

        grid.ideal.setZero(L, Q);
        for (int l = 0; l < L; ++l)
        {
            for (int q = 0; q < Q; ++q)
            {
                for (int e = 0; e < targets.E(); ++e)
                {
                    if (std::abs(grid.thetas[static_cast<std::size_t>(l)] -
                                 targets.theta[static_cast<std::size_t>(e)]) <= half_width_el &&
                        std::abs(grid.phis[static_cast<std::size_t>(q)] -
                                 targets.phi[static_cast<std::size_t>(e)]) <= half_width_az)
                    {
                        grid.ideal(l, q) = 1.0;
                        break;
                    }
                }
            }
        }
        return grid;
    }

    double beampattern_value(const Eigen::VectorXcd &ahat, const Eigen::MatrixXcd &F_sum,
                             const Eigen::MatrixXcd &Y)
    {
        if (F_sum.rows() != ahat.size() || F_sum.cols() != ahat.size() ||
            Y.rows() != ahat.size() || Y.cols() != ahat.size())
            throw std::invalid_argument("beampattern_value: dimension mismatch");
        return (ahat.adjoint() * (F_sum + Y) * ahat)(0).real();
    }

    double beampattern_mse(double rho0, const GridSpec &g, const BeamGrid &grid, int N,
                           const Eigen::MatrixXcd &F_sum_plus_Y)
    {
        // â = 1_N ⊗ a reduces â^H X â to a^H Ḡ a with Ḡ the M×M sum of the
        // N² blocks of X; evaluating on Ḡ avoids the MN-dimensional products.
        const int M = g.M;
        if (F_sum_plus_Y.rows() != static_cast<long>(M) * N)
            throw std::invalid_argument("beampattern_mse: dimension mismatch");
        Eigen::MatrixXcd Gbar = Eigen::MatrixXcd::Zero(M, M);
        for (int n = 0; n < N; ++n)
            for (int n2 = 0; n2 < N; ++n2)
                Gbar += F_sum_plus_Y.block(static_cast<long>(n) * M,
                                           static_cast<long>(n2) * M, M, M);

        double acc = 0.0;
        for (int l = 0; l < grid.L; ++l)
        {
            for (int q = 0; q < grid.Q; ++q)
            {
                Eigen::VectorXcd a = field_response(g, grid.thetas[static_cast<std::size_t>(l)],
                                                    grid.phis[static_cast<std::size_t>(q)]);
                double v = (a.adjoint() * Gbar * a)(0).real();
                double r = rho0 * grid.ideal(l, q) - v;
                acc += r * r;
            }
        }
        return acc / static_cast<double>(grid.points());
    }

    double beampattern_mse_committed(double rho0, const GridSpec &g, const BeamGrid &grid,
                                     const Eigen::MatrixXd &B,
                                     const std::vector<Eigen::MatrixXcd> &W,
                                     const Eigen::MatrixXcd &R)
    {
        const int N = static_cast<int>(B.cols());
        Eigen::MatrixXcd cov = R;
        for (const auto &w : W)
            cov += w;
        // Realized pattern: â^H B (ΣW+R) B^T â = (B^T â)^H (ΣW+R) (B^T â).
        double acc = 0.0;
        Eigen::MatrixXcd Bc = B.cast<std::complex<double>>();
        for (int l = 0; l < grid.L; ++l)
        {
            for (int q = 0; q < grid.Q; ++q)
            {
                Eigen::VectorXcd ahat = concatenated_field_response(
                    g, N, grid.thetas[static_cast<std::size_t>(l)],
                    grid.phis[static_cast<std::size_t>(q)]);
                Eigen::VectorXcd aeff = Bc.transpose() * ahat;
                double v = (aeff.adjoint() * cov * aeff)(0).real();
                double r = rho0 * grid.ideal(l, q) - v;
                acc += r * r;
            }
        }
        return acc / static_cast<double>(grid.points());
    }

    double chance_threshold(const TargetSpec &t, int e, double L0)
    {
        t.validate();
        if (e < 0 || e >= t.E())
            throw std::invalid_argument("chance_threshold: target index out of range");
        const double psi = t.psi[static_cast<std::size_t>(e)];
        const double gth = t.gamma_th[static_cast<std::size_t>(e)];
        const double num = 16.0 * pi * psi * psi * psi * psi * t.sigma_e2 * gth;
        return -num / (std::log(1.0 - t.nu) * t.omega_av * L0 * L0);
    }

    double sensing_snr(double omega_sample, double L0, double psi_e, double sigma_e2,
                       double beampattern_value_at_target)
    {
        const double den = 16.0 * pi * psi_e * psi_e * psi_e * psi_e * sigma_e2;
        return omega_sample * L0 * L0 * beampattern_value_at_target / den;
    }

    double sample_rcs(double omega_av, Rng &rng)
    {
        if (omega_av <= 0.0)
            throw std::invalid_argument("sample_rcs: omega_av must be positive");
        return rng.exponential(omega_av);
    }

    double calibrate_delta_d(const GridSpec &g, const BeamGrid &grid,
                             const std::vector<int> &placement_indices, double rho_ref,
                             double multiplier)
    {
        if (rho_ref <= 0.0 || multiplier <= 0.0)
            throw std::invalid_argument("calibrate_delta_d: rho_ref and multiplier must be positive");

        const int n = static_cast<int>(placement_indices.size());
        const int LQ = grid.points();

        std::vector<Eigen::VectorXcd> avecs;
        avecs.reserve(static_cast<std::size_t>(LQ));
        std::vector<int> support; // rows where the ideal pattern is 1
        Eigen::VectorXd target(LQ);
        int r = 0;
        for (int l = 0; l < grid.L; ++l)
        {
            for (int q = 0; q < grid.Q; ++q, ++r)
            {
                avecs.push_back(steering_at(g, placement_indices,
                                            grid.thetas[static_cast<std::size_t>(l)],
                                            grid.phis[static_cast<std::size_t>(q)]));
                target(r) = rho_ref * grid.ideal(l, q);
                if (grid.ideal(l, q) > 0.5)
                    support.push_back(r);
            }
        }

        Eigen::MatrixXd Phi = hermitian_value_rows(avecs, n);

        // Equality-pinned least squares: minimize ‖Phi·x − target‖² subject to
        // the fit reaching rho_ref on the ideal-pattern support. Eliminate the
        // pin through the nullspace of the support rows.
        if (support.empty())
        {
            Eigen::VectorXd x = Phi.colPivHouseholderQr().solve(target);
            double mse = (Phi * x - target).squaredNorm() / LQ;
            return multiplier * mse;
        }

        Eigen::MatrixXd A(static_cast<long>(support.size()), Phi.cols());
        Eigen::VectorXd beq(static_cast<long>(support.size()));
        for (std::size_t i = 0; i < support.size(); ++i)
        {
            A.row(static_cast<long>(i)) = Phi.row(support[i]);
            beq(static_cast<long>(i)) = rho_ref;
        }
        // Particular solution and nullspace basis of the pin.
        Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeFullV);
        Eigen::VectorXd x0 = svd.solve(beq);
        const auto &sing = svd.singularValues();
        int rank = 0;
        for (long i = 0; i < sing.size(); ++i)
            if (sing(i) > 1e-10 * sing(0))
                ++rank;
        Eigen::MatrixXd Z = svd.matrixV().rightCols(Phi.cols() - rank);

        Eigen::VectorXd resid0 = Phi * x0 - target;
        Eigen::MatrixXd PhiZ = Phi * Z;
        Eigen::VectorXd y = PhiZ.colPivHouseholderQr().solve(-resid0);
        double mse = (resid0 + PhiZ * y).squaredNorm() / LQ;
        return multiplier * mse;
    }

} // namespace mapb
