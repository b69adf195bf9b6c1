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

#include "mapbeam/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace mapb
{

    namespace
    {

        // RMS channel entry over the shared per-antenna block; placement
        // independent, so the position subproblem keeps one normalization for
        // the whole alternating run.
        double block_channel_rms(const ChannelMatrix &chan)
        {
            const auto block = chan.H_hat.leftCols(chan.M);
            const double sz = static_cast<double>(block.size() > 0 ? block.size() : 1);
            const double rms = std::sqrt(block.squaredNorm() / sz);
            return rms > 0.0 ? rms : 1.0;
        }

        // Placement-independent analogue of p1_power_scale built from the raw
        // scenario data (same heuristic: beampattern floors met near thr/N,
        // SINR targets near γσ²/s_h²).
        double p2_power_scale(const ChannelMatrix &chan, const TargetSpec &targets, double s_h)
        {
            double p_sense = 0.0;
            for (int e = 0; e < targets.E(); e++)
                p_sense = std::max(p_sense, chance_threshold(targets, e, chan.paths.L0) /
                                                static_cast<double>(chan.N > 0 ? chan.N : 1));
            double p_comm = 0.0;
            for (std::size_t k = 0; k < chan.gamma_th.size(); k++)
                p_comm = std::max(p_comm, chan.gamma_th[k] * chan.sigma2[k] / (s_h * s_h));
            const double p0 = std::max(p_sense, p_comm);
            return p0 > 0.0 ? p0 : 1.0;
        }

        // Euclidean projection onto the probability simplex {x >= 0, Σx = 1}
        // (sort-and-threshold construction).
        Eigen::VectorXd project_simplex(const Eigen::VectorXd &v)
        {
            std::vector<double> u(v.data(), v.data() + v.size());
            std::sort(u.begin(), u.end(), std::greater<double>());
            double cum = 0.0, theta = u.empty() ? 0.0 : u.front() - 1.0;
            for (std::size_t i = 0; i < u.size(); i++)
            {
                cum += u[i];
                const double t = (cum - 1.0) / static_cast<double>(i + 1);
                if (u[i] - t > 0.0)
                    theta = t;
            }
            Eigen::VectorXd out = (v.array() - theta).max(0.0);
            const double s = out.sum(); // 1 up to roundoff; make it exact
            if (s > 0.0)
                out /= s;
            return out;
        }

        bool indices_feasible(const std::vector<int> &idx, const Eigen::MatrixXd &D,
                              double d_min)
        {
            for (std::size_t i = 0; i < idx.size(); i++)
                for (std::size_t j = i + 1; j < idx.size(); j++)
                {
                    if (idx[i] == idx[j])
                        return false;
                    if (D(idx[i], idx[j]) < d_min)
                        return false;
                }
            return true;
        }

        // Visits all k-subsets of {0..n-1} in lexicographic order.
        template <typename F> void for_each_subset(int n, int k, F &&fn)
        {
            if (k < 1 || k > n)
                return;
            std::vector<int> c(static_cast<std::size_t>(k));
            for (int i = 0; i < k; i++)
                c[static_cast<std::size_t>(i)] = i;
            while (true)
            {
                fn(c);
                int i = k - 1;
                while (i >= 0 && c[static_cast<std::size_t>(i)] == n - k + i)
                    i--;
                if (i < 0)
                    break;
                c[static_cast<std::size_t>(i)]++;
                for (int j = i + 1; j < k; j++)
                    c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
            }
        }

        Eigen::MatrixXd one_hot_rows(const std::vector<int> &idx, int M)
        {
            Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(idx.size()), M);
            for (std::size_t n = 0; n < idx.size(); n++)
                b(static_cast<Eigen::Index>(n), idx[n]) = 1.0;
            return b;
        }

    } // namespace

    P2Layout p2_declare_variables(conic::Program &p, int M, int N, int K)
    {
        if (M < 1 || N < 1 || K < 0)
            throw std::invalid_argument("p2_declare_variables: bad dimensions");

        P2Layout lay;
        lay.M = M;
        lay.N = N;
        lay.K = K;
        lay.MN = M * N;

        // None of the lifted blocks carries its own semidefinite cone: the
        // constraint set couples them only through the Schur LMIs below, and
        // adding redundant cones would multiply the projection cost.
        for (int k = 0; k < K; k++)
            lay.Fk.push_back(p.add_hermitian_block("F" + std::to_string(k), lay.MN, false));
        lay.Y = p.add_hermitian_block("Y", lay.MN, false);
        for (int k = 0; k < K; k++)
            lay.Sk.push_back(p.add_hermitian_block("S" + std::to_string(k), lay.MN, false));
        for (int k = 0; k < K; k++)
            lay.Tk.push_back(p.add_hermitian_block("T" + std::to_string(k), lay.MN, false));
        lay.U = p.add_hermitian_block("U", lay.MN, false);
        lay.V = p.add_hermitian_block("V", lay.MN, false);
        lay.Gsum = p.add_hermitian_block("Gsum", M, false);

        lay.b0 = p.num_scalars();
        for (int n = 0; n < N; n++)
            for (int i = 0; i < M; i++)
                p.add_scalar("b" + std::to_string(n) + "_" + std::to_string(i));

        for (int n = 0; n < N; n++)
            for (int m = n + 1; m < N; m++)
                lay.pairs.emplace_back(n, m);

        lay.phi0 = p.num_scalars();
        for (int pr = 0; pr < lay.num_pairs(); pr++)
            for (int i = 0; i < M; i++)
                for (int j = 0; j < M; j++)
                    p.add_scalar("phi" + std::to_string(pr) + "_" + std::to_string(i) + "_" +
                                 std::to_string(j));
        return lay;
    }

    void glover_constraints(conic::Program &p, const P2Layout &lay, const Eigen::MatrixXd &D,
                            double d_min)
    {
        const int M = lay.M;
        if (D.rows() != M || D.cols() != M)
            throw std::invalid_argument("glover_constraints: distance matrix size mismatch");

        for (int pr = 0; pr < lay.num_pairs(); pr++)
        {
            const auto [n, np] = lay.pairs[static_cast<std::size_t>(pr)];

            // Pair separation through the linearized products:
            // d_min − Σ_{i,j} D_ij·φ <= 0.
            conic::LinExpr sep;
            sep.constant = d_min;
            for (int i = 0; i < M; i++)
                for (int j = 0; j < M; j++)
                    sep.add(lay.phi_var(pr, i, j), -D(i, j));
            p.add_ineq(sep);

            for (int i = 0; i < M; i++)
                for (int j = 0; j < M; j++)
                {
                    const int ph = lay.phi_var(pr, i, j);

                    // φ <= b_n[i] and φ <= b_n'[j].
                    conic::LinExpr e1;
                    e1.add(ph, 1.0).add(lay.b_var(n, i), -1.0);
                    p.add_ineq(e1);
                    conic::LinExpr e2;
                    e2.add(ph, 1.0).add(lay.b_var(np, j), -1.0);
                    p.add_ineq(e2);

                    // φ >= b_n[i] + b_n'[j] − 1.
                    conic::LinExpr e3;
                    e3.add(lay.b_var(n, i), 1.0).add(lay.b_var(np, j), 1.0).add(ph, -1.0);
                    e3.constant = -1.0;
                    p.add_ineq(e3);

                    // 0 <= φ <= 1.
                    conic::LinExpr lo;
                    lo.add(ph, -1.0);
                    p.add_ineq(lo);
                    conic::LinExpr hi;
                    hi.add(ph, 1.0);
                    hi.constant = -1.0;
                    p.add_ineq(hi);
                }
        }
    }

    void schur_lmi_blocks(conic::Program &p, const P2Layout &lay,
                          const std::vector<Eigen::MatrixXcd> &W_norm,
                          const Eigen::MatrixXcd &R_norm)
    {
        const int M = lay.M;
        const int N = lay.N;
        const int MN = lay.MN;
        if (static_cast<int>(W_norm.size()) != lay.K)
            throw std::invalid_argument("schur_lmi_blocks: need one W per user");

        // One LMI of the pattern
        //   [[S, X, B·C], [X^H, T, B], [C^H·B^T, B^T, I_N]] ⪰ 0
        // per lifted covariance: (S_k, F_k, W_k) for each user and (U, Y, R)
        // for sensing. By the Schur complement on the identity block this
        // bounds S ⪰ B·C·C^H·B^T and T ⪰ B·B^T while pinching X toward
        // B·C·B^T as the slack traces shrink.
        auto add_one = [&](int Sblk, int Tblk, int Xblk, const Eigen::MatrixXcd &C) {
            if (C.rows() != N || C.cols() != N)
                throw std::invalid_argument("schur_lmi_blocks: covariance must be N×N");
            const int l = p.add_lmi(2 * MN + N);

            // Diagonal blocks S (offset 0) and T (offset MN).
            for (int blk = 0; blk < 2; blk++)
            {
                const int var_blk = blk == 0 ? Sblk : Tblk;
                const int off = blk * MN;
                for (int i = 0; i < MN; i++)
                    p.lmi_entry(l, off + i, off + i, p.herm_diag(var_blk, i), 1.0);
                for (int i = 0; i < MN; i++)
                    for (int j = i + 1; j < MN; j++)
                    {
                        const auto [re, im] = p.herm_offdiag(var_blk, i, j);
                        p.lmi_entry(l, off + i, off + j, re, 1.0);
                        p.lmi_entry(l, off + i, off + j, im, {0.0, 1.0});
                    }
            }

            // Off-diagonal block (0,1): the lifted covariance X, every entry.
            for (int i = 0; i < MN; i++)
                for (int j = 0; j < MN; j++)
                {
                    const int r = i, c = MN + j;
                    if (i < j)
                    {
                        const auto [re, im] = p.herm_offdiag(Xblk, i, j);
                        p.lmi_entry(l, r, c, re, 1.0);
                        p.lmi_entry(l, r, c, im, {0.0, 1.0});
                    }
                    else if (i == j)
                        p.lmi_entry(l, r, c, p.herm_diag(Xblk, i), 1.0);
                    else
                    {
                        const auto [re, im] = p.herm_offdiag(Xblk, j, i);
                        p.lmi_entry(l, r, c, re, 1.0);
                        p.lmi_entry(l, r, c, im, {0.0, -1.0});
                    }
                }

            // Block (0,2): B·C with (B·C)(nM+m, c) = b_n[m]·C(n,c).
            for (int n = 0; n < N; n++)
                for (int m = 0; m < M; m++)
                    for (int c = 0; c < N; c++)
                        p.lmi_entry(l, n * M + m, 2 * MN + c, lay.b_var(n, m), C(n, c));

            // Block (1,2): B itself, nonzero only within each antenna's rows.
            for (int n = 0; n < N; n++)
                for (int m = 0; m < M; m++)
                    p.lmi_entry(l, MN + n * M + m, 2 * MN + n, lay.b_var(n, m), 1.0);

            // Block (2,2): identity.
            for (int c = 0; c < N; c++)
                p.lmi_const(l, 2 * MN + c, 2 * MN + c, 1.0);
        };

        for (int k = 0; k < lay.K; k++)
            add_one(lay.Sk[static_cast<std::size_t>(k)], lay.Tk[static_cast<std::size_t>(k)],
                    lay.Fk[static_cast<std::size_t>(k)], W_norm[static_cast<std::size_t>(k)]);
        add_one(lay.U, lay.V, lay.Y, R_norm);
    }

    std::array<conic::LinExpr, 4> taylor_penalty_terms(const conic::Program &p,
                                                       const P2Layout &lay,
                                                       const Eigen::MatrixXd &b_t,
                                                       const Eigen::MatrixXd &phi_t,
                                                       const std::vector<Eigen::MatrixXcd> &W_norm,
                                                       const Eigen::MatrixXcd &R_norm)
    {
        const int M = lay.M;
        const int N = lay.N;
        if (b_t.rows() != N || b_t.cols() != M)
            throw std::invalid_argument("taylor_penalty_terms: linearization point must be N×M");
        if (phi_t.rows() != lay.num_pairs() || (lay.num_pairs() > 0 && phi_t.cols() != M * M))
            throw std::invalid_argument("taylor_penalty_terms: product point size mismatch");
        if (static_cast<int>(W_norm.size()) != lay.K)
            throw std::invalid_argument("taylor_penalty_terms: need one W per user");

        std::array<conic::LinExpr, 4> pen;

        // The slack-trace gaps tr S_k − g_{1,k}(B) and tr U − g_2(B), with the
        // quadratic traces minorized at B^(t). Because the per-antenna blocks
        // of B occupy disjoint rows, B^T·B' is diagonal for any two selection
        // matrices, so with G = C·C^H
        //   tr(B·G·B^T) = Σ_n G_nn·‖b_n‖², and the tangent at B^(t) is
        //   g(B) = Σ_n G_nn·(2·b_n^(t)·b_n − ‖b_n^(t)‖²) ≤ tr(B·G·B^T).
        auto add_gap = [&](conic::LinExpr &e, const std::vector<int> &slacks,
                           const std::vector<const Eigen::MatrixXcd *> &covs) {
            for (std::size_t s = 0; s < slacks.size(); s++)
            {
                for (int i = 0; i < lay.MN; i++)
                    e.add(p.herm_diag(slacks[s], i), 1.0);
                const Eigen::MatrixXcd G = (*covs[s]) * covs[s]->adjoint();
                for (int n = 0; n < N; n++)
                {
                    const double gnn = G(n, n).real();
                    for (int i = 0; i < M; i++)
                        e.add(lay.b_var(n, i), -2.0 * gnn * b_t(n, i));
                    e.constant += gnn * b_t.row(n).squaredNorm();
                }
            }
        };

        {
            std::vector<const Eigen::MatrixXcd *> covs;
            for (const auto &Wk : W_norm)
                covs.push_back(&Wk);
            add_gap(pen[0], lay.Sk, covs);
        }
        add_gap(pen[1], {lay.U}, {&R_norm});

        // Majorized binariness: x(1−x) ≤ x − x^t(2x − x^t) for x, x^t ∈ [0,1],
        // with equality at x = x^t; zero exactly at a binary x = x^t.
        for (int n = 0; n < N; n++)
            for (int i = 0; i < M; i++)
            {
                pen[2].add(lay.b_var(n, i), 1.0 - 2.0 * b_t(n, i));
                pen[2].constant += b_t(n, i) * b_t(n, i);
            }
        for (int pr = 0; pr < lay.num_pairs(); pr++)
            for (int i = 0; i < M; i++)
                for (int j = 0; j < M; j++)
                {
                    const double ph = phi_t(pr, i * M + j);
                    pen[3].add(lay.phi_var(pr, i, j), 1.0 - 2.0 * ph);
                    pen[3].constant += ph * ph;
                }

        return pen;
    }

    double evaluate_expr(const conic::LinExpr &e, const Eigen::VectorXd &x)
    {
        double v = e.constant;
        for (const auto &[var, coef] : e.terms)
            v += coef * x(var);
        return v;
    }

    conic::Program assemble_p2(const GridSpec &grid, const ChannelMatrix &chan,
                               const TargetSpec &targets, const BeamGrid &bgrid,
                               const Eigen::MatrixXd &D, double d_min,
                               const Eigen::MatrixXd &b_t, const Eigen::MatrixXd &phi_t,
                               const std::vector<Eigen::MatrixXcd> &W,
                               const Eigen::MatrixXcd &R, double rho0,
                               const std::array<double, 4> &tau, double power_scale,
                               double channel_scale, P2Layout &lay)
    {
        const int M = grid.M;
        const int N = chan.N;
        const int K = chan.K();
        const int MN = M * N;
        if (chan.M != M)
            throw std::invalid_argument("assemble_p2: channel/grid size mismatch");
        if (static_cast<int>(W.size()) != K)
            throw std::invalid_argument("assemble_p2: need one W per user");
        if (R.rows() != N || R.cols() != N)
            throw std::invalid_argument("assemble_p2: R must be N×N");
        if (!(power_scale > 0.0) || !(channel_scale > 0.0))
            throw std::invalid_argument("assemble_p2: scales must be positive");
        if (!(bgrid.delta_d > 0.0))
            throw std::invalid_argument("assemble_p2: beampattern MSE cap must be positive");
        for (double t : tau)
            if (!(t >= 0.0))
                throw std::invalid_argument("assemble_p2: penalty weights must be nonnegative");
        targets.validate();

        conic::Program p;
        lay = p2_declare_variables(p, M, N, K);

        std::vector<Eigen::MatrixXcd> W_norm;
        for (const auto &Wk : W)
        {
            if (Wk.rows() != N || Wk.cols() != N)
                throw std::invalid_argument("assemble_p2: W_k must be N×N");
            W_norm.push_back(Wk / power_scale);
        }
        const Eigen::MatrixXcd R_norm = R / power_scale;

        // Selection rows are stochastic: Σ_i b_n[i] = 1, 0 <= b <= 1.
        for (int n = 0; n < N; n++)
        {
            conic::LinExpr e;
            e.constant = -1.0;
            for (int i = 0; i < M; i++)
                e.add(lay.b_var(n, i), 1.0);
            p.add_eq(e);
        }
        for (int n = 0; n < N; n++)
            for (int i = 0; i < M; i++)
            {
                conic::LinExpr lo;
                lo.add(lay.b_var(n, i), -1.0);
                p.add_ineq(lo);
                conic::LinExpr hi;
                hi.add(lay.b_var(n, i), 1.0);
                hi.constant = -1.0;
                p.add_ineq(hi);
            }

        glover_constraints(p, lay, D, d_min);

        // The beampattern constraints depend on Σ_k F_k + Y only through the
        // M×M sum of its antenna blocks, because the per-antenna steering
        // blocks of the concatenated FRV are identical:
        //   â^H·X·â = a^H·(Σ_{n,n'} X_{(n,n')})·a.
        // Gsum carries that reduction; M² real equalities tie it down.
        {
            std::vector<int> lifted = lay.Fk;
            lifted.push_back(lay.Y);
            for (int i = 0; i < M; i++)
                for (int j = i; j < M; j++)
                {
                    if (i == j)
                    {
                        conic::LinExpr e;
                        e.add(p.herm_diag(lay.Gsum, i), 1.0);
                        for (int blk : lifted)
                        {
                            for (int n = 0; n < N; n++)
                                e.add(p.herm_diag(blk, n * M + i), -1.0);
                            for (int n = 0; n < N; n++)
                                for (int np = n + 1; np < N; np++)
                                {
                                    // (n,n') and (n',n) contribute conjugate
                                    // entries; imaginary parts cancel.
                                    const auto [re, im] =
                                        p.herm_offdiag(blk, n * M + i, np * M + i);
                                    (void)im;
                                    e.add(re, -2.0);
                                }
                        }
                        p.add_eq(e);
                    }
                    else
                    {
                        conic::LinExpr er, ei;
                        const auto [gre, gim] = p.herm_offdiag(lay.Gsum, i, j);
                        er.add(gre, 1.0);
                        ei.add(gim, 1.0);
                        for (int blk : lifted)
                            for (int n = 0; n < N; n++)
                                for (int np = 0; np < N; np++)
                                {
                                    const int r = n * M + i, c = np * M + j;
                                    if (r < c)
                                    {
                                        const auto [re, im] = p.herm_offdiag(blk, r, c);
                                        er.add(re, -1.0);
                                        ei.add(im, -1.0);
                                    }
                                    else if (r == c)
                                        er.add(p.herm_diag(blk, r), -1.0);
                                    else
                                    {
                                        const auto [re, im] = p.herm_offdiag(blk, c, r);
                                        er.add(re, -1.0);
                                        ei.add(im, 1.0);
                                    }
                                }
                        p.add_eq(er);
                        p.add_eq(ei);
                    }
                }
        }

        // SINR floors over the lifted covariances with the sensing beams
        // contributing interference at the users, evaluated through the
        // concatenated (tiled) user channel: σ_k² + Σ_{j≠k} ĥ^H·F_j·ĥ +
        // ĥ^H·Y·ĥ − (1/γ_k)·ĥ^H·F_k·ĥ <= 0. As in the beamforming stage, each
        // row is divided by the noise power so its constant term is one and
        // the solver's norm-wise feasibility tolerance bounds the violation
        // relative to the noise floor rather than the sensing powers.
        for (int k = 0; k < K; k++)
        {
            const double sig2 = chan.sigma2[static_cast<std::size_t>(k)];
            if (!(sig2 > 0.0))
                throw std::invalid_argument("assemble_p2: noise powers must be positive");
            Eigen::VectorXcd hfull(MN);
            const Eigen::RowVectorXcd blockk = chan.user_block(k);
            for (int n = 0; n < N; n++)
                hfull.segment(n * M, M) = blockk.transpose();
            // ĥ̄ = ĥ·sqrt(power_scale)/σ; the channel normalization cancels.
            hfull *= std::sqrt(power_scale / sig2);

            conic::LinExpr e;
            e.constant = 1.0;
            for (int j = 0; j < K; j++)
                p.add_quadform_terms(
                    e, lay.Fk[static_cast<std::size_t>(j)], hfull,
                    j == k ? -1.0 / chan.gamma_th[static_cast<std::size_t>(k)] : 1.0);
            p.add_quadform_terms(e, lay.Y, hfull, 1.0);
            p.add_ineq(e);
        }

        // Beampattern floors at the target angles.
        for (int e_i = 0; e_i < targets.E(); e_i++)
        {
            const Eigen::VectorXcd a =
                field_response(grid, targets.theta[static_cast<std::size_t>(e_i)],
                               targets.phi[static_cast<std::size_t>(e_i)]);
            conic::LinExpr e;
            e.constant = chance_threshold(targets, e_i, chan.paths.L0) / power_scale;
            p.add_quadform_terms(e, lay.Gsum, a, -1.0);
            p.add_ineq(e);
        }

        // Matching-error cap. The residual is affine in the Gsum parameters
        // with a fixed offset (rho0 is held at its beamforming-stage value),
        // so the QL-point norm is compressed by a QR factorization of the
        // coefficient matrix augmented with the constant column.
        {
            const int g0 = p.block_offset(lay.Gsum);
            const int gnv = M * M;
            const int QL = bgrid.points();
            Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(QL, gnv + 1);
            for (int l = 0; l < bgrid.L; l++)
                for (int q = 0; q < bgrid.Q; q++)
                {
                    const int i = l * bgrid.Q + q;
                    const Eigen::VectorXcd a =
                        field_response(grid, bgrid.thetas[static_cast<std::size_t>(l)],
                                       bgrid.phis[static_cast<std::size_t>(q)]);
                    conic::LinExpr e;
                    e.constant = (rho0 / power_scale) * bgrid.ideal(l, q);
                    p.add_quadform_terms(e, lay.Gsum, a, -1.0);
                    for (const auto &[v, c] : e.terms)
                        coef(i, v - g0) += c;
                    coef(i, gnv) = e.constant;
                }

            Eigen::HouseholderQR<Eigen::MatrixXd> qr(coef);
            const Eigen::MatrixXd Rfac = qr.matrixQR()
                                             .topRows(std::min<Eigen::Index>(QL, gnv + 1))
                                             .triangularView<Eigen::Upper>();

            std::vector<conic::LinExpr> rows;
            for (int r = 0; r < Rfac.rows(); r++)
            {
                conic::LinExpr e;
                for (int c = 0; c < gnv; c++)
                    e.add(g0 + c, Rfac(r, c));
                e.constant = Rfac(r, gnv);
                if (!e.terms.empty() || e.constant != 0.0)
                    rows.push_back(std::move(e));
            }
            conic::LinExpr t;
            t.constant = std::sqrt(static_cast<double>(QL) * bgrid.delta_d) / power_scale;
            p.add_soc(std::move(rows), std::move(t));
        }

        schur_lmi_blocks(p, lay, W_norm, R_norm);

        // Objective: the (constant) transmit power of the fixed beams plus the
        // weighted penalties.
        double pw = R.trace().real();
        for (const auto &Wk : W)
            pw += Wk.trace().real();
        p.obj_constant = pw / power_scale;

        const auto pen = taylor_penalty_terms(p, lay, b_t, phi_t, W_norm, R_norm);
        for (int i = 0; i < 4; i++)
        {
            p.obj_constant += tau[static_cast<std::size_t>(i)] *
                              pen[static_cast<std::size_t>(i)].constant;
            for (const auto &[v, c] : pen[static_cast<std::size_t>(i)].terms)
                p.obj_term(v, tau[static_cast<std::size_t>(i)] * c);
        }

        p.validate();
        return p;
    }

    P2Result solve_p2(const GridSpec &grid, const ChannelMatrix &chan, const TargetSpec &targets,
                      const BeamGrid &bgrid, const Eigen::MatrixXd &D, double d_min,
                      const Eigen::MatrixXd &b_t, const Eigen::MatrixXd &phi_t,
                      const std::vector<Eigen::MatrixXcd> &W, const Eigen::MatrixXcd &R,
                      double rho0, double power_scale, double channel_scale,
                      const P2Controls &ctl)
    {
        P2Layout lay;
        const conic::Program p = assemble_p2(grid, chan, targets, bgrid, D, d_min, b_t, phi_t,
                                             W, R, rho0, ctl.tau, power_scale, channel_scale,
                                             lay);

        conic::SolverOptions sopts;
        sopts.eps = ctl.eps;
        sopts.max_iters = ctl.max_iters;
        sopts.verbose = ctl.verbose;
        sopts.warm_start = ctl.warm_start;
        conic::Solution sol = conic::solve(p, sopts);

        P2Result res;
        res.status = sol.status;
        res.iterations = sol.iterations;
        res.raw = sol;

        if (sol.x.size() == p.num_scalars())
        {
            res.b.resize(lay.N, lay.M);
            for (int n = 0; n < lay.N; n++)
                for (int i = 0; i < lay.M; i++)
                    res.b(n, i) = sol.x(lay.b_var(n, i));
            res.phi.resize(lay.num_pairs(), lay.M * lay.M);
            for (int pr = 0; pr < lay.num_pairs(); pr++)
                for (int i = 0; i < lay.M; i++)
                    for (int j = 0; j < lay.M; j++)
                        res.phi(pr, i * lay.M + j) = sol.x(lay.phi_var(pr, i, j));

            for (int n = 0; n < lay.N; n++)
                for (int i = 0; i < lay.M; i++)
                {
                    const double b = std::clamp(res.b(n, i), 0.0, 1.0);
                    res.binary_violation += b * (1.0 - b);
                }

            // Penalty contributions re-expressed in watts so the trace reads
            // in the same units as the power objective.
            std::vector<Eigen::MatrixXcd> W_norm;
            for (const auto &Wk : W)
                W_norm.push_back(Wk / power_scale);
            const auto pen =
                taylor_penalty_terms(p, lay, b_t, phi_t, W_norm, R / power_scale);
            for (int i = 0; i < 4; i++)
                res.penalty_values[static_cast<std::size_t>(i)] =
                    ctl.tau[static_cast<std::size_t>(i)] *
                    evaluate_expr(pen[static_cast<std::size_t>(i)], sol.x) * power_scale;
        }
        return res;
    }

    Eigen::MatrixXd phi_from_selection(const Eigen::MatrixXd &b,
                                       const std::vector<std::pair<int, int>> &pairs)
    {
        const int M = static_cast<int>(b.cols());
        Eigen::MatrixXd phi(static_cast<Eigen::Index>(pairs.size()), M * M);
        for (std::size_t pr = 0; pr < pairs.size(); pr++)
        {
            const auto [n, np] = pairs[pr];
            for (int i = 0; i < M; i++)
                for (int j = 0; j < M; j++)
                    phi(static_cast<Eigen::Index>(pr), i * M + j) = b(n, i) * b(np, j);
        }
        return phi;
    }

    std::vector<int> greedy_spread_placement(const GridSpec &grid, const Eigen::MatrixXd &D,
                                             int N, double d_min)
    {
        if (N < 1 || N > grid.M)
            throw std::invalid_argument("greedy_spread_placement: need 1 <= N <= M");

        // Farthest-point greedy from the origin corner: each antenna lands on
        // the position maximizing its minimum distance to those already
        // placed (ties to the lowest index).
        std::vector<int> idx{0};
        while (static_cast<int>(idx.size()) < N)
        {
            int best = -1;
            double best_d = -1.0;
            for (int m = 0; m < grid.M; m++)
            {
                if (std::find(idx.begin(), idx.end(), m) != idx.end())
                    continue;
                double dm = std::numeric_limits<double>::infinity();
                for (int o : idx)
                    dm = std::min(dm, D(m, o));
                if (dm > best_d)
                {
                    best_d = dm;
                    best = m;
                }
            }
            if (best < 0 || best_d < d_min)
                throw std::runtime_error(
                    "greedy_spread_placement: no position satisfies the minimum separation");
            idx.push_back(best);
        }
        std::sort(idx.begin(), idx.end());
        return idx;
    }

    std::vector<int> random_feasible_placement(const GridSpec &grid, const Eigen::MatrixXd &D,
                                               int N, double d_min, Rng &rng, int max_attempts)
    {
        if (N < 1 || N > grid.M)
            return {};
        for (int attempt = 0; attempt < max_attempts; attempt++)
        {
            std::vector<int> idx;
            bool dead = false;
            for (int n = 0; n < N && !dead; n++)
            {
                std::vector<int> cands;
                for (int m = 0; m < grid.M; m++)
                {
                    bool ok = std::find(idx.begin(), idx.end(), m) == idx.end();
                    for (int o : idx)
                        ok = ok && D(m, o) >= d_min;
                    if (ok)
                        cands.push_back(m);
                }
                if (cands.empty())
                    dead = true;
                else
                    idx.push_back(cands[rng.uniform_index(cands.size())]);
            }
            if (!dead)
            {
                std::sort(idx.begin(), idx.end());
                return idx;
            }
        }
        return {};
    }

    std::vector<std::vector<int>> rounding_candidates(const Eigen::MatrixXd &b_relaxed,
                                                      const Eigen::MatrixXd &D, double d_min,
                                                      int max_candidates)
    {
        const int N = static_cast<int>(b_relaxed.rows());
        const int M = static_cast<int>(b_relaxed.cols());
        if (N < 1 || M < 1 || max_candidates < 1)
            return {};

        // Positions of each antenna ordered by decreasing relaxed mass (ties
        // to the lower index), shared by the base rounding, the repairs and
        // the alternative candidates.
        std::vector<std::vector<int>> order(static_cast<std::size_t>(N));
        for (int n = 0; n < N; n++)
        {
            auto &ord = order[static_cast<std::size_t>(n)];
            ord.resize(static_cast<std::size_t>(M));
            for (int m = 0; m < M; m++)
                ord[static_cast<std::size_t>(m)] = m;
            std::stable_sort(ord.begin(), ord.end(), [&](int a, int b) {
                return b_relaxed(n, a) > b_relaxed(n, b);
            });
        }

        auto violates = [&](int a, int b) { return a == b || D(a, b) < d_min; };

        // Greedy repair: the lower-confidence antenna of the first violating
        // pair moves to its best position that clears every other antenna.
        // Each successful move removes at least one violating pair, so the
        // loop terminates.
        auto repair = [&](std::vector<int> idx, int frozen) -> std::pair<bool, std::vector<int>> {
            const int max_moves = N * N + 4;
            for (int guard = 0; guard < max_moves; guard++)
            {
                int vn = -1, vm = -1;
                for (int n = 0; n < N && vn < 0; n++)
                    for (int m = n + 1; m < N && vn < 0; m++)
                        if (violates(idx[static_cast<std::size_t>(n)],
                                     idx[static_cast<std::size_t>(m)]))
                        {
                            vn = n;
                            vm = m;
                        }
                if (vn < 0)
                    return {true, idx};

                int mover;
                if (vn == frozen)
                    mover = vm;
                else if (vm == frozen)
                    mover = vn;
                else
                    mover = b_relaxed(vn, idx[static_cast<std::size_t>(vn)]) <
                                    b_relaxed(vm, idx[static_cast<std::size_t>(vm)])
                                ? vn
                                : vm;

                int dst = -1;
                for (int cand : order[static_cast<std::size_t>(mover)])
                {
                    bool ok = true;
                    for (int o = 0; o < N && ok; o++)
                        if (o != mover)
                            ok = !violates(cand, idx[static_cast<std::size_t>(o)]);
                    if (ok)
                    {
                        dst = cand;
                        break;
                    }
                }
                if (dst < 0)
                    return {false, idx};
                idx[static_cast<std::size_t>(mover)] = dst;
            }
            return {false, idx};
        };

        std::vector<std::vector<int>> out;
        std::set<std::vector<int>> seen;
        auto push = [&](std::vector<int> idx) {
            std::sort(idx.begin(), idx.end());
            if (seen.insert(idx).second)
                out.push_back(std::move(idx));
        };

        std::vector<int> base(static_cast<std::size_t>(N));
        for (int n = 0; n < N; n++)
            base[static_cast<std::size_t>(n)] = order[static_cast<std::size_t>(n)][0];

        if (auto [ok, fixed] = repair(base, -1); ok)
            push(std::move(fixed));

        // Alternatives: demote the least confident antenna to its next-best
        // positions and repair around that choice.
        int least = 0;
        for (int n = 1; n < N; n++)
            if (b_relaxed(n, base[static_cast<std::size_t>(n)]) <
                b_relaxed(least, base[static_cast<std::size_t>(least)]))
                least = n;
        for (std::size_t alt = 1;
             alt < order[static_cast<std::size_t>(least)].size() &&
             static_cast<int>(out.size()) < max_candidates;
             alt++)
        {
            std::vector<int> idx = base;
            idx[static_cast<std::size_t>(least)] = order[static_cast<std::size_t>(least)][alt];
            if (auto [ok, fixed] = repair(std::move(idx), least); ok)
                push(std::move(fixed));
        }

        if (static_cast<int>(out.size()) > max_candidates)
            out.resize(static_cast<std::size_t>(max_candidates));
        return out;
    }

    std::vector<int> fixed_array_placement(const GridSpec &grid, int N)
    {
        if (N < 1 || N > grid.M)
            throw std::invalid_argument("fixed_array_placement: need 1 <= N <= M");

        // Closest-to-square factorization N = rows × cols with rows <= cols.
        int rows = static_cast<int>(std::floor(std::sqrt(static_cast<double>(N))));
        while (rows > 1 && N % rows != 0)
            rows--;
        const int cols = N / rows;

        // Half-wavelength pitch snapped to the lattice, shrunk if the array
        // would overflow the region. The array is anchored at the region
        // origin so that the absolute positions are identical on every grid
        // that contains them; this keeps the fixed-array baseline invariant
        // when the transmitter region is enlarged.
        int step = std::max(1, static_cast<int>(std::llround(0.5 * grid.lambda / grid.d)));
        while (step > 1 &&
               (step * (cols - 1) > grid.s - 1 || step * (rows - 1) > grid.s - 1))
            step--;
        if (step * (cols - 1) > grid.s - 1 || step * (rows - 1) > grid.s - 1)
            throw std::runtime_error("fixed_array_placement: array does not fit the region");

        std::vector<int> idx;
        for (int iy = 0; iy < rows; iy++)
            for (int ix = 0; ix < cols; ix++)
                idx.push_back(step * iy * grid.s + step * ix);
        std::sort(idx.begin(), idx.end());
        return idx;
    }

    std::vector<int> selection_array_positions(const GridSpec &grid, int N)
    {
        if (N < 1 || 2 * N > grid.M)
            throw std::invalid_argument("selection_array_positions: need 2N <= M");

        // Same origin anchoring as fixed_array_placement: the candidate set
        // of the selection baseline must not move when the region grows.
        int step = std::max(1, static_cast<int>(std::llround(0.5 * grid.lambda / grid.d)));
        while (step > 1 && (step * (N - 1) > grid.s - 1 || step > grid.s - 1))
            step--;
        if (step * (N - 1) > grid.s - 1 || step > grid.s - 1)
            throw std::runtime_error("selection_array_positions: array does not fit the region");

        std::vector<int> idx;
        for (int iy = 0; iy < 2; iy++)
            for (int ix = 0; ix < N; ix++)
                idx.push_back(step * iy * grid.s + step * ix);
        std::sort(idx.begin(), idx.end());
        return idx;
    }

    AOResult ao_run(const GridSpec &grid, const ChannelMatrix &chan, const TargetSpec &targets,
                    const BeamGrid &bgrid, double d_min, const AOConfig &cfg)
    {
        AOResult result;
        const int N = chan.N;
        const int M = grid.M;
        const Eigen::MatrixXd D = distance_matrix(grid);

        SdrControls p1_cold = cfg.p1;
        p1_cold.warm_start = nullptr;

        // ---- initial candidate pool ------------------------------------
        std::vector<std::vector<int>> pool;
        std::set<std::vector<int>> seen;
        auto add_candidate = [&](std::vector<int> idx) {
            if (static_cast<int>(idx.size()) != N)
                return;
            for (int m : idx)
                if (m < 0 || m >= M)
                    return;
            std::sort(idx.begin(), idx.end());
            if (!indices_feasible(idx, D, d_min))
                return;
            if (seen.insert(idx).second)
                pool.push_back(std::move(idx));
        };

        try
        {
            add_candidate(greedy_spread_placement(grid, D, N, d_min));
        }
        catch (const std::exception &)
        {
        }
        if (cfg.baseline_pool)
        {
            try
            {
                add_candidate(fixed_array_placement(grid, N));
            }
            catch (const std::exception &)
            {
            }
            try
            {
                const std::vector<int> sel = selection_array_positions(grid, N);
                for_each_subset(static_cast<int>(sel.size()), N,
                                [&](const std::vector<int> &sub) {
                                    std::vector<int> idx;
                                    for (int s : sub)
                                        idx.push_back(sel[static_cast<std::size_t>(s)]);
                                    add_candidate(std::move(idx));
                                });
            }
            catch (const std::exception &)
            {
            }
        }
        for (const auto &extra : cfg.extra_inits)
            add_candidate(extra);
        for (int r = 0; r < cfg.restarts; r++)
        {
            Rng rng = Rng::child(cfg.seed, static_cast<std::uint64_t>(r));
            add_candidate(random_feasible_placement(grid, D, N, d_min, rng));
        }

        // Beamforming at every candidate; the best feasible one seeds the
        // alternating loop.
        bool have_best = false;
        std::vector<int> best_idx;
        BeamformingResult best_beams;
        for (const auto &cand : pool)
        {
            const Placement plc = make_placement(grid, cand, d_min);
            const EffectiveScenario sc =
                make_effective_scenario(grid, plc, chan, targets, bgrid);
            BeamformingResult res = solve_p1(sc, p1_cold);
            result.p1_solves++;
            if (res.status == conic::SolveStatus::optimal && res.feasible &&
                (!have_best || res.power < best_beams.power))
            {
                have_best = true;
                best_idx = cand;
                best_beams = std::move(res);
            }
        }
        if (!have_best)
        {
            result.feasible = false;
            return result;
        }

        // ---- alternating loop -------------------------------------------
        const double s_h = block_channel_rms(chan);
        const double P0 = p2_power_scale(chan, targets, s_h);

        Eigen::MatrixXd b_cur = one_hot_rows(best_idx, M);
        std::vector<std::pair<int, int>> pairs;
        for (int n = 0; n < N; n++)
            for (int m = n + 1; m < N; m++)
                pairs.emplace_back(n, m);
        Eigen::MatrixXd phi_cur = phi_from_selection(b_cur, pairs);

        BeamformingResult beams_cur = best_beams;
        double F_cur = beams_cur.power;

        result.trace.push_back(
            {0, F_cur, 0.0, {0.0, 0.0, 0.0, 0.0}, conic::to_string(beams_cur.status)});

        std::array<double, 4> tau = cfg.tau0;
        for (double &t : tau)
            if (t <= 0.0)
                t = 10.0 * std::max(F_cur / P0, 1e-6);
        const std::array<double, 4> tau_init = tau;

        conic::Solution p2_warm;
        bool have_p2_warm = false;
        double prev_viol = 0.0;
        int stall = 0;

        // With M == N the assignment is forced (C2 plus distinct positions);
        // the position subproblem has no freedom, so the loop is skipped.
        const int loop_iters = (M == N) ? 0 : cfg.max_ao_iters;

        for (int it = 1; it <= loop_iters; it++)
        {
            P2Controls p2ctl;
            p2ctl.tau = tau;
            p2ctl.eps = cfg.p2_eps;
            p2ctl.max_iters = cfg.p2_max_iters;
            p2ctl.verbose = cfg.verbose;
            p2ctl.warm_start = have_p2_warm ? &p2_warm : nullptr;

            const P2Result p2res =
                solve_p2(grid, chan, targets, bgrid, D, d_min, b_cur, phi_cur, beams_cur.W,
                         beams_cur.R, beams_cur.rho0, P0, s_h, p2ctl);
            result.p2_solves++;
            if (p2res.status != conic::SolveStatus::optimal)
            {
                result.trace.push_back({it, F_cur, prev_viol, p2res.penalty_values,
                                        std::string("p2_") + conic::to_string(p2res.status)});
                break;
            }
            p2_warm = p2res.raw;
            have_p2_warm = true;

            // The solver iterate honors the selection equalities only to its
            // tolerance; project every row back onto the probability simplex
            // so the relaxed placement is a genuine position mixture.
            Eigen::MatrixXd b_new = p2res.b;
            if (!b_new.allFinite())
            {
                result.trace.push_back({it, F_cur, prev_viol, p2res.penalty_values,
                                        "p2_degenerate"});
                break;
            }
            for (int n = 0; n < N; n++)
                b_new.row(n) = project_simplex(b_new.row(n).transpose()).transpose();
            const Eigen::MatrixXd phi_new = p2res.phi.cwiseMax(0.0).cwiseMin(1.0);
            double viol = 0.0;
            for (int n = 0; n < N; n++)
                for (int i = 0; i < M; i++)
                    viol += b_new(n, i) * (1.0 - b_new(n, i));

            Placement plc;
            plc.d_min = d_min;
            for (int n = 0; n < N; n++)
                plc.b.push_back(relaxed_selection(b_new.row(n).transpose()));
            const EffectiveScenario sc =
                make_effective_scenario(grid, plc, chan, targets, bgrid);
            SdrControls p1ctl = cfg.p1;
            p1ctl.warm_start = &beams_cur.raw;
            const BeamformingResult p1res = solve_p1(sc, p1ctl);
            result.p1_solves++;

            // Monotonicity safeguard: the step is accepted only when the
            // beamforming stage confirms no power increase; otherwise the
            // incumbent is kept and the loop stops.
            if (p1res.status != conic::SolveStatus::optimal || p1res.power > F_cur)
            {
                result.trace.push_back({it, F_cur, viol, p2res.penalty_values,
                                        p1res.status == conic::SolveStatus::optimal
                                            ? "reverted"
                                            : conic::to_string(p1res.status)});
                break;
            }

            const double rel = (F_cur - p1res.power) / std::max(F_cur, 1e-300);
            b_cur = b_new;
            phi_cur = phi_new;
            beams_cur = p1res;
            F_cur = p1res.power;
            result.trace.push_back(
                {it, F_cur, viol, p2res.penalty_values, conic::to_string(p1res.status)});

            if (rel <= cfg.eps_ao)
                break;

            // Penalty growth when the binariness residual stalls.
            if (viol > 1e-9)
            {
                if (prev_viol > 0.0 && (prev_viol - viol) / prev_viol < cfg.stall_rel)
                    stall++;
                else
                    stall = 0;
                if (stall >= cfg.stall_window)
                {
                    for (int i = 0; i < 4; i++)
                        tau[static_cast<std::size_t>(i)] =
                            std::min(tau[static_cast<std::size_t>(i)] * cfg.tau_growth,
                                     tau_init[static_cast<std::size_t>(i)] * cfg.tau_cap_factor);
                    stall = 0;
                }
            }
            prev_viol = viol;
        }

        // ---- rounding and committal ---------------------------------------
        std::vector<std::vector<int>> cands =
            rounding_candidates(b_cur, D, d_min, 5);
        if (std::find(cands.begin(), cands.end(), best_idx) == cands.end())
            cands.push_back(best_idx); // pool-best placement as a last resort

        for (const auto &cand : cands)
        {
            const Placement plc = make_placement(grid, cand, d_min);
            const EffectiveScenario sc =
                make_effective_scenario(grid, plc, chan, targets, bgrid);
            BeamformingResult res = solve_p1(sc, p1_cold);
            result.p1_solves++;
            if (res.status == conic::SolveStatus::optimal && res.feasible)
            {
                result.feasible = true;
                result.committed = plc;
                result.committed_indices = cand;
                result.power = res.power;
                result.beams = std::move(res);
                break;
            }
        }
        return result;
    }

} // namespace mapb
