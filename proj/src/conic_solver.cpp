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
// Embedded first-order conic solver. The program is lowered to the standard
// form
//
//     minimize  c^T x   subject to   A x + s = b,   s ∈ K,
//
// with K a product of a zero cone (equalities), the nonnegative orthant
// (inequalities), second-order cones, and Hermitian positive-semidefinite
// cones in a scaled real vectorization. It is then solved through the
// homogeneous self-dual embedding with an ADMM splitting: each iteration
// performs one linear solve against the fixed quasi-definite KKT matrix
// [[I, A^T], [A, -I]] (factored once) and one Euclidean projection onto the
// cone product. Ruiz equilibration plus right-hand-side/cost scaling keep the
// iteration well conditioned; convergence and certificate checks are done in
// the original (unscaled) problem data.

#include "mapbeam/conic.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

namespace mapb::conic
{

    namespace
    {

        const double SQRT2 = std::sqrt(2.0);

        // Row-block layout of the cone K, in assembly order.
        struct ConeLayout
        {
            int p = 0;                  // zero-cone rows (equalities)
            int q = 0;                  // nonnegative rows (inequalities)
            std::vector<int> soc_size;  // per second-order cone: 1 + norm rows
            std::vector<int> psd_dim;   // per PSD cone: Hermitian dimension

            int rows() const
            {
                int m = p + q;
                for (int s : soc_size)
                    m += s;
                for (int d : psd_dim)
                    m += d * d;
                return m;
            }
        };

        // Index of the (i,j) strict-upper pair within the vectorized block.
        int pair_rank(int i, int j, int dim)
        {
            int rank = 0;
            for (int r = 0; r < i; r++)
                rank += dim - 1 - r;
            return rank + (j - i - 1);
        }

        struct Assembled
        {
            ConeLayout layout;
            std::vector<Eigen::Triplet<double>> trips;
            Eigen::VectorXd b;
            Eigen::VectorXd c;
            int n = 0;
            int m = 0;
        };

        Assembled assemble(const Program &p)
        {
            Assembled out;
            out.n = p.num_scalars();

            ConeLayout &lay = out.layout;
            lay.p = static_cast<int>(p.equalities().size());
            lay.q = static_cast<int>(p.inequalities().size());
            for (const auto &s : p.socs())
                lay.soc_size.push_back(1 + static_cast<int>(s.z.size()));
            for (const auto &l : p.lmis())
                lay.psd_dim.push_back(l.dim);
            for (const auto &blk : p.blocks())
                if (blk.psd)
                    lay.psd_dim.push_back(blk.dim);

            out.m = lay.rows();
            out.b = Eigen::VectorXd::Zero(out.m);
            out.c = Eigen::VectorXd::Zero(out.n);
            for (const auto &[v, coef] : p.objective())
                out.c(v) += coef;

            auto &T = out.trips;
            int row = 0;

            // Equalities e(x) = 0: slack in the zero cone, s = b - Ax with
            // A row = +coefficients, b = -constant.
            for (const auto &e : p.equalities())
            {
                for (const auto &[v, coef] : e.terms)
                    T.emplace_back(row, v, coef);
                out.b(row) = -e.constant;
                row++;
            }

            // Inequalities e(x) <= 0: s = -e(x) >= 0.
            for (const auto &e : p.inequalities())
            {
                for (const auto &[v, coef] : e.terms)
                    T.emplace_back(row, v, coef);
                out.b(row) = -e.constant;
                row++;
            }

            // Second-order cones: slack block (t(x), z(x)) itself lies in the
            // cone, so s = b - Ax needs A = -coefficients, b = +constants.
            for (const auto &s : p.socs())
            {
                for (const auto &[v, coef] : s.t.terms)
                    T.emplace_back(row, v, -coef);
                out.b(row) = s.t.constant;
                row++;
                for (const auto &ze : s.z)
                {
                    for (const auto &[v, coef] : ze.terms)
                        T.emplace_back(row, v, -coef);
                    out.b(row) = ze.constant;
                    row++;
                }
            }

            // Affine LMIs: s = svec(M0 + Σ x_v E_v), so A columns carry
            // -svec(E_v) and b carries svec(M0). The vectorization lists the
            // dim real diagonal entries first, then (√2·Re, √2·Im) of each
            // strict-upper entry in row-major order.
            for (const auto &l : p.lmis())
            {
                const int base = row;
                for (const auto &en : l.entries)
                {
                    if (en.r == en.c)
                        T.emplace_back(base + en.r, en.var, -en.coef.real());
                    else
                    {
                        const int pr = l.dim + 2 * pair_rank(en.r, en.c, l.dim);
                        T.emplace_back(base + pr, en.var, -SQRT2 * en.coef.real());
                        T.emplace_back(base + pr + 1, en.var, -SQRT2 * en.coef.imag());
                    }
                }
                for (const auto &cn : l.consts)
                {
                    if (cn.r == cn.c)
                        out.b(base + cn.r) += cn.value.real();
                    else
                    {
                        const int pr = l.dim + 2 * pair_rank(cn.r, cn.c, l.dim);
                        out.b(base + pr) += SQRT2 * cn.value.real();
                        out.b(base + pr + 1) += SQRT2 * cn.value.imag();
                    }
                }
                row += l.dim * l.dim;
            }

            // PSD-flagged Hermitian blocks: identity LMI tying the block's
            // scalar parameters to a PSD slack.
            for (const auto &blk : p.blocks())
            {
                if (!blk.psd)
                    continue;
                const int base = row;
                for (int i = 0; i < blk.dim; i++)
                    T.emplace_back(base + i, blk.offset + i, -1.0);
                int pr = blk.dim;
                int par = blk.offset + blk.dim;
                for (int i = 0; i < blk.dim; i++)
                    for (int j = i + 1; j < blk.dim; j++)
                    {
                        T.emplace_back(base + pr, par, -SQRT2);         // Re
                        T.emplace_back(base + pr + 1, par + 1, -SQRT2); // Im
                        pr += 2;
                        par += 2;
                    }
                row += blk.dim * blk.dim;
            }

            return out;
        }

        // Cone-block describers used by both equilibration (row groups must be
        // scaled uniformly to preserve cone membership) and projection.
        struct ConeBlock
        {
            enum Kind
            {
                zero,
                nonneg,
                soc,
                psd
            } kind;
            int start;
            int size; // rows; for psd, size = dim*dim
            int dim;  // psd only
        };

        std::vector<ConeBlock> cone_blocks(const ConeLayout &lay)
        {
            std::vector<ConeBlock> blocks;
            int row = 0;
            if (lay.p > 0)
            {
                // Zero-cone rows scale independently (the cone is invariant).
                for (int i = 0; i < lay.p; i++)
                    blocks.push_back({ConeBlock::zero, row + i, 1, 0});
                row += lay.p;
            }
            for (int i = 0; i < lay.q; i++)
                blocks.push_back({ConeBlock::nonneg, row + i, 1, 0});
            row += lay.q;
            for (int s : lay.soc_size)
            {
                blocks.push_back({ConeBlock::soc, row, s, 0});
                row += s;
            }
            for (int d : lay.psd_dim)
            {
                blocks.push_back({ConeBlock::psd, row, d * d, d});
                row += d * d;
            }
            return blocks;
        }

        // Projects the dual-cone part of the iterate in place. The zero cone's
        // dual is free, the others are self-dual.
        void project_dual_cone(Eigen::VectorXd &y, const std::vector<ConeBlock> &blocks,
                               Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> &es)
        {
            for (const auto &blk : blocks)
            {
                switch (blk.kind)
                {
                case ConeBlock::zero:
                    break;
                case ConeBlock::nonneg:
                    if (y(blk.start) < 0.0)
                        y(blk.start) = 0.0;
                    break;
                case ConeBlock::soc:
                {
                    const int nz = blk.size - 1;
                    const double t = y(blk.start);
                    const double zn = y.segment(blk.start + 1, nz).norm();
                    if (zn <= t)
                        break;
                    if (zn <= -t)
                    {
                        y.segment(blk.start, blk.size).setZero();
                        break;
                    }
                    const double beta = 0.5 * (t + zn);
                    y(blk.start) = beta;
                    y.segment(blk.start + 1, nz) *= beta / zn;
                    break;
                }
                case ConeBlock::psd:
                {
                    const int d = blk.dim;
                    if (d == 1)
                    {
                        if (y(blk.start) < 0.0)
                            y(blk.start) = 0.0;
                        break;
                    }
                    Eigen::MatrixXcd H(d, d);
                    int pr = blk.start + d;
                    for (int i = 0; i < d; i++)
                        H(i, i) = y(blk.start + i);
                    for (int i = 0; i < d; i++)
                        for (int j = i + 1; j < d; j++)
                        {
                            H(i, j) = std::complex<double>(y(pr), y(pr + 1)) / SQRT2;
                            H(j, i) = std::conj(H(i, j));
                            pr += 2;
                        }
                    es.compute(H);
                    const Eigen::VectorXd ev = es.eigenvalues();
                    if (ev(0) >= 0.0)
                        break; // already PSD
                    Eigen::VectorXd evp = ev.cwiseMax(0.0);
                    Eigen::MatrixXcd Hp =
                        es.eigenvectors() * evp.asDiagonal() * es.eigenvectors().adjoint();
                    pr = blk.start + d;
                    for (int i = 0; i < d; i++)
                        y(blk.start + i) = Hp(i, i).real();
                    for (int i = 0; i < d; i++)
                        for (int j = i + 1; j < d; j++)
                        {
                            y(pr) = SQRT2 * Hp(i, j).real();
                            y(pr + 1) = SQRT2 * Hp(i, j).imag();
                            pr += 2;
                        }
                    break;
                }
                }
            }
        }

        // Most negative eigenvalue over the PSD blocks of a slack vector.
        double min_psd_eigenvalue(const Eigen::VectorXd &s, const std::vector<ConeBlock> &blocks)
        {
            double mn = 0.0;
            for (const auto &blk : blocks)
            {
                if (blk.kind != ConeBlock::psd)
                    continue;
                const int d = blk.dim;
                if (d == 1)
                {
                    mn = std::min(mn, s(blk.start));
                    continue;
                }
                Eigen::MatrixXcd H(d, d);
                int pr = blk.start + d;
                for (int i = 0; i < d; i++)
                    H(i, i) = s(blk.start + i);
                for (int i = 0; i < d; i++)
                    for (int j = i + 1; j < d; j++)
                    {
                        H(i, j) = std::complex<double>(s(pr), s(pr + 1)) / SQRT2;
                        H(j, i) = std::conj(H(i, j));
                        pr += 2;
                    }
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H,
                                                                   Eigen::EigenvaluesOnly);
                mn = std::min(mn, es.eigenvalues()(0));
            }
            return mn;
        }

    } // namespace

    Solution solve(const Program &prog, const SolverOptions &opts)
    {
        prog.validate();

        Assembled asm_ = assemble(prog);
        const int n = asm_.n;
        const int m = asm_.m;
        if (n == 0)
            throw std::invalid_argument("conic: program has no variables");

        const std::vector<ConeBlock> blocks = cone_blocks(asm_.layout);

        // ---- Ruiz equilibration with cone-uniform row scales ----------------
        Eigen::VectorXd D = Eigen::VectorXd::Ones(m);
        Eigen::VectorXd E = Eigen::VectorXd::Ones(n);
        {
            Eigen::VectorXd rn(m), cn(n);
            for (int pass = 0; pass < opts.ruiz_iters; pass++)
            {
                rn.setZero();
                for (const auto &t : asm_.trips)
                    rn(t.row()) = std::max(rn(t.row()), std::abs(t.value() * D(t.row()) * E(t.col())));
                for (const auto &blk : blocks)
                {
                    double g = 0.0;
                    for (int i = 0; i < blk.size; i++)
                        g = std::max(g, rn(blk.start + i));
                    if (g < 1e-12)
                        continue;
                    const double f = 1.0 / std::sqrt(g);
                    for (int i = 0; i < blk.size; i++)
                        D(blk.start + i) *= f;
                }
                cn.setZero();
                for (const auto &t : asm_.trips)
                    cn(t.col()) = std::max(cn(t.col()), std::abs(t.value() * D(t.row()) * E(t.col())));
                for (int j = 0; j < n; j++)
                    if (cn(j) >= 1e-12)
                        E(j) /= std::sqrt(cn(j));
            }
        }

        Eigen::VectorXd b_s = D.cwiseProduct(asm_.b);
        Eigen::VectorXd c_s = E.cwiseProduct(asm_.c);
        double sigma_b = b_s.norm();
        double sigma_c = c_s.norm();
        if (sigma_b < 1e-9)
            sigma_b = 1.0;
        if (sigma_c < 1e-9)
            sigma_c = 1.0;
        b_s /= sigma_b;
        c_s /= sigma_c;

        std::vector<Eigen::Triplet<double>> st;
        st.reserve(asm_.trips.size());
        for (const auto &t : asm_.trips)
            st.emplace_back(t.row(), t.col(), t.value() * D(t.row()) * E(t.col()));
        Eigen::SparseMatrix<double> A_s(m, n);
        A_s.setFromTriplets(st.begin(), st.end());

        Eigen::SparseMatrix<double> A_orig(m, n);
        A_orig.setFromTriplets(asm_.trips.begin(), asm_.trips.end());

        // ---- KKT factorization: [[I, A^T], [A, -I]], lower triangle ---------
        std::vector<Eigen::Triplet<double>> kt;
        kt.reserve(static_cast<std::size_t>(n + m) + st.size());
        for (int j = 0; j < n; j++)
            kt.emplace_back(j, j, 1.0);
        for (int k = 0; k < A_s.outerSize(); k++)
            for (Eigen::SparseMatrix<double>::InnerIterator it(A_s, k); it; ++it)
                kt.emplace_back(n + static_cast<int>(it.row()), static_cast<int>(it.col()),
                                it.value());
        for (int i = 0; i < m; i++)
            kt.emplace_back(n + i, n + i, -1.0);
        Eigen::SparseMatrix<double> K(n + m, n + m);
        K.setFromTriplets(kt.begin(), kt.end());

        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt;
        ldlt.compute(K);

        Solution sol;
        sol.x = Eigen::VectorXd::Zero(n);
        sol.y = Eigen::VectorXd::Zero(m);
        sol.s = Eigen::VectorXd::Zero(m);
        if (ldlt.info() != Eigen::Success)
        {
            sol.status = SolveStatus::numerical_failure;
            return sol;
        }

        // Solves [[I, A^T], [A, -I]] (zx, r) = (a1, -a2), which yields
        // zx, zy = r of the nonsymmetric system [[I, A^T], [-A, I]] z = a.
        auto kkt_solve = [&](const Eigen::VectorXd &a1,
                             const Eigen::VectorXd &a2) -> Eigen::VectorXd {
            Eigen::VectorXd rhs(n + m);
            rhs.head(n) = a1;
            rhs.tail(m) = -a2;
            return ldlt.solve(rhs);
        };

        // h = (c, b) in scaled units; p_h = M^{-1} h, reused every iteration.
        const Eigen::VectorXd p_h = kkt_solve(c_s, b_s);
        const double denom = 1.0 + c_s.dot(p_h.head(n)) + b_s.dot(p_h.tail(m));
        if (!(denom > 1e-14))
        {
            sol.status = SolveStatus::numerical_failure;
            return sol;
        }

        // ---- iterate initialization -----------------------------------------
        Eigen::VectorXd u = Eigen::VectorXd::Zero(n + m + 1);
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n + m + 1);
        u(n + m) = 1.0;
        v(n + m) = 1.0;
        if (opts.warm_start != nullptr && opts.warm_start->x.size() == n &&
            opts.warm_start->y.size() == m && opts.warm_start->s.size() == m)
        {
            const Solution &ws = *opts.warm_start;
            u.head(n) = ws.x.cwiseQuotient(E) / sigma_b;
            u.segment(n, m) = ws.y.cwiseQuotient(D) / sigma_c;
            v.segment(n, m) = D.cwiseProduct(ws.s) / sigma_b;
            v(n + m) = 0.0;
        }

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;

        const double bnorm = asm_.b.norm();
        const double cnorm = asm_.c.norm();

        auto finish = [&](SolveStatus st_, const Eigen::VectorXd &x,
                          const Eigen::VectorXd &y, const Eigen::VectorXd &s, int iters) {
            sol.status = st_;
            sol.x = x;
            sol.y = y;
            sol.s = s;
            sol.iterations = iters;
            sol.objective = asm_.c.dot(x) + prog.obj_constant;
            sol.max_primal_residual = (A_orig * x + s - asm_.b).cwiseAbs().maxCoeff();
            sol.min_psd_eig = min_psd_eigenvalue(s, blocks);
            return sol;
        };

        int iter = 0;
        for (iter = 1; iter <= opts.max_iters; iter++)
        {
            // Linear step: utilde = (I+Q)^{-1} (u + v).
            const Eigen::VectorXd w = u + v;
            const Eigen::VectorXd g = kkt_solve(w.head(n), w.segment(n, m));
            const double ztau =
                (w(n + m) + c_s.dot(g.head(n)) + b_s.dot(g.tail(m))) / denom;
            Eigen::VectorXd ut(n + m + 1);
            ut.head(n + m) = g - ztau * p_h;
            ut(n + m) = ztau;

            // Over-relaxed cone step.
            Eigen::VectorXd t = opts.alpha * ut + (1.0 - opts.alpha) * u;
            Eigen::VectorXd unew = t - v;
            Eigen::VectorXd ypart = unew.segment(n, m);
            project_dual_cone(ypart, blocks, es);
            unew.segment(n, m) = ypart;
            if (unew(n + m) < 0.0)
                unew(n + m) = 0.0;

            v += unew - t;
            u = unew;

            if (iter % opts.check_every != 0 && iter != opts.max_iters)
                continue;

            // ---- termination checks in original units -----------------------
            const double tau = u(n + m);

            if (tau > 1e-12)
            {
                Eigen::VectorXd x = sigma_b * E.cwiseProduct(u.head(n)) / tau;
                Eigen::VectorXd y = sigma_c * D.cwiseProduct(u.segment(n, m)) / tau;
                Eigen::VectorXd s = sigma_b * v.segment(n, m).cwiseQuotient(D) / tau;

                const double pres = (A_orig * x + s - asm_.b).norm() / (1.0 + bnorm);
                const double dres = (A_orig.transpose() * y + asm_.c).norm() / (1.0 + cnorm);
                const double ctx = asm_.c.dot(x);
                const double bty = asm_.b.dot(y);
                const double gap = std::abs(ctx + bty) / (1.0 + std::abs(ctx) + std::abs(bty));

                if (opts.verbose)
                    std::fprintf(stderr,
                                 "  conic iter %6d  pres %9.3e  dres %9.3e  gap %9.3e  tau %8.2e\n",
                                 iter, pres, dres, gap, tau);

                if (pres <= opts.eps && dres <= opts.eps && gap <= opts.eps)
                    return finish(SolveStatus::optimal, x, y, s, iter);
            }
            else if (opts.verbose)
                std::fprintf(stderr, "  conic iter %6d  tau %8.2e (certificate regime)\n", iter,
                             tau);

            // Certificate candidates ignore the homogenizing variable.
            {
                Eigen::VectorXd yc = sigma_c * D.cwiseProduct(u.segment(n, m));
                const double bty = asm_.b.dot(yc);
                if (bty < -1e-14 &&
                    (A_orig.transpose() * yc).norm() * std::max(bnorm, 1.0) <=
                        opts.eps * (-bty))
                    return finish(SolveStatus::infeasible, Eigen::VectorXd::Zero(n), yc,
                                  Eigen::VectorXd::Zero(m), iter);

                Eigen::VectorXd xc = sigma_b * E.cwiseProduct(u.head(n));
                Eigen::VectorXd sc = sigma_b * v.segment(n, m).cwiseQuotient(D);
                const double ctx = asm_.c.dot(xc);
                if (ctx < -1e-14 &&
                    (A_orig * xc + sc).norm() * std::max(cnorm, 1.0) <= opts.eps * (-ctx))
                    return finish(SolveStatus::unbounded, xc, Eigen::VectorXd::Zero(m), sc,
                                  iter);
            }
        }

        // Iteration limit: report the last candidate with its residuals.
        const double tau = std::max(u(n + m), 1e-12);
        Eigen::VectorXd x = sigma_b * E.cwiseProduct(u.head(n)) / tau;
        Eigen::VectorXd y = sigma_c * D.cwiseProduct(u.segment(n, m)) / tau;
        Eigen::VectorXd s = sigma_b * v.segment(n, m).cwiseQuotient(D) / tau;
        return finish(SolveStatus::numerical_failure, x, y, s, opts.max_iters);
    }

} // namespace mapb::conic
