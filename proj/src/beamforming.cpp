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

#include "mapbeam/beamforming.hpp"
#include "mapbeam/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mapb
{

    // Relative slack applied to the committed-design feasibility checks; the
    // first-order solver meets constraints to its own tolerance, and the
    // reporting layer accepts that level of violation.
    static constexpr double FEAS_REL_TOL = 1e-4;

    EffectiveScenario make_effective_scenario(const GridSpec &grid, const Placement &placement,
                                              const ChannelMatrix &chan,
                                              const TargetSpec &targets, const BeamGrid &bgrid)
    {
        if (chan.M != grid.M)
            throw std::invalid_argument("make_effective_scenario: channel/grid size mismatch");
        if (placement.N() != chan.N)
            throw std::invalid_argument("make_effective_scenario: placement/channel antenna "
                                        "count mismatch");
        targets.validate();

        EffectiveScenario sc;
        sc.N = placement.N();
        sc.K = chan.K();
        sc.E = targets.E();
        sc.QL = bgrid.points();

        // Effective quantities are b_n-weighted combinations of the per-block
        // values; for a binary placement this reduces to plain selection, and
        // the same expressions cover the relaxed placements visited while the
        // position subproblem is iterating.
        Eigen::MatrixXd bsel(grid.M, sc.N);
        for (int n = 0; n < sc.N; n++)
        {
            const Eigen::VectorXd &bn = placement.b[static_cast<std::size_t>(n)].b;
            if (bn.size() != grid.M)
                throw std::invalid_argument("make_effective_scenario: selection length mismatch");
            bsel.col(n) = bn;
        }

        sc.h_eff.resize(sc.K, sc.N);
        for (int k = 0; k < sc.K; k++)
            sc.h_eff.row(k) = chan.user_block(k) * bsel;

        sc.a_grid.resize(sc.QL, sc.N);
        sc.ideal.resize(sc.QL);
        for (int l = 0; l < bgrid.L; l++)
            for (int q = 0; q < bgrid.Q; q++)
            {
                const int i = l * bgrid.Q + q;
                const Eigen::VectorXcd a = field_response(
                    grid, bgrid.thetas[static_cast<std::size_t>(l)],
                    bgrid.phis[static_cast<std::size_t>(q)]);
                sc.a_grid.row(i) = a.transpose() * bsel;
                sc.ideal(i) = bgrid.ideal(l, q);
            }

        sc.a_tgt.resize(sc.E, sc.N);
        sc.thr.resize(sc.E);
        for (int e = 0; e < sc.E; e++)
        {
            const Eigen::VectorXcd a = field_response(grid, targets.theta[static_cast<std::size_t>(e)],
                                                      targets.phi[static_cast<std::size_t>(e)]);
            sc.a_tgt.row(e) = a.transpose() * bsel;
            sc.thr(e) = chance_threshold(targets, e, chan.paths.L0);
        }

        sc.gamma_lin.resize(sc.K);
        sc.sigma2.resize(sc.K);
        for (int k = 0; k < sc.K; k++)
        {
            sc.gamma_lin(k) = chan.gamma_th[static_cast<std::size_t>(k)];
            sc.sigma2(k) = chan.sigma2[static_cast<std::size_t>(k)];
        }

        sc.delta_d = bgrid.delta_d;
        return sc;
    }

    double channel_rms(const EffectiveScenario &sc)
    {
        const double ms = sc.h_eff.squaredNorm() /
                          static_cast<double>(sc.h_eff.size() > 0 ? sc.h_eff.size() : 1);
        const double rms = std::sqrt(ms);
        return rms > 0.0 ? rms : 1.0;
    }

    double p1_power_scale(const EffectiveScenario &sc)
    {
        // Bring both constraint families to O(1): a beampattern floor thr is
        // met with per-antenna powers near thr/N² (coherent gain N² on a
        // unit-modulus steering vector), and an SINR target γ with powers near
        // γσ²/(N·s_h²) (beamforming gain N on a channel of RMS entry s_h).
        const double s_h = channel_rms(sc);
        double p_sense = 0.0;
        if (sc.E > 0)
            p_sense = sc.thr.maxCoeff() / static_cast<double>(sc.N > 0 ? sc.N : 1);
        double p_comm = 0.0;
        for (int k = 0; k < sc.K; k++)
            p_comm = std::max(p_comm, sc.gamma_lin(k) * sc.sigma2(k) / (s_h * s_h));
        const double p0 = std::max(p_sense, p_comm);
        return p0 > 0.0 ? p0 : 1.0;
    }

    conic::Program assemble_p1(const EffectiveScenario &sc, double power_scale,
                               double channel_scale)
    {
        if (sc.N < 1 || sc.K < 1)
            throw std::invalid_argument("assemble_p1: scenario needs antennas and users");
        if (!(power_scale > 0.0) || !(channel_scale > 0.0))
            throw std::invalid_argument("assemble_p1: scales must be positive");
        if (!(sc.delta_d > 0.0))
            throw std::invalid_argument("assemble_p1: beampattern MSE cap must be positive");

        conic::Program p;

        std::vector<int> Wb(static_cast<std::size_t>(sc.K));
        for (int k = 0; k < sc.K; k++)
            Wb[static_cast<std::size_t>(k)] =
                p.add_hermitian_block("W" + std::to_string(k), sc.N, true);
        const int Rb = p.add_hermitian_block("R", sc.N, true);
        const int rho = p.add_scalar("rho0");

        // Objective: total transmit power in units of power_scale.
        for (int k = 0; k < sc.K; k++)
            for (int i = 0; i < sc.N; i++)
                p.obj_term(p.herm_diag(Wb[static_cast<std::size_t>(k)], i), 1.0);
        for (int i = 0; i < sc.N; i++)
            p.obj_term(p.herm_diag(Rb, i), 1.0);

        // rho0 >= 0.
        {
            conic::LinExpr e;
            e.add(rho, -1.0);
            p.add_ineq(e);
        }

        // SINR floors with the sensing beams contributing interference at the
        // users: σ_k² + Σ_{j≠k} h_k^H W_j h_k + h_k^H R h_k − (1/γ_k)·h_k^H W_k h_k <= 0.
        // Each row is divided by the (scaled) noise power so its constant term
        // is exactly one; the solver's norm-wise feasibility tolerance then
        // bounds the SINR violation relative to the noise floor. Without this,
        // rows whose natural magnitude is the communication power — many
        // orders below the sensing power that sets power_scale — can absorb
        // the entire residual budget while grossly violating the floor.
        for (int k = 0; k < sc.K; k++)
        {
            if (!(sc.sigma2(k) > 0.0))
                throw std::invalid_argument("assemble_p1: noise powers must be positive");
            // h̄ = h·sqrt(power_scale)/σ; the channel normalization cancels.
            const Eigen::VectorXcd hk = sc.h_eff.row(k).transpose() *
                                        std::sqrt(power_scale / sc.sigma2(k));
            conic::LinExpr e;
            e.constant = 1.0;
            for (int j = 0; j < sc.K; j++)
                p.add_quadform_terms(e, Wb[static_cast<std::size_t>(j)], hk,
                                     j == k ? -1.0 / sc.gamma_lin(k) : 1.0);
            p.add_quadform_terms(e, Rb, hk, 1.0);
            p.add_ineq(e);
        }

        // Beampattern floors at the target angles (chance constraint):
        // thr̃_e − ā_e^H (ΣW + R) ā_e <= 0.
        for (int e_i = 0; e_i < sc.E; e_i++)
        {
            const Eigen::VectorXcd ae = sc.a_tgt.row(e_i).transpose();
            conic::LinExpr e;
            e.constant = sc.thr(e_i) / power_scale;
            for (int k = 0; k < sc.K; k++)
                p.add_quadform_terms(e, Wb[static_cast<std::size_t>(k)], ae, -1.0);
            p.add_quadform_terms(e, Rb, ae, -1.0);
            p.add_ineq(e);
        }

        // Matching-error cap as a second-order cone. The residual at grid
        // point i is r_i = rho0·ideal_i − ā_i^H (ΣW + R) ā_i (scaled units);
        // r is a linear map of the nv scalars with rank ≤ nv, so a thin QR of
        // its QL×nv coefficient matrix compresses ‖r‖ to an nv-row cone:
        // ‖R̂ξ‖ <= sqrt(QL·δ_d)/power_scale.
        {
            const int nv = p.num_scalars();
            Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(sc.QL, nv);
            for (int i = 0; i < sc.QL; i++)
            {
                const Eigen::VectorXcd ai = sc.a_grid.row(i).transpose();
                conic::LinExpr e;
                e.add(rho, sc.ideal(i));
                for (int k = 0; k < sc.K; k++)
                    p.add_quadform_terms(e, Wb[static_cast<std::size_t>(k)], ai, -1.0);
                p.add_quadform_terms(e, Rb, ai, -1.0);
                for (const auto &[v, c] : e.terms)
                    coef(i, v) += c;
            }

            Eigen::HouseholderQR<Eigen::MatrixXd> qr(coef);
            const Eigen::MatrixXd Rfac = qr.matrixQR()
                                             .topRows(std::min<Eigen::Index>(sc.QL, nv))
                                             .triangularView<Eigen::Upper>();

            std::vector<conic::LinExpr> rows;
            for (int r = 0; r < Rfac.rows(); r++)
            {
                conic::LinExpr e;
                for (int v = 0; v < nv; v++)
                    e.add(v, Rfac(r, v));
                if (!e.terms.empty())
                    rows.push_back(std::move(e));
            }
            conic::LinExpr t;
            t.constant = std::sqrt(static_cast<double>(sc.QL) * sc.delta_d) / power_scale;
            p.add_soc(std::move(rows), std::move(t));
        }

        return p;
    }

    namespace
    {

        // Sensing interference h_k^H R h_k received by each user.
        Eigen::VectorXd sensing_leakage(const Eigen::MatrixXcd &h_eff,
                                        const Eigen::MatrixXcd &R)
        {
            if (R.rows() != h_eff.cols() || R.cols() != h_eff.cols())
                throw std::invalid_argument(
                    "evaluate_sinr: sensing covariance dimension disagrees");
            Eigen::VectorXd out(h_eff.rows());
            for (Eigen::Index k = 0; k < h_eff.rows(); k++)
            {
                const Eigen::VectorXcd hk = h_eff.row(k).transpose();
                out(k) = std::max(0.0, (hk.adjoint() * R * hk).real()(0));
            }
            return out;
        }

    } // namespace

    Eigen::VectorXd evaluate_sinr(const Eigen::MatrixXcd &h_eff, const Eigen::VectorXd &sigma2,
                                  const std::vector<Eigen::MatrixXcd> &W,
                                  const Eigen::MatrixXcd &R)
    {
        const int K = static_cast<int>(h_eff.rows());
        if (static_cast<int>(W.size()) != K || sigma2.size() != K)
            throw std::invalid_argument("evaluate_sinr: per-user dimensions disagree");
        const Eigen::VectorXd leak = sensing_leakage(h_eff, R);
        Eigen::VectorXd out(K);
        for (int k = 0; k < K; k++)
        {
            const Eigen::VectorXcd hk = h_eff.row(k).transpose();
            double num = 0.0, interf = 0.0;
            for (int j = 0; j < K; j++)
            {
                const double v = (hk.adjoint() * W[static_cast<std::size_t>(j)] * hk).real()(0);
                if (j == k)
                    num = v;
                else
                    interf += v;
            }
            out(k) = num / (sigma2(k) + interf + leak(k));
        }
        return out;
    }

    Eigen::VectorXd evaluate_sinr(const Eigen::MatrixXcd &h_eff, const Eigen::VectorXd &sigma2,
                                  const std::vector<Eigen::VectorXcd> &w,
                                  const Eigen::MatrixXcd &R)
    {
        const int K = static_cast<int>(h_eff.rows());
        if (static_cast<int>(w.size()) != K || sigma2.size() != K)
            throw std::invalid_argument("evaluate_sinr: per-user dimensions disagree");
        const Eigen::VectorXd leak = sensing_leakage(h_eff, R);
        Eigen::VectorXd out(K);
        for (int k = 0; k < K; k++)
        {
            const Eigen::VectorXcd hk = h_eff.row(k).transpose();
            double num = 0.0, interf = 0.0;
            for (int j = 0; j < K; j++)
            {
                const double v = std::norm(hk.dot(w[static_cast<std::size_t>(j)]));
                if (j == k)
                    num = v;
                else
                    interf += v;
            }
            out(k) = num / (sigma2(k) + interf + leak(k));
        }
        return out;
    }

    Eigen::VectorXd pattern_levels(const Eigen::MatrixXcd &a_rows,
                                   const std::vector<Eigen::VectorXcd> &w,
                                   const Eigen::MatrixXcd &R)
    {
        const int rows = static_cast<int>(a_rows.rows());
        Eigen::VectorXd out(rows);
        for (int i = 0; i < rows; i++)
        {
            const Eigen::VectorXcd ai = a_rows.row(i).transpose();
            double v = (ai.adjoint() * R * ai).real()(0);
            for (const auto &wk : w)
                v += std::norm(ai.dot(wk));
            out(i) = v;
        }
        return out;
    }

    double committed_mse(const EffectiveScenario &sc, const std::vector<Eigen::VectorXcd> &w,
                         const Eigen::MatrixXcd &R, double rho0)
    {
        const Eigen::VectorXd lv = pattern_levels(sc.a_grid, w, R);
        return (rho0 * sc.ideal - lv).squaredNorm() / static_cast<double>(sc.QL);
    }

    DesignCheck check_design(const EffectiveScenario &sc, const std::vector<Eigen::VectorXcd> &w,
                             const Eigen::MatrixXcd &R, double rho0)
    {
        DesignCheck chk;

        const Eigen::VectorXd sinr = evaluate_sinr(sc.h_eff, sc.sigma2, w, R);
        chk.min_sinr_ratio = std::numeric_limits<double>::infinity();
        for (int k = 0; k < sc.K; k++)
            chk.min_sinr_ratio = std::min(chk.min_sinr_ratio, sinr(k) / sc.gamma_lin(k));

        chk.mse = committed_mse(sc, w, R, rho0);

        chk.min_pattern_ratio = std::numeric_limits<double>::infinity();
        if (sc.E > 0)
        {
            const Eigen::VectorXd lv = pattern_levels(sc.a_tgt, w, R);
            for (int e = 0; e < sc.E; e++)
                chk.min_pattern_ratio = std::min(chk.min_pattern_ratio, lv(e) / sc.thr(e));
        }

        chk.ok = chk.min_sinr_ratio >= 1.0 - FEAS_REL_TOL &&
                 chk.mse <= sc.delta_d * (1.0 + FEAS_REL_TOL) &&
                 chk.min_pattern_ratio >= 1.0 - FEAS_REL_TOL;
        return chk;
    }

    std::vector<Eigen::VectorXcd> extract_sensing_beams(const Eigen::MatrixXcd &R,
                                                        double rel_tol)
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (R + R.adjoint()));
        const Eigen::VectorXd ev = es.eigenvalues();
        const double lead = ev.size() > 0 ? std::max(ev(ev.size() - 1), 0.0) : 0.0;
        std::vector<Eigen::VectorXcd> beams;
        for (Eigen::Index i = ev.size(); i-- > 0;)
        {
            if (ev(i) <= rel_tol * lead || ev(i) <= 0.0)
                break;
            beams.push_back(std::sqrt(ev(i)) * es.eigenvectors().col(i));
        }
        return beams;
    }

    namespace
    {

        // Optimal nonnegative amplitude of the scaled ideal pattern against
        // fixed levels, and the corresponding MSE.
        std::pair<double, double> refit_rho0(const Eigen::VectorXd &ideal,
                                             const Eigen::VectorXd &levels)
        {
            const double d2 = ideal.squaredNorm();
            double rho = d2 > 0.0 ? std::max(0.0, ideal.dot(levels) / d2) : 0.0;
            const double mse =
                (rho * ideal - levels).squaredNorm() / static_cast<double>(ideal.size());
            return {rho, mse};
        }

        // Gaussian randomization fallback when the relaxation is not rank one.
        // Per draw, unit beam directions are sampled from the SDR covariances
        // and the per-user powers are rebalanced by the exact power-control
        // solve (diag(G_kk/γ_k) − G_off)·p = σ² + r, where G(k,j) = |h_k^H u_j|²
        // and r_k = h_k^H R h_k is the sensing interference, which makes every
        // SINR floor tight. A single factor t ≥ 1 on the whole covariance —
        // user and sensing beams alike — then restores the beampattern floors;
        // the SINR floors stay satisfied because only the noise term does not
        // scale with t, and the amplitude-refit matching error grows as t², so
        // the cap reduces to a closed-form admissibility test.
        struct RandomizedPick
        {
            bool found = false;
            std::vector<Eigen::VectorXcd> w;
            Eigen::MatrixXcd R;
            double power = std::numeric_limits<double>::infinity();
            double rho0 = 0.0;
        };

        RandomizedPick randomize_beams(const EffectiveScenario &sc,
                                       const std::vector<Eigen::MatrixXcd> &W,
                                       const Eigen::MatrixXcd &R, const SdrControls &ctl)
        {
            RandomizedPick best;
            const int K = sc.K;
            Rng rng(ctl.randomization_seed);

            // Square roots of the covariances (eigenvalues clamped at zero).
            std::vector<Eigen::MatrixXcd> sqrtW(static_cast<std::size_t>(K));
            for (int k = 0; k < K; k++)
            {
                const auto &Wk = W[static_cast<std::size_t>(k)];
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (Wk + Wk.adjoint()));
                const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
                sqrtW[static_cast<std::size_t>(k)] = es.eigenvectors() *
                                                     lam.cwiseSqrt().asDiagonal() *
                                                     es.eigenvectors().adjoint();
            }

            // Draw-independent quantities of the sensing covariance.
            const Eigen::VectorXd pr_grid_R = pattern_levels(sc.a_grid, {}, R);
            const Eigen::VectorXd pr_tgt_R =
                sc.E > 0 ? pattern_levels(sc.a_tgt, {}, R) : Eigen::VectorXd();
            const double trR = std::max(R.trace().real(), 0.0);
            Eigen::VectorXd leak(K);
            for (int k = 0; k < K; k++)
            {
                const Eigen::VectorXcd hk = sc.h_eff.row(k).transpose();
                leak(k) = std::max(0.0, (hk.adjoint() * R * hk).real()(0));
            }

            for (int draw = 0; draw < ctl.randomization_draws; draw++)
            {
                // Unit directions for every user.
                std::vector<Eigen::VectorXcd> dir(static_cast<std::size_t>(K));
                bool degenerate = false;
                for (int k = 0; k < K; k++)
                {
                    Eigen::VectorXcd g(sc.N);
                    for (int n = 0; n < sc.N; n++)
                        g(n) = rng.complex_normal(1.0);
                    Eigen::VectorXcd cand = sqrtW[static_cast<std::size_t>(k)] * g;
                    const double nrm = cand.norm();
                    if (nrm <= 1e-14)
                    {
                        degenerate = true;
                        break;
                    }
                    dir[static_cast<std::size_t>(k)] = cand / nrm;
                }
                if (degenerate)
                    continue;

                // Power control: with unit directions fixed, the SINR floors
                // are tight at p solving M·p = σ² + r. A draw whose coupling
                // admits no componentwise-nonnegative solution is discarded.
                Eigen::MatrixXd M(K, K);
                Eigen::VectorXd u(K);
                bool bad = false;
                for (int k = 0; k < K && !bad; k++)
                {
                    const Eigen::VectorXcd hk = sc.h_eff.row(k).transpose();
                    for (int j = 0; j < K; j++)
                    {
                        const double g = std::norm(hk.dot(dir[static_cast<std::size_t>(j)]));
                        M(k, j) = (j == k) ? g / sc.gamma_lin(k) : -g;
                    }
                    if (!(M(k, k) > 0.0))
                        bad = true;
                    u(k) = sc.sigma2(k) + leak(k);
                }
                if (bad)
                    continue;
                const Eigen::VectorXd pw = M.fullPivLu().solve(u);
                if (!pw.allFinite() || pw.minCoeff() < 0.0 ||
                    (M * pw - u).cwiseAbs().maxCoeff() > 1e-9 * u.maxCoeff())
                    continue;

                // Minimal joint scale that restores every beampattern floor.
                double t = 1.0;
                bool floor_dead = false;
                for (int e = 0; e < sc.E && !floor_dead; e++)
                {
                    const Eigen::VectorXcd ae = sc.a_tgt.row(e).transpose();
                    double v = pr_tgt_R(e);
                    for (int j = 0; j < K; j++)
                        v += pw(j) * std::norm(ae.dot(dir[static_cast<std::size_t>(j)]));
                    if (!(v > 0.0))
                        floor_dead = true;
                    else
                        t = std::max(t, sc.thr(e) / v);
                }
                if (floor_dead)
                    continue;

                // Matching error scales as t² once the amplitude is refit, so
                // the minimal-power scale is admissible iff t²·mse₁ ≤ δ_d.
                Eigen::VectorXd lv1 = pr_grid_R;
                for (int j = 0; j < K; j++)
                {
                    const auto &dj = dir[static_cast<std::size_t>(j)];
                    for (int i = 0; i < sc.QL; i++)
                        lv1(i) += pw(j) * std::norm(sc.a_grid.row(i).transpose().dot(dj));
                }
                const auto [rho1, mse1] = refit_rho0(sc.ideal, lv1);
                if (t * t * mse1 > sc.delta_d)
                    continue;

                const double power = t * (pw.sum() + trR);
                if (power < best.power)
                {
                    best.found = true;
                    best.power = power;
                    best.w.clear();
                    for (int k = 0; k < K; k++)
                        best.w.push_back(std::sqrt(t * pw(k)) *
                                         dir[static_cast<std::size_t>(k)]);
                    best.R = t * R;
                    best.rho0 = t * rho1;
                }
            }
            return best;
        }

    } // namespace

    BeamformingResult solve_p1(const EffectiveScenario &sc, const SdrControls &ctl)
    {
        BeamformingResult res;

        const double s_h = channel_rms(sc);
        const double P0 = p1_power_scale(sc);
        res.power_scale = P0;

        conic::Program prog = assemble_p1(sc, P0, s_h);

        conic::SolverOptions sopts;
        sopts.eps = ctl.eps;
        sopts.max_iters = ctl.max_iters;
        sopts.verbose = ctl.verbose;
        sopts.warm_start = ctl.warm_start;
        conic::Solution sol = conic::solve(prog, sopts);

        res.status = sol.status;
        res.iterations = sol.iterations;
        res.raw = sol;
        if (sol.status != conic::SolveStatus::optimal)
            return res;

        // Recover the covariances in watts. The first-order solution satisfies
        // the PSD cones to solver tolerance only; project onto the cone so the
        // returned matrices are exactly PSD (the committed-design feasibility
        // check below absorbs the eps-level perturbation).
        auto psd_project = [](const Eigen::MatrixXcd &X) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (X + X.adjoint()));
            return Eigen::MatrixXcd(es.eigenvectors() *
                                    es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                                    es.eigenvectors().adjoint());
        };
        for (int k = 0; k < sc.K; k++)
            res.W.push_back(psd_project(P0 * sol.matrix_value(prog, k)));
        res.R = psd_project(P0 * sol.matrix_value(prog, sc.K));
        res.rho0 = std::max(0.0, P0 * sol.x(prog.num_scalars() - 1));

        // Rank-one extraction of every user covariance.
        res.rank_one_all = true;
        res.w.clear();
        for (int k = 0; k < sc.K; k++)
        {
            auto [wk, r1] = conic::extract_rank_one(res.W[static_cast<std::size_t>(k)],
                                                    ctl.rank_tol);
            res.w.push_back(std::move(wk));
            res.rank_one_all = res.rank_one_all && r1;
        }

        if (!res.rank_one_all)
        {
            RandomizedPick pick = randomize_beams(sc, res.W, res.R, ctl);
            if (pick.found)
            {
                res.w = std::move(pick.w);
                res.rho0 = pick.rho0;
                res.randomized = true;
                // The committed design replaces the relaxed covariances —
                // including the jointly rescaled sensing covariance — so that
                // the reported power always equals the trace sum.
                res.R = std::move(pick.R);
                for (int k = 0; k < sc.K; k++)
                    res.W[static_cast<std::size_t>(k)] =
                        res.w[static_cast<std::size_t>(k)] *
                        res.w[static_cast<std::size_t>(k)].adjoint();
            }
            // If no randomized candidate is feasible the extracted dominant
            // eigenvectors are kept and the feasibility check below records
            // the failure honestly.
        }

        double pw = res.R.trace().real();
        for (const auto &Wk : res.W)
            pw += Wk.trace().real();
        res.power = pw;

        const DesignCheck chk = check_design(sc, res.w, res.R, res.rho0);
        res.feasible = chk.ok;
        return res;
    }

} // namespace mapb
