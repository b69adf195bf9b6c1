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

#include "doctest.h"

#include "mapbeam/conic.hpp"
#include "mapbeam/rng.hpp"

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>

using namespace mapb;
using namespace mapb::conic;

TEST_CASE("scalar LP: minimize x subject to x >= 3")
{
    Program p;
    const int x = p.add_scalar("x");
    p.obj_term(x, 1.0);
    LinExpr e; // 3 - x <= 0
    e.add(x, -1.0);
    e.constant = 3.0;
    p.add_ineq(e);

    const Solution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.x(x) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(sol.objective == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("PSD corner case: minimize tr(W), W(0,0) >= 1")
{
    Program p;
    const int blk = p.add_hermitian_block("W", 2, true);
    LinExpr tr;
    p.add_trace_terms(tr, blk, Eigen::MatrixXcd::Identity(2, 2));
    for (const auto &[var, coef] : tr.terms)
        p.obj_term(var, coef);

    LinExpr corner; // 1 - W00 <= 0
    corner.add(p.herm_diag(blk, 0), -1.0);
    corner.constant = 1.0;
    p.add_ineq(corner);

    const Solution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-5));
    const Eigen::MatrixXcd W = sol.matrix_value(p, blk);
    CHECK(std::abs(W(0, 0) - 1.0) < 1e-5);
    CHECK(std::abs(W(1, 1)) < 1e-5);
    CHECK(std::abs(W(0, 1)) < 1e-5);
    // PSD within reporting tolerance.
    CHECK(sol.min_psd_eig > -1e-6);
}

TEST_CASE("second-order cone: closest point to a target under a norm cap")
{
    // minimize t subject to ||(x-2, y-1)|| <= t: optimum t=0 at (2,1); then
    // pin x = 0 so the optimum becomes t = sqrt(4+1) at y = 1.
    Program p;
    const int x = p.add_scalar("x");
    const int y = p.add_scalar("y");
    const int t = p.add_scalar("t");
    p.obj_term(t, 1.0);

    std::vector<LinExpr> z(2);
    z[0].add(x, 1.0);
    z[0].constant = -2.0;
    z[1].add(y, 1.0);
    z[1].constant = -1.0;
    LinExpr tt;
    tt.add(t, 1.0);
    p.add_soc(z, tt);

    LinExpr fix; // x == 0
    fix.add(x, 1.0);
    p.add_eq(fix);

    const Solution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.x(t) == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(sol.x(y) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::abs(sol.x(x)) < 1e-6);
}

TEST_CASE("small LMI: scalar bound through an affine matrix inequality")
{
    // minimize x subject to [[x, 1], [1, x]] PSD, i.e. x >= 1.
    Program p;
    const int x = p.add_scalar("x");
    p.obj_term(x, 1.0);
    const int lmi = p.add_lmi(2);
    p.lmi_entry(lmi, 0, 0, x, {1.0, 0.0});
    p.lmi_entry(lmi, 1, 1, x, {1.0, 0.0});
    p.lmi_const(lmi, 0, 1, {1.0, 0.0});

    const Solution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.x(x) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("infeasible and unbounded statuses are reported, not thrown")
{
    SUBCASE("contradictory bounds")
    {
        Program p;
        const int x = p.add_scalar("x");
        p.obj_term(x, 1.0);
        LinExpr lo; // 3 - x <= 0  (x >= 3)
        lo.add(x, -1.0);
        lo.constant = 3.0;
        p.add_ineq(lo);
        LinExpr hi; // x - 2 <= 0  (x <= 2)
        hi.add(x, 1.0);
        hi.constant = -2.0;
        p.add_ineq(hi);
        const Solution sol = solve(p);
        CHECK(sol.status == SolveStatus::infeasible);
    }

    SUBCASE("objective unbounded below")
    {
        Program p;
        const int x = p.add_scalar("x");
        p.obj_term(x, 1.0);
        LinExpr hi; // x <= 5; minimize x is unbounded below
        hi.add(x, 1.0);
        hi.constant = -5.0;
        p.add_ineq(hi);
        const Solution sol = solve(p);
        CHECK(sol.status == SolveStatus::unbounded);
    }
}

TEST_CASE("Hermitian block indexing and trace/quadform helpers")
{
    Program p;
    const int blk = p.add_hermitian_block("X", 3, false);
    CHECK(p.num_scalars() == 9); // 3 diagonal + 3 pairs × (Re, Im)
    CHECK(p.block_dim(blk) == 3);

    // The quadratic form a^H X a must match tr(X·aa^H) term-by-term.
    Eigen::VectorXcd a(3);
    a << std::complex<double>(1.0, 2.0), std::complex<double>(-0.5, 0.3),
        std::complex<double>(0.0, -1.0);
    LinExpr quad, trace;
    p.add_quadform_terms(quad, blk, a);
    p.add_trace_terms(trace, blk, a * a.adjoint());

    Eigen::VectorXd cq = Eigen::VectorXd::Zero(p.num_scalars());
    Eigen::VectorXd ct = Eigen::VectorXd::Zero(p.num_scalars());
    for (const auto &[var, coef] : quad.terms)
        cq(var) += coef;
    for (const auto &[var, coef] : trace.terms)
        ct(var) += coef;
    CHECK((cq - ct).cwiseAbs().maxCoeff() < 1e-14);

    // Evaluate the form at a random Hermitian matrix by loading the block
    // parameterization directly.
    Rng rng(3);
    Eigen::MatrixXcd H(3, 3);
    for (int i = 0; i < 3; i++)
        for (int j = 0; j < 3; j++)
            H(i, j) = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    H = ((H + H.adjoint()) / 2.0).eval();
    Eigen::VectorXd xv = Eigen::VectorXd::Zero(p.num_scalars());
    for (int i = 0; i < 3; i++)
        xv(p.herm_diag(blk, i)) = H(i, i).real();
    for (int i = 0; i < 3; i++)
        for (int j = i + 1; j < 3; j++)
        {
            const auto [re, im] = p.herm_offdiag(blk, i, j);
            xv(re) = H(i, j).real();
            xv(im) = H(i, j).imag();
        }
    const double got = cq.dot(xv);
    const double want = (a.adjoint() * H * a).real()(0, 0);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));

    // Dimension mismatches are rejected.
    LinExpr e;
    CHECK_THROWS_AS(p.add_trace_terms(e, blk, Eigen::MatrixXcd::Identity(2, 2)),
                    std::invalid_argument);
    CHECK_THROWS_AS(p.add_quadform_terms(e, blk, Eigen::VectorXcd::Ones(2)),
                    std::invalid_argument);
}

TEST_CASE("program validation catches malformed references")
{
    Program p;
    const int x = p.add_scalar("x");
    LinExpr e;
    e.add(x, 1.0);
    p.add_eq(e);
    CHECK_NOTHROW(p.validate());

    // Undeclared variable indices are rejected at insertion time.
    LinExpr bad;
    bad.add(42, 1.0);
    CHECK_THROWS_AS(p.add_eq(bad), std::out_of_range);
    CHECK_THROWS_AS(p.add_ineq(bad), std::out_of_range);
    CHECK_THROWS_AS(p.obj_term(42, 1.0), std::out_of_range);
}

TEST_CASE("program dump names every section")
{
    Program p;
    const int x = p.add_scalar("power");
    p.add_hermitian_block("W", 2, true);
    p.obj_term(x, 1.0);
    LinExpr e;
    e.add(x, -1.0);
    e.constant = 1.0;
    p.add_ineq(e);

    std::ostringstream os;
    p.dump(os);
    const std::string text = os.str();
    CHECK(text.find("scalars 5") != std::string::npos); // 1 + 2² block parameters
    CHECK(text.find("name W") != std::string::npos);
    CHECK(text.find("ineq 1") != std::string::npos);
    CHECK(text.find("psd 1") != std::string::npos);
}

TEST_CASE("extract_rank_one")
{
    SUBCASE("exact rank one returns the generating vector up to phase")
    {
        Eigen::VectorXcd v(3);
        v << std::complex<double>(1.0, 1.0), std::complex<double>(0.5, -2.0),
            std::complex<double>(-0.25, 0.0);
        const Eigen::MatrixXcd W = v * v.adjoint();
        const auto [w, ok] = extract_rank_one(W);
        REQUIRE(ok);
        // Compare the rank-one reconstructions (phase-invariant).
        CHECK((w * w.adjoint() - W).cwiseAbs().maxCoeff() < 1e-10);
        // Canonical phase: largest-magnitude entry is real positive.
        int imax = 0;
        w.cwiseAbs().maxCoeff(&imax);
        CHECK(w(imax).imag() == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(w(imax).real() > 0.0);
    }

    SUBCASE("identity is not rank one")
    {
        const auto [w, ok] = extract_rank_one(Eigen::MatrixXcd::Identity(2, 2));
        CHECK_FALSE(ok);
        CHECK(w.size() == 2);
    }

    SUBCASE("rank one plus small noise stays rank one within tolerance")
    {
        Rng rng(17);
        Eigen::VectorXcd v(3);
        for (int i = 0; i < 3; i++)
            v(i) = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        Eigen::MatrixXcd noise(3, 3);
        for (int i = 0; i < 3; i++)
            for (int j = 0; j < 3; j++)
                noise(i, j) = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        noise = (1e-9 * (noise * noise.adjoint())).eval();
        const Eigen::MatrixXcd W = v * v.adjoint() + noise;
        const auto [w, ok] = extract_rank_one(W, 1e-6);
        REQUIRE(ok);
        CHECK((W - w * w.adjoint()).norm() < 1e-6);
    }

    SUBCASE("2x2 eigenvalues cross-checked against characteristic-polynomial roots")
    {
        Rng rng(19);
        Eigen::MatrixXcd A(2, 2);
        for (int i = 0; i < 2; i++)
            for (int j = 0; j < 2; j++)
                A(i, j) = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const Eigen::MatrixXcd W = A * A.adjoint();
        // Roots of λ² − tr·λ + det = 0 give both eigenvalues exactly.
        const double tr = W.trace().real();
        const double det = (W(0, 0) * W(1, 1) - W(0, 1) * W(1, 0)).real();
        const double disc = std::sqrt(tr * tr / 4.0 - det);
        const double l1 = tr / 2.0 + disc;
        const auto [w, ok] = extract_rank_one(W, 1e-6);
        CHECK(w.squaredNorm() == doctest::Approx(l1).epsilon(1e-10));
        CHECK(ok == (tr / 2.0 - disc <= 1e-6 * l1));
    }

    SUBCASE("zero trace gives an empty-power vector, negative dominant throws")
    {
        const auto [w, ok] = extract_rank_one(Eigen::MatrixXcd::Zero(2, 2));
        CHECK(ok);
        CHECK(w.norm() == doctest::Approx(0.0));
        CHECK_THROWS_AS(extract_rank_one(-Eigen::MatrixXcd::Identity(2, 2)),
                        std::runtime_error);
    }
}

TEST_CASE("solutions are deterministic across repeated solves")
{
    Program p;
    const int blk = p.add_hermitian_block("W", 2, true);
    LinExpr tr;
    p.add_trace_terms(tr, blk, Eigen::MatrixXcd::Identity(2, 2));
    for (const auto &[var, coef] : tr.terms)
        p.obj_term(var, coef);
    Eigen::VectorXcd a(2);
    a << std::complex<double>(0.8, -0.6), std::complex<double>(0.1, 0.4);
    LinExpr quad;
    p.add_quadform_terms(quad, blk, a, -1.0);
    quad.constant = 1.0; // a^H W a >= 1
    p.add_ineq(quad);

    const Solution s1 = solve(p);
    const Solution s2 = solve(p);
    REQUIRE(s1.status == SolveStatus::optimal);
    REQUIRE(s2.status == SolveStatus::optimal);
    CHECK((s1.x - s2.x).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK(s1.objective == doctest::Approx(s2.objective));
    CHECK(s1.iterations == s2.iterations);
}
