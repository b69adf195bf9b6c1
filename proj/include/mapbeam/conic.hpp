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

#ifndef mapbeam_conic_H
#define mapbeam_conic_H

#include <Eigen/Dense>
#include <complex>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace mapb::conic
{
    // Solver-agnostic intermediate representation of the convex subproblems:
    // a linear objective over real scalars (some of which parameterize
    // Hermitian matrix blocks), with linear equalities/inequalities,
    // second-order cones and linear matrix inequalities. The beamforming and
    // placement modules assemble Programs; the embedded first-order solver
    // (or any backend honoring this contract) consumes them.

    // Sparse affine expression Σ coef_i·x_i + constant over the scalars.
    struct LinExpr
    {
        std::vector<std::pair<int, double>> terms;
        double constant = 0.0;

        LinExpr &add(int var, double coef)
        {
            if (coef != 0.0)
                terms.emplace_back(var, coef);
            return *this;
        }
    };

    class Program
    {
      public:
        // ---- variables -----------------------------------------------------
        int add_scalar(const std::string &name);

        // Declares a dim×dim complex Hermitian matrix block backed by dim²
        // real scalars: the dim diagonal entries first, then (Re, Im) of each
        // strict-upper entry in row-major (i<j) order. When psd_cone is true
        // the block itself is constrained positive semidefinite.
        int add_hermitian_block(const std::string &name, int dim, bool psd_cone);

        int num_scalars() const { return nvars_; }
        int num_blocks() const { return static_cast<int>(blocks_.size()); }
        int block_dim(int blk) const { return blocks_[static_cast<std::size_t>(blk)].dim; }
        int block_offset(int blk) const { return blocks_[static_cast<std::size_t>(blk)].offset; }

        // Scalar indices of block entries.
        int herm_diag(int blk, int i) const;
        std::pair<int, int> herm_offdiag(int blk, int i, int j) const; // i<j -> (Re, Im)

        // ---- affine helpers ------------------------------------------------
        // Appends scale·tr(C·X_blk) to e; C must be Hermitian so the trace is
        // real. tr(C·X) = Σ_i C_ii X_ii + Σ_{i<j} 2(Re C_ij·Re X_ij + Im C_ij·Im X_ij).
        void add_trace_terms(LinExpr &e, int blk, const Eigen::MatrixXcd &C,
                             double scale = 1.0) const;

        // Appends scale·(a^H X_blk a), the Hermitian quadratic form in a.
        void add_quadform_terms(LinExpr &e, int blk, const Eigen::VectorXcd &a,
                                double scale = 1.0) const;

        // ---- constraints ---------------------------------------------------
        void add_eq(LinExpr e);    // e == 0
        void add_ineq(LinExpr e);  // e <= 0
        void add_soc(std::vector<LinExpr> z, LinExpr t); // ||z||_2 <= t

        // Affine Hermitian LMI: M(x) = M0 + Σ x_v·E_v ⪰ 0. Entries are added
        // once per (r,c) with r <= c; the (c,r) mirror is implied by Hermitian
        // symmetry (conjugated coefficient). Diagonal coefficients must be
        // real.
        int add_lmi(int dim);
        void lmi_entry(int lmi, int r, int c, int var, std::complex<double> coef);
        void lmi_const(int lmi, int r, int c, std::complex<double> value);

        // ---- objective (minimize) -------------------------------------------
        void obj_term(int var, double coef);
        double obj_constant = 0.0;

        void validate() const;

        // Documented structured-text serialization for cross-solver debugging.
        void dump(std::ostream &os) const;

        // ---- storage (read by the solver backend) ---------------------------
        struct HermBlock
        {
            std::string name;
            int offset = 0;
            int dim = 0;
            bool psd = false;
        };
        struct Soc
        {
            std::vector<LinExpr> z;
            LinExpr t;
        };
        struct LmiEntry
        {
            int var = 0;
            int r = 0, c = 0;
            std::complex<double> coef;
        };
        struct LmiConst
        {
            int r = 0, c = 0;
            std::complex<double> value;
        };
        struct Lmi
        {
            int dim = 0;
            std::vector<LmiEntry> entries;
            std::vector<LmiConst> consts;
        };

        const std::vector<HermBlock> &blocks() const { return blocks_; }
        const std::vector<LinExpr> &equalities() const { return eqs_; }
        const std::vector<LinExpr> &inequalities() const { return ineqs_; }
        const std::vector<Soc> &socs() const { return socs_; }
        const std::vector<Lmi> &lmis() const { return lmis_; }
        const std::vector<std::pair<int, double>> &objective() const { return obj_; }
        const std::vector<std::string> &scalar_names() const { return names_; }

      private:
        int nvars_ = 0;
        std::vector<std::string> names_;
        std::vector<HermBlock> blocks_;
        std::vector<LinExpr> eqs_;
        std::vector<LinExpr> ineqs_;
        std::vector<Soc> socs_;
        std::vector<Lmi> lmis_;
        std::vector<std::pair<int, double>> obj_;

        void check_var(int var) const;
    };

    enum class SolveStatus
    {
        optimal,
        infeasible,
        unbounded,
        numerical_failure
    };

    const char *to_string(SolveStatus s);

    struct Solution
    {
        SolveStatus status = SolveStatus::numerical_failure;
        Eigen::VectorXd x;      // scalar values (matrix blocks via their params)
        double objective = 0.0; // includes Program::obj_constant
        double max_primal_residual = 0.0;
        double min_psd_eig = 0.0; // most negative eigenvalue across PSD cones
        int iterations = 0;

        // Internal state kept for warm starts (dual and slack iterates).
        Eigen::VectorXd y;
        Eigen::VectorXd s;

        // Reassembles a Hermitian block from its scalar parameters.
        Eigen::MatrixXcd matrix_value(const Program &p, int blk) const;
    };

    struct SolverOptions
    {
        double eps = 1e-7;    // primal/dual residual and gap tolerance
        int max_iters = 100000;
        int check_every = 25;
        double alpha = 1.5;   // over-relaxation
        int ruiz_iters = 10;  // equilibration passes
        bool verbose = false;
        const Solution *warm_start = nullptr;
    };

    // Solves the program with the embedded first-order conic method
    // (homogeneous self-dual embedding, ADMM splitting; the KKT system is
    // factored once per program). Infeasible/unbounded outcomes are reported
    // in the status, not thrown.
    Solution solve(const Program &p, const SolverOptions &opts = {});

    // Dominant eigenpair extraction with a rank-one decision: returns
    // w = sqrt(λ1)·u1 and true iff λ2/λ1 <= tol_ratio. The returned vector's
    // global phase is canonicalized (largest-magnitude entry real positive).
    // Throws when λ1 <= 0 while tr(W) is materially nonzero.
    std::pair<Eigen::VectorXcd, bool> extract_rank_one(const Eigen::MatrixXcd &W,
                                                       double tol_ratio = 1e-6);

} // namespace mapb::conic

#endif
