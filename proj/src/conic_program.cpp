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

#include "mapbeam/conic.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace mapb::conic
{

    static constexpr double HERM_COEF_TOL = 1e-12;

    int Program::add_scalar(const std::string &name)
    {
        names_.push_back(name);
        return nvars_++;
    }

    int Program::add_hermitian_block(const std::string &name, int dim, bool psd_cone)
    {
        if (dim < 1)
            throw std::invalid_argument("conic: hermitian block dimension must be >= 1");

        HermBlock blk;
        blk.name = name;
        blk.dim = dim;
        blk.psd = psd_cone;
        blk.offset = nvars_;

        for (int i = 0; i < dim; i++)
            add_scalar(name + ".d" + std::to_string(i));
        for (int i = 0; i < dim; i++)
            for (int j = i + 1; j < dim; j++)
            {
                const std::string ij = std::to_string(i) + "_" + std::to_string(j);
                add_scalar(name + ".re" + ij);
                add_scalar(name + ".im" + ij);
            }

        blocks_.push_back(blk);
        return static_cast<int>(blocks_.size()) - 1;
    }

    int Program::herm_diag(int blk, int i) const
    {
        const HermBlock &b = blocks_[static_cast<std::size_t>(blk)];
        if (i < 0 || i >= b.dim)
            throw std::out_of_range("conic: diagonal index out of range");
        return b.offset + i;
    }

    std::pair<int, int> Program::herm_offdiag(int blk, int i, int j) const
    {
        const HermBlock &b = blocks_[static_cast<std::size_t>(blk)];
        if (i < 0 || j <= i || j >= b.dim)
            throw std::out_of_range("conic: off-diagonal index pair must satisfy 0 <= i < j < dim");

        // Strict-upper entries in row-major order: entry (i,j) is preceded by
        // all rows r < i, contributing dim-1-r pairs each, plus j-i-1 pairs in
        // row i itself.
        int pair_rank = 0;
        for (int r = 0; r < i; r++)
            pair_rank += b.dim - 1 - r;
        pair_rank += j - i - 1;

        const int base = b.offset + b.dim + 2 * pair_rank;
        return {base, base + 1};
    }

    void Program::add_trace_terms(LinExpr &e, int blk, const Eigen::MatrixXcd &C,
                                  double scale) const
    {
        const HermBlock &b = blocks_[static_cast<std::size_t>(blk)];
        if (C.rows() != b.dim || C.cols() != b.dim)
            throw std::invalid_argument("conic: trace coefficient dimension mismatch");

        for (int i = 0; i < b.dim; i++)
            e.add(herm_diag(blk, i), scale * C(i, i).real());
        for (int i = 0; i < b.dim; i++)
            for (int j = i + 1; j < b.dim; j++)
            {
                const auto [re, im] = herm_offdiag(blk, i, j);
                e.add(re, 2.0 * scale * C(i, j).real());
                e.add(im, 2.0 * scale * C(i, j).imag());
            }
    }

    void Program::add_quadform_terms(LinExpr &e, int blk, const Eigen::VectorXcd &a,
                                     double scale) const
    {
        const HermBlock &b = blocks_[static_cast<std::size_t>(blk)];
        if (a.size() != b.dim)
            throw std::invalid_argument("conic: quadratic-form vector dimension mismatch");

        // a^H X a = tr(X·a a^H) = tr(C X) with C = a a^H Hermitian.
        for (int i = 0; i < b.dim; i++)
            e.add(herm_diag(blk, i), scale * std::norm(a(i)));
        for (int i = 0; i < b.dim; i++)
            for (int j = i + 1; j < b.dim; j++)
            {
                const std::complex<double> c = a(i) * std::conj(a(j)); // C(i,j) of a a^H
                const auto [re, im] = herm_offdiag(blk, i, j);
                e.add(re, 2.0 * scale * c.real());
                e.add(im, 2.0 * scale * c.imag());
            }
    }

    void Program::check_var(int var) const
    {
        if (var < 0 || var >= nvars_)
            throw std::out_of_range("conic: scalar index out of range");
    }

    void Program::add_eq(LinExpr e)
    {
        for (const auto &[v, c] : e.terms)
            check_var(v);
        eqs_.push_back(std::move(e));
    }

    void Program::add_ineq(LinExpr e)
    {
        for (const auto &[v, c] : e.terms)
            check_var(v);
        ineqs_.push_back(std::move(e));
    }

    void Program::add_soc(std::vector<LinExpr> z, LinExpr t)
    {
        for (const auto &ze : z)
            for (const auto &[v, c] : ze.terms)
                check_var(v);
        for (const auto &[v, c] : t.terms)
            check_var(v);
        socs_.push_back(Soc{std::move(z), std::move(t)});
    }

    int Program::add_lmi(int dim)
    {
        if (dim < 1)
            throw std::invalid_argument("conic: LMI dimension must be >= 1");
        Lmi l;
        l.dim = dim;
        lmis_.push_back(std::move(l));
        return static_cast<int>(lmis_.size()) - 1;
    }

    void Program::lmi_entry(int lmi, int r, int c, int var, std::complex<double> coef)
    {
        Lmi &l = lmis_.at(static_cast<std::size_t>(lmi));
        check_var(var);
        if (r < 0 || c < r || c >= l.dim)
            throw std::invalid_argument("conic: LMI entries are specified once with r <= c");
        if (r == c && std::abs(coef.imag()) > HERM_COEF_TOL)
            throw std::invalid_argument("conic: LMI diagonal coefficient must be real");
        if (coef != std::complex<double>(0.0, 0.0))
            l.entries.push_back(LmiEntry{var, r, c, coef});
    }

    void Program::lmi_const(int lmi, int r, int c, std::complex<double> value)
    {
        Lmi &l = lmis_.at(static_cast<std::size_t>(lmi));
        if (r < 0 || c < r || c >= l.dim)
            throw std::invalid_argument("conic: LMI entries are specified once with r <= c");
        if (r == c && std::abs(value.imag()) > HERM_COEF_TOL)
            throw std::invalid_argument("conic: LMI diagonal constant must be real");
        if (value != std::complex<double>(0.0, 0.0))
            l.consts.push_back(LmiConst{r, c, value});
    }

    void Program::obj_term(int var, double coef)
    {
        check_var(var);
        if (coef != 0.0)
            obj_.emplace_back(var, coef);
    }

    void Program::validate() const
    {
        for (const auto &[v, c] : obj_)
        {
            check_var(v);
            if (!std::isfinite(c))
                throw std::invalid_argument("conic: non-finite objective coefficient");
        }
        auto check_expr = [&](const LinExpr &e) {
            if (!std::isfinite(e.constant))
                throw std::invalid_argument("conic: non-finite constant in affine expression");
            for (const auto &[v, c] : e.terms)
            {
                check_var(v);
                if (!std::isfinite(c))
                    throw std::invalid_argument("conic: non-finite coefficient in affine expression");
            }
        };
        for (const auto &e : eqs_)
            check_expr(e);
        for (const auto &e : ineqs_)
            check_expr(e);
        for (const auto &s : socs_)
        {
            if (s.z.empty())
                throw std::invalid_argument("conic: second-order cone needs at least one norm row");
            for (const auto &ze : s.z)
                check_expr(ze);
            check_expr(s.t);
        }
        for (const auto &l : lmis_)
            for (const auto &en : l.entries)
            {
                check_var(en.var);
                if (!std::isfinite(en.coef.real()) || !std::isfinite(en.coef.imag()))
                    throw std::invalid_argument("conic: non-finite LMI coefficient");
            }
    }

    static void dump_expr(std::ostream &os, const LinExpr &e)
    {
        os << e.constant;
        for (const auto &[v, c] : e.terms)
            os << " " << v << ":" << c;
        os << "\n";
    }

    void Program::dump(std::ostream &os) const
    {
        os.precision(17);
        os << "# mapbeam conic program v1\n";
        os << "scalars " << nvars_ << "\n";
        os << "blocks " << blocks_.size() << "\n";
        for (std::size_t i = 0; i < blocks_.size(); i++)
            os << "block " << i << " name " << blocks_[i].name << " dim " << blocks_[i].dim
               << " psd " << (blocks_[i].psd ? 1 : 0) << " offset " << blocks_[i].offset << "\n";
        os << "objective_constant " << obj_constant << "\n";
        os << "objective " << obj_.size() << "\n";
        for (const auto &[v, c] : obj_)
            os << v << " " << c << "\n";
        os << "eq " << eqs_.size() << "\n";
        for (const auto &e : eqs_)
            dump_expr(os, e);
        os << "ineq " << ineqs_.size() << "\n";
        for (const auto &e : ineqs_)
            dump_expr(os, e);
        os << "soc " << socs_.size() << "\n";
        for (const auto &s : socs_)
        {
            os << "cone " << s.z.size() << "\n";
            dump_expr(os, s.t);
            for (const auto &ze : s.z)
                dump_expr(os, ze);
        }
        os << "lmi " << lmis_.size() << "\n";
        for (const auto &l : lmis_)
        {
            os << "matrix " << l.dim << " entries " << l.entries.size() << " consts "
               << l.consts.size() << "\n";
            for (const auto &en : l.entries)
                os << en.r << " " << en.c << " " << en.var << " " << en.coef.real() << " "
                   << en.coef.imag() << "\n";
            for (const auto &cn : l.consts)
                os << cn.r << " " << cn.c << " " << cn.value.real() << " " << cn.value.imag()
                   << "\n";
        }
    }

    const char *to_string(SolveStatus s)
    {
        switch (s)
        {
        case SolveStatus::optimal:
            return "optimal";
        case SolveStatus::infeasible:
            return "infeasible";
        case SolveStatus::unbounded:
            return "unbounded";
        default:
            return "numerical_failure";
        }
    }

    Eigen::MatrixXcd Solution::matrix_value(const Program &p, int blk) const
    {
        const int dim = p.block_dim(blk);
        Eigen::MatrixXcd X(dim, dim);
        for (int i = 0; i < dim; i++)
            X(i, i) = x(p.herm_diag(blk, i));
        for (int i = 0; i < dim; i++)
            for (int j = i + 1; j < dim; j++)
            {
                const auto [re, im] = p.herm_offdiag(blk, i, j);
                X(i, j) = std::complex<double>(x(re), x(im));
                X(j, i) = std::conj(X(i, j));
            }
        return X;
    }

    std::pair<Eigen::VectorXcd, bool> extract_rank_one(const Eigen::MatrixXcd &W,
                                                       double tol_ratio)
    {
        if (W.rows() != W.cols() || W.rows() < 1)
            throw std::invalid_argument("extract_rank_one: matrix must be square");

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (W + W.adjoint()));
        if (es.info() != Eigen::Success)
            throw std::runtime_error("extract_rank_one: eigendecomposition failed");

        const Eigen::VectorXd ev = es.eigenvalues(); // ascending
        const int n = static_cast<int>(W.rows());
        const double lam1 = ev(n - 1);
        const double lam2 = n > 1 ? std::max(ev(n - 2), 0.0) : 0.0;
        const double tr = std::abs(W.trace().real());

        if (lam1 <= 0.0)
        {
            if (tr > 1e-12)
                throw std::runtime_error(
                    "extract_rank_one: no positive eigenvalue on a matrix with nonzero trace");
            return {Eigen::VectorXcd::Zero(n), true};
        }

        Eigen::VectorXcd w = std::sqrt(lam1) * es.eigenvectors().col(n - 1);

        // Canonical global phase: rotate the largest-magnitude entry onto the
        // positive real axis so repeated extractions are reproducible.
        int imax = 0;
        w.cwiseAbs().maxCoeff(&imax);
        if (std::abs(w(imax)) > 0.0)
            w *= std::conj(w(imax)) / std::abs(w(imax));

        return {w, lam2 / lam1 <= tol_ratio};
    }

} // namespace mapb::conic
