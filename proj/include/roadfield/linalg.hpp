// Tridiagonal and bordered ("arrowhead") linear solves used throughout the
// finite-difference code. All solvers are allocation-free on the solve path
// once factored, so they can be reused across many right-hand sides.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "roadfield/params.hpp"

namespace roadfield {

// Thomas factorization of a tridiagonal matrix (sub, diag, super).
// Factor once, then solve repeatedly; solve overwrites the rhs.
template <typename T>
class TridiagFactor {
public:
    TridiagFactor() = default;

    TridiagFactor(std::vector<T> sub, const std::vector<T>& diag, const std::vector<T>& super)
        : sub_(std::move(sub)), cp_(diag.size()), inv_beta_(diag.size()) {
        const std::size_t n = diag.size();
        if (sub_.size() != n || super.size() != n)
            throw std::invalid_argument("tridiag: band sizes must match (sub[0] and super[n-1] unused)");
        T beta = diag[0];
        if (beta == T(0)) throw NumericalFailure("tridiag: zero pivot at row 0");
        inv_beta_[0] = T(1) / beta;
        cp_[0] = super[0] * inv_beta_[0];
        for (std::size_t i = 1; i < n; ++i) {
            beta = diag[i] - sub_[i] * cp_[i - 1];
            if (beta == T(0)) throw NumericalFailure("tridiag: zero pivot at row " + std::to_string(i));
            inv_beta_[i] = T(1) / beta;
            cp_[i] = super[i] * inv_beta_[i];
        }
    }

    std::size_t size() const { return cp_.size(); }

    void solve(T* rhs) const {
        const std::size_t n = cp_.size();
        rhs[0] *= inv_beta_[0];
        for (std::size_t i = 1; i < n; ++i)
            rhs[i] = (rhs[i] - sub_[i] * rhs[i - 1]) * inv_beta_[i];
        for (std::size_t i = n - 1; i-- > 0;)
            rhs[i] -= cp_[i] * rhs[i + 1];
    }

    void solve(std::vector<T>& rhs) const { solve(rhs.data()); }

    // Simultaneous solve for `lanes` right-hand sides stored interleaved as
    // rhs[row * lanes + lane]; all lanes share the factored matrix.
    void solve_block(T* rhs, std::size_t rows, std::size_t lanes) const {
        if (rows != cp_.size()) throw std::invalid_argument("tridiag: block row count mismatch");
        for (std::size_t l = 0; l < lanes; ++l) rhs[l] *= inv_beta_[0];
        for (std::size_t i = 1; i < rows; ++i) {
            T* cur = rhs + i * lanes;
            const T* prev = cur - lanes;
            const T a = sub_[i], ib = inv_beta_[i];
            for (std::size_t l = 0; l < lanes; ++l) cur[l] = (cur[l] - a * prev[l]) * ib;
        }
        for (std::size_t i = rows - 1; i-- > 0;) {
            T* cur = rhs + i * lanes;
            const T* next = cur + lanes;
            const T cp = cp_[i];
            for (std::size_t l = 0; l < lanes; ++l) cur[l] -= cp * next[l];
        }
    }

private:
    std::vector<T> sub_, cp_, inv_beta_;
};

using TridiagFactorD = TridiagFactor<double>;
using TridiagFactorZ = TridiagFactor<std::complex<double>>;

// Solver for an (n+1) x (n+1) system whose leading n x n block is
// tridiagonal apart from an optional rank-one patch row_index/patch
// (entries added to one row), bordered by a dense last column, a dense
// last row, and a scalar corner:
//
//   [ T + e_k p^T   col ] [ x ]   [ b  ]
//   [    row^T    corner] [ s ] = [ bs ]
//
// The matrix is fixed at construction; solves cost O(n) each.
class ArrowheadSolver {
public:
    ArrowheadSolver(std::vector<double> sub, const std::vector<double>& diag,
                    const std::vector<double>& super,
                    std::vector<double> col, std::vector<double> row, double corner,
                    std::ptrdiff_t patch_row = -1, std::vector<double> patch = {})
        : t0_(std::move(sub), diag, super),
          col_(std::move(col)), row_(std::move(row)),
          patch_row_(patch_row), patch_(std::move(patch)) {
        const std::size_t n = t0_.size();
        if (col_.size() != n || row_.size() != n)
            throw std::invalid_argument("arrowhead: border sizes must match");
        if (patch_row_ >= 0) {
            if (patch_.size() != n) throw std::invalid_argument("arrowhead: patch size must match");
            ek_solve_.assign(n, 0.0);
            ek_solve_[static_cast<std::size_t>(patch_row_)] = 1.0;
            t0_.solve(ek_solve_);
            double denom = 1.0 + dot(patch_, ek_solve_);
            if (denom == 0.0) throw NumericalFailure("arrowhead: singular rank-one patch");
            inv_patch_denom_ = 1.0 / denom;
        }
        q_ = col_;
        block_solve(q_.data());
        double schur = corner - dot(row_, q_);
        if (schur == 0.0) throw NumericalFailure("arrowhead: singular border Schur complement");
        inv_schur_ = 1.0 / schur;
    }

    std::size_t size() const { return t0_.size(); }

    // Solves in place: b (length n) and scalar bs.
    void solve(double* b, double& bs) const {
        block_solve(b);
        const double s = (bs - dot(row_, b)) * inv_schur_;
        const std::size_t n = t0_.size();
        for (std::size_t i = 0; i < n; ++i) b[i] -= s * q_[i];
        bs = s;
    }

private:
    static double dot(const std::vector<double>& a, const double* b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
        return acc;
    }
    static double dot(const std::vector<double>& a, const std::vector<double>& b) { return dot(a, b.data()); }

    // (T + e_k p^T)^{-1} b via Sherman-Morrison on the Thomas factor.
    void block_solve(double* b) const {
        t0_.solve(b);
        if (patch_row_ >= 0) {
            const double scale = dot(patch_, b) * inv_patch_denom_;
            for (std::size_t i = 0; i < ek_solve_.size(); ++i) b[i] -= scale * ek_solve_[i];
        }
    }

    TridiagFactorD t0_;
    std::vector<double> col_, row_;
    std::ptrdiff_t patch_row_ = -1;
    std::vector<double> patch_;
    std::vector<double> ek_solve_; // T^{-1} e_k
    double inv_patch_denom_ = 0.0;
    std::vector<double> q_; // full-block solve of col
    double inv_schur_ = 0.0;
};

} // namespace roadfield
