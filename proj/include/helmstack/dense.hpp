#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "helmstack/sparse.hpp"

namespace helmstack {

/// Row-major dense complex matrix for coarse solves and spectral analysis.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int nrows, int ncols)
      : nrows_(nrows), ncols_(ncols), vals_(std::size_t(nrows) * ncols) {}

  static DenseMatrix identity(int n) {
    DenseMatrix I(n, n);
    for (int i = 0; i < n; ++i) I(i, i) = cplx(1.0);
    return I;
  }

  static DenseMatrix from_sparse(const SparseMatrix& A) {
    DenseMatrix D(A.nrows(), A.ncols());
    for (int i = 0; i < A.nrows(); ++i)
      for (int k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k)
        D(i, A.col_idx()[k]) = A.values()[k];
    return D;
  }

  int nrows() const { return nrows_; }
  int ncols() const { return ncols_; }

  cplx& operator()(int i, int j) { return vals_[std::size_t(i) * ncols_ + j]; }
  cplx operator()(int i, int j) const {
    return vals_[std::size_t(i) * ncols_ + j];
  }

  Vec apply(std::span<const cplx> x) const {
    Vec y(nrows_, cplx(0.0));
    for (int i = 0; i < nrows_; ++i) {
      cplx s(0.0);
      const cplx* row = &vals_[std::size_t(i) * ncols_];
      for (int j = 0; j < ncols_; ++j) s += row[j] * x[j];
      y[i] = s;
    }
    return y;
  }

  DenseMatrix multiply(const DenseMatrix& B) const {
    DenseMatrix C(nrows_, B.ncols_);
    for (int i = 0; i < nrows_; ++i)
      for (int k = 0; k < ncols_; ++k) {
        cplx a = (*this)(i, k);
        if (a == cplx(0.0)) continue;
        for (int j = 0; j < B.ncols_; ++j) C(i, j) += a * B(k, j);
      }
    return C;
  }

  double max_abs() const {
    double m = 0.0;
    for (const cplx& v : vals_) m = std::max(m, std::abs(v));
    return m;
  }

  double frob_norm() const {
    double s = 0.0;
    for (const cplx& v : vals_) s += std::norm(v);
    return std::sqrt(s);
  }

 private:
  int nrows_ = 0, ncols_ = 0;
  Vec vals_;
};

/// Dense LU with partial pivoting. Factorization refuses pivots below
/// 1e-14 * max|A| (numerically singular input).
class DenseLU {
 public:
  explicit DenseLU(DenseMatrix A) : lu_(std::move(A)), piv_(lu_.nrows()) {
    if (lu_.nrows() != lu_.ncols())
      throw std::invalid_argument("dense_lu: matrix must be square");
    const int n = lu_.nrows();
    const double tol = 1e-14 * std::max(lu_.max_abs(), 1e-300);
    det_ = cplx(1.0);
    for (int k = 0; k < n; ++k) {
      int p = k;
      double best = std::abs(lu_(k, k));
      for (int i = k + 1; i < n; ++i) {
        double a = std::abs(lu_(i, k));
        if (a > best) {
          best = a;
          p = i;
        }
      }
      if (best < tol) throw std::runtime_error("dense_lu: singular pivot");
      piv_[k] = p;
      if (p != k) {
        for (int j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
        det_ = -det_;
      }
      det_ *= lu_(k, k);
      const cplx inv = cplx(1.0) / lu_(k, k);
      for (int i = k + 1; i < n; ++i) {
        cplx m = lu_(i, k) * inv;
        lu_(i, k) = m;
        if (m == cplx(0.0)) continue;
        for (int j = k + 1; j < n; ++j) lu_(i, j) -= m * lu_(k, j);
      }
    }
  }

  int size() const { return lu_.nrows(); }
  cplx determinant() const { return det_; }

  Vec solve(std::span<const cplx> b) const {
    const int n = lu_.nrows();
    Vec x(b.begin(), b.end());
    // rows were swapped in full during factorization, so permute first
    for (int k = 0; k < n; ++k)
      if (piv_[k] != k) std::swap(x[k], x[piv_[k]]);
    for (int k = 0; k < n; ++k)
      for (int i = k + 1; i < n; ++i) x[i] -= lu_(i, k) * x[k];
    for (int i = n - 1; i >= 0; --i) {
      for (int j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
      x[i] /= lu_(i, i);
    }
    return x;
  }

 private:
  DenseMatrix lu_;
  std::vector<int> piv_;
  cplx det_;
};

inline DenseLU dense_lu(DenseMatrix A) { return DenseLU(std::move(A)); }

inline Vec dense_solve(const DenseLU& f, std::span<const cplx> b) {
  return f.solve(b);
}

}  // namespace helmstack
