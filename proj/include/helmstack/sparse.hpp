#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "helmstack/flops.hpp"

namespace helmstack {

using cplx = std::complex<double>;
using Vec = std::vector<cplx>;

/// Compressed sparse row matrix over complex doubles. Column indices are
/// strictly increasing within each row and exact zeros are dropped at
/// finalize. Immutable once built; every assembled operator in the solver
/// (blocks, gradients, intergrid, commutators) uses this representation.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int nrows, int ncols, std::vector<int> row_ptr,
               std::vector<int> col_idx, Vec values)
      : nrows_(nrows),
        ncols_(ncols),
        row_ptr_(std::move(row_ptr)),
        col_idx_(std::move(col_idx)),
        vals_(std::move(values)) {}

  static SparseMatrix identity(int n) {
    std::vector<int> rp(n + 1), ci(n);
    Vec v(n, cplx(1.0));
    for (int i = 0; i <= n; ++i) rp[i] = i;
    for (int i = 0; i < n; ++i) ci[i] = i;
    return SparseMatrix(n, n, std::move(rp), std::move(ci), std::move(v));
  }

  static SparseMatrix diagonal(const Vec& d) {
    int n = static_cast<int>(d.size());
    std::vector<int> rp(n + 1), ci;
    Vec v;
    ci.reserve(n);
    v.reserve(n);
    int k = 0;
    for (int i = 0; i < n; ++i) {
      rp[i] = k;
      if (d[i] != cplx(0.0)) {
        ci.push_back(i);
        v.push_back(d[i]);
        ++k;
      }
    }
    rp[n] = k;
    return SparseMatrix(n, n, std::move(rp), std::move(ci), std::move(v));
  }

  int nrows() const { return nrows_; }
  int ncols() const { return ncols_; }
  std::int64_t nnz() const { return row_ptr_.empty() ? 0 : row_ptr_[nrows_]; }

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const Vec& values() const { return vals_; }

  /// Entry lookup by binary search; zero when not stored.
  cplx at(int i, int j) const {
    const int* lo = col_idx_.data() + row_ptr_[i];
    const int* hi = col_idx_.data() + row_ptr_[i + 1];
    const int* it = std::lower_bound(lo, hi, j);
    if (it != hi && *it == j) return vals_[it - col_idx_.data()];
    return cplx(0.0);
  }

  /// y = A x. Charges nnz(A) to *counter when given.
  void apply(std::span<const cplx> x, std::span<cplx> y,
             std::uint64_t* counter = nullptr) const {
    if (static_cast<int>(x.size()) != ncols_ ||
        static_cast<int>(y.size()) != nrows_)
      throw std::invalid_argument("spmv: dimension mismatch");
    for (int i = 0; i < nrows_; ++i) {
      cplx s(0.0);
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
        s += vals_[k] * x[col_idx_[k]];
      y[i] = s;
    }
    if (counter) *counter += static_cast<std::uint64_t>(nnz());
  }

  Vec apply(std::span<const cplx> x, std::uint64_t* counter = nullptr) const {
    Vec y(nrows_);
    apply(x, y, counter);
    return y;
  }

  SparseMatrix transpose() const {
    std::vector<int> rp(ncols_ + 1, 0);
    for (int k = 0; k < nnz(); ++k) rp[col_idx_[k] + 1]++;
    for (int j = 0; j < ncols_; ++j) rp[j + 1] += rp[j];
    std::vector<int> ci(nnz());
    Vec v(nnz());
    std::vector<int> next(rp.begin(), rp.end() - 1);
    for (int i = 0; i < nrows_; ++i)
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        int p = next[col_idx_[k]]++;
        ci[p] = i;
        v[p] = vals_[k];
      }
    return SparseMatrix(ncols_, nrows_, std::move(rp), std::move(ci),
                        std::move(v));
  }

  /// Sparse product this * B (classic CSR row-merge with dense workspace).
  SparseMatrix multiply(const SparseMatrix& B) const {
    if (ncols_ != B.nrows())
      throw std::invalid_argument("sparse multiply: dimension mismatch");
    std::vector<int> rp(nrows_ + 1, 0), marker(B.ncols(), -1);
    std::vector<int> ci;
    Vec acc(B.ncols(), cplx(0.0));
    Vec v;
    for (int i = 0; i < nrows_; ++i) {
      std::vector<int> cols;
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        int j = col_idx_[k];
        cplx a = vals_[k];
        for (int l = B.row_ptr_[j]; l < B.row_ptr_[j + 1]; ++l) {
          int c = B.col_idx_[l];
          if (marker[c] != i) {
            marker[c] = i;
            acc[c] = cplx(0.0);
            cols.push_back(c);
          }
          acc[c] += a * B.vals_[l];
        }
      }
      std::sort(cols.begin(), cols.end());
      for (int c : cols) {
        if (acc[c] == cplx(0.0)) continue;
        ci.push_back(c);
        v.push_back(acc[c]);
      }
      rp[i + 1] = static_cast<int>(ci.size());
    }
    return SparseMatrix(nrows_, B.ncols(), std::move(rp), std::move(ci),
                        std::move(v));
  }

  /// alpha*this + beta*B, same shape.
  SparseMatrix add(const SparseMatrix& B, cplx alpha = cplx(1.0),
                   cplx beta = cplx(1.0)) const {
    if (nrows_ != B.nrows_ || ncols_ != B.ncols_)
      throw std::invalid_argument("sparse add: shape mismatch");
    std::vector<int> rp(nrows_ + 1, 0), ci;
    Vec v;
    for (int i = 0; i < nrows_; ++i) {
      int ka = row_ptr_[i], kb = B.row_ptr_[i];
      int ea = row_ptr_[i + 1], eb = B.row_ptr_[i + 1];
      while (ka < ea || kb < eb) {
        int ja = ka < ea ? col_idx_[ka] : ncols_;
        int jb = kb < eb ? B.col_idx_[kb] : ncols_;
        cplx val;
        int j;
        if (ja == jb) {
          val = alpha * vals_[ka++] + beta * B.vals_[kb++];
          j = ja;
        } else if (ja < jb) {
          val = alpha * vals_[ka++];
          j = ja;
        } else {
          val = beta * B.vals_[kb++];
          j = jb;
        }
        if (val != cplx(0.0)) {
          ci.push_back(j);
          v.push_back(val);
        }
      }
      rp[i + 1] = static_cast<int>(ci.size());
    }
    return SparseMatrix(nrows_, ncols_, std::move(rp), std::move(ci),
                        std::move(v));
  }

  SparseMatrix scaled(cplx s) const {
    SparseMatrix out = *this;
    for (auto& x : out.vals_) x *= s;
    return out;
  }

  /// Right scaling A * diag(d).
  SparseMatrix scale_cols(const Vec& d) const {
    assert(static_cast<int>(d.size()) == ncols_);
    SparseMatrix out = *this;
    for (int k = 0; k < nnz(); ++k) out.vals_[k] *= d[col_idx_[k]];
    return out;
  }

  /// Left scaling diag(d) * A.
  SparseMatrix scale_rows(const Vec& d) const {
    assert(static_cast<int>(d.size()) == nrows_);
    SparseMatrix out = *this;
    for (int i = 0; i < nrows_; ++i)
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) out.vals_[k] *= d[i];
    return out;
  }

  Vec diag() const {
    Vec d(std::min(nrows_, ncols_), cplx(0.0));
    for (int i = 0; i < static_cast<int>(d.size()); ++i) d[i] = at(i, i);
    return d;
  }

  double frob_norm() const {
    double s = 0.0;
    for (const cplx& v : vals_) s += std::norm(v);
    return std::sqrt(s);
  }

 private:
  int nrows_ = 0, ncols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  Vec vals_;
};

/// Coordinate-format accumulator; duplicates are summed at build.
class TripletBuilder {
 public:
  TripletBuilder(int nrows, int ncols) : nrows_(nrows), ncols_(ncols) {}

  void add(int i, int j, cplx v) {
    assert(i >= 0 && i < nrows_ && j >= 0 && j < ncols_);
    entries_.push_back({i, j, v});
  }

  SparseMatrix build() const {
    struct JV {
      int j;
      cplx v;
    };
    std::vector<std::vector<JV>> rows(nrows_);
    for (const auto& e : entries_) rows[e.i].push_back({e.j, e.v});
    std::vector<int> out_rp(nrows_ + 1, 0), ci;
    Vec v;
    for (int i = 0; i < nrows_; ++i) {
      auto& r = rows[i];
      std::sort(r.begin(), r.end(),
                [](const JV& a, const JV& b) { return a.j < b.j; });
      int k = 0;
      while (k < static_cast<int>(r.size())) {
        int j = r[k].j;
        cplx s(0.0);
        while (k < static_cast<int>(r.size()) && r[k].j == j) s += r[k++].v;
        if (s != cplx(0.0)) {
          ci.push_back(j);
          v.push_back(s);
        }
      }
      out_rp[i + 1] = static_cast<int>(ci.size());
    }
    return SparseMatrix(nrows_, ncols_, std::move(out_rp), std::move(ci),
                        std::move(v));
  }

 private:
  struct Entry {
    int i, j;
    cplx v;
  };
  int nrows_, ncols_;
  std::vector<Entry> entries_;
};

/// Galerkin triple product R A P as two exact sparse products.
inline SparseMatrix triple_product(const SparseMatrix& R, const SparseMatrix& A,
                                   const SparseMatrix& P) {
  return R.multiply(A).multiply(P);
}

/// Kronecker product acting on x-fastest vectors: the result maps
/// in[if + jf*ncols(rx)] to out[ic + jc*nrows(rx)], i.e. rx acts along the
/// fast (x) axis and ry along the slow (y) axis.
inline SparseMatrix kron1d(const SparseMatrix& rx, const SparseMatrix& ry) {
  TripletBuilder t(rx.nrows() * ry.nrows(), rx.ncols() * ry.ncols());
  for (int jc = 0; jc < ry.nrows(); ++jc)
    for (int ky = ry.row_ptr()[jc]; ky < ry.row_ptr()[jc + 1]; ++ky) {
      int jf = ry.col_idx()[ky];
      cplx wy = ry.values()[ky];
      for (int ic = 0; ic < rx.nrows(); ++ic)
        for (int kx = rx.row_ptr()[ic]; kx < rx.row_ptr()[ic + 1]; ++kx)
          t.add(ic + jc * rx.nrows(), rx.col_idx()[kx] + jf * rx.ncols(),
                rx.values()[kx] * wy);
    }
  return t.build();
}

inline SparseMatrix kron1d(const SparseMatrix& rx, const SparseMatrix& ry,
                           const SparseMatrix& rz) {
  return kron1d(kron1d(rx, ry), rz);
}

/// Block-diagonal concatenation.
inline SparseMatrix block_diag(const std::vector<const SparseMatrix*>& blocks) {
  int nr = 0, nc = 0;
  for (const auto* b : blocks) {
    nr += b->nrows();
    nc += b->ncols();
  }
  TripletBuilder t(nr, nc);
  int ro = 0, co = 0;
  for (const auto* b : blocks) {
    for (int i = 0; i < b->nrows(); ++i)
      for (int k = b->row_ptr()[i]; k < b->row_ptr()[i + 1]; ++k)
        t.add(ro + i, co + b->col_idx()[k], b->values()[k]);
    ro += b->nrows();
    co += b->ncols();
  }
  return t.build();
}

// small vector helpers used throughout

inline double norm2(std::span<const cplx> x) {
  double s = 0.0;
  for (const cplx& v : x) s += std::norm(v);
  return std::sqrt(s);
}

inline cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  cplx s(0.0);
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace helmstack
