#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "helmstack/dense.hpp"

namespace helmstack {

struct EigNonConvergence : std::runtime_error {
  explicit EigNonConvergence(Vec partial_)
      : std::runtime_error("dense_eig: QR iteration did not converge"),
        partial(std::move(partial_)) {}
  Vec partial;
};

namespace detail {

// Unitary plane rotation [[c, s], [-conj(s), c]] with real c that maps
// (f, g) to (r, 0).
inline void givens(cplx f, cplx g, double& c, cplx& s) {
  double af = std::abs(f), ag = std::abs(g);
  if (ag == 0.0) {
    c = 1.0;
    s = cplx(0.0);
    return;
  }
  if (af == 0.0) {
    c = 0.0;
    s = std::conj(g) / ag;
    return;
  }
  double r = std::hypot(af, ag);
  c = af / r;
  s = (f / af) * std::conj(g) / r;
}

inline void hessenberg_reduce(DenseMatrix& A) {
  const int n = A.nrows();
  Vec v(n);
  for (int k = 0; k + 2 < n; ++k) {
    double xnorm = 0.0;
    for (int i = k + 1; i < n; ++i) xnorm += std::norm(A(i, k));
    xnorm = std::sqrt(xnorm);
    if (xnorm == 0.0) continue;
    cplx x0 = A(k + 1, k);
    cplx phase = (x0 == cplx(0.0)) ? cplx(1.0) : x0 / std::abs(x0);
    // v = x + phase*|x| e1, reflecting x onto -phase*|x| e1
    double vnorm2 = 0.0;
    for (int i = k + 1; i < n; ++i) {
      v[i] = A(i, k);
      if (i == k + 1) v[i] += phase * xnorm;
      vnorm2 += std::norm(v[i]);
    }
    if (vnorm2 == 0.0) continue;
    const double beta = 2.0 / vnorm2;
    // left: rows k+1..n-1
    for (int j = k; j < n; ++j) {
      cplx dotv(0.0);
      for (int i = k + 1; i < n; ++i) dotv += std::conj(v[i]) * A(i, j);
      dotv *= beta;
      for (int i = k + 1; i < n; ++i) A(i, j) -= v[i] * dotv;
    }
    // right: cols k+1..n-1
    for (int i = 0; i < n; ++i) {
      cplx dotv(0.0);
      for (int j = k + 1; j < n; ++j) dotv += A(i, j) * v[j];
      dotv *= beta;
      for (int j = k + 1; j < n; ++j) A(i, j) -= dotv * std::conj(v[j]);
    }
  }
}

inline cplx wilkinson_shift(const DenseMatrix& H, int hi) {
  cplx a = H(hi - 1, hi - 1), b = H(hi - 1, hi);
  cplx c = H(hi, hi - 1), d = H(hi, hi);
  cplx tr = a + d, det = a * d - b * c;
  cplx disc = std::sqrt(tr * tr - cplx(4.0) * det);
  cplx l1 = (tr + disc) * 0.5, l2 = (tr - disc) * 0.5;
  return std::abs(l1 - d) < std::abs(l2 - d) ? l1 : l2;
}

}  // namespace detail

/// Eigenvalues of a general complex matrix: Householder reduction to upper
/// Hessenberg followed by single-shift QR with Wilkinson shifts. Returned
/// unordered. Throws EigNonConvergence (carrying the part already deflated)
/// after 50 n sweeps.
inline Vec dense_eig(DenseMatrix A) {
  const int n = A.nrows();
  if (n != A.ncols())
    throw std::invalid_argument("dense_eig: matrix must be square");
  Vec eigs;
  if (n == 0) return eigs;
  detail::hessenberg_reduce(A);
  const double eps = 1e-15;
  int hi = n - 1;
  long sweeps = 0;
  const long max_sweeps = 50L * n + 100;
  int stall = 0;
  while (hi >= 0) {
    if (hi == 0) {
      eigs.push_back(A(0, 0));
      break;
    }
    // deflate negligible subdiagonals from the bottom
    if (std::abs(A(hi, hi - 1)) <=
        eps * (std::abs(A(hi - 1, hi - 1)) + std::abs(A(hi, hi)))) {
      eigs.push_back(A(hi, hi));
      --hi;
      stall = 0;
      continue;
    }
    // active irreducible block [lo, hi]
    int lo = hi;
    while (lo > 0 &&
           std::abs(A(lo, lo - 1)) >
               eps * (std::abs(A(lo - 1, lo - 1)) + std::abs(A(lo, lo))))
      --lo;
    if (++sweeps > max_sweeps) throw EigNonConvergence(std::move(eigs));
    cplx shift = detail::wilkinson_shift(A, hi);
    if (++stall % 12 == 0) {
      // exceptional shift to break symmetric stagnation
      shift = A(hi, hi) + cplx(std::abs(A(hi, hi - 1)), 0.0) * 1.1;
    }
    for (int i = lo; i <= hi; ++i) A(i, i) -= shift;
    std::vector<double> cs(hi - lo);
    Vec sn(hi - lo);
    for (int i = lo; i < hi; ++i) {
      double c;
      cplx s;
      detail::givens(A(i, i), A(i + 1, i), c, s);
      cs[i - lo] = c;
      sn[i - lo] = s;
      for (int j = i; j <= hi; ++j) {
        cplx a = A(i, j), b = A(i + 1, j);
        A(i, j) = c * a + s * b;
        A(i + 1, j) = -std::conj(s) * a + c * b;
      }
      A(i + 1, i) = cplx(0.0);  // exact by construction
    }
    for (int i = lo; i < hi; ++i) {
      double c = cs[i - lo];
      cplx s = sn[i - lo];
      int rlast = std::min(i + 1, hi);
      for (int r = lo; r <= rlast; ++r) {
        cplx a = A(r, i), b = A(r, i + 1);
        A(r, i) = c * a + std::conj(s) * b;
        A(r, i + 1) = -s * a + c * b;
      }
    }
    for (int i = lo; i <= hi; ++i) A(i, i) += shift;
  }
  return eigs;
}

struct PowerMethodResult {
  double radius = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Largest-magnitude eigenvalue estimate of a linear operator given only its
/// matvec. Deterministic for a fixed seed.
inline PowerMethodResult power_method(
    const std::function<Vec(const Vec&)>& op, int n, double tol = 1e-4,
    int max_iter = 500, unsigned seed = 1234) {
  PowerMethodResult res;
  if (n < 1) throw std::invalid_argument("power_method: n must be positive");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v(n);
  for (auto& x : v) x = cplx(u(rng), u(rng));
  double nv = norm2(v);
  for (auto& x : v) x /= nv;
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    Vec w = op(v);
    double nw = norm2(w);
    res.iterations = it;
    res.radius = nw;
    if (nw == 0.0) {
      res.converged = true;
      return res;  // zero operator
    }
    if (it > 1 && std::abs(nw - prev) < tol * std::max(1.0, nw)) {
      res.converged = true;
      return res;
    }
    prev = nw;
    for (int i = 0; i < n; ++i) v[i] = w[i] / nw;
  }
  return res;
}

}  // namespace helmstack
