#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "helmstack/flops.hpp"
#include "helmstack/sparse.hpp"

namespace helmstack {

using LinOp = std::function<Vec(std::span<const cplx>)>;

struct KrylovConfig {
  int restart = 0;        // 0 = non-restarted (full Krylov space)
  double tol = 1e-6;      // relative-residual target
  int max_iters = 2000;   // total preconditioner applications
  bool flexible = false;  // store preconditioned basis vectors
  double* ortho_defect = nullptr;  // optional: max |<v_i, v_j>| probe, i != j
};

struct SolverReport {
  bool converged = false;
  int iterations = 0;  // preconditioner applications inside Arnoldi
  std::vector<double> residual_history;  // relative residuals per iteration
  double final_relres = 0.0;  // independently recomputed at exit
  FlopLedger flops;
  double wall_time = 0.0;  // seconds
};

namespace detail {

inline double true_relres(const LinOp& A, std::span<const cplx> x,
                          std::span<const cplx> b, double bnorm) {
  Vec r = A(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return norm2(r) / bnorm;
}

}  // namespace detail

/// Right-preconditioned (F)GMRES with modified Gram-Schmidt Arnoldi and a
/// second orthogonalization pass when cancellation is detected. Residuals
/// are tracked by the Givens recurrence; convergence is always confirmed on
/// the true residual of the original system. The flexible variant stores
/// the preconditioned basis; for a fixed linear preconditioner both produce
/// the same iterates.
inline SolverReport gmres_solve(const LinOp& A, const LinOp& M, Vec& x,
                                std::span<const cplx> b,
                                const KrylovConfig& cfg,
                                FlopLedger* ledger = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  const long n = static_cast<long>(b.size());
  SolverReport rep;
  if (cfg.tol <= 0.0 || cfg.restart < 0)
    throw std::invalid_argument("gmres: bad configuration");
  if (x.empty()) x.assign(n, cplx(0.0));
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    x.assign(n, cplx(0.0));
    rep.converged = true;
    rep.residual_history.push_back(0.0);
    return rep;
  }
  const int mdim = cfg.restart > 0 ? cfg.restart
                                   : std::min<long>(cfg.max_iters, n);
  auto precond = [&](std::span<const cplx> v) {
    ++rep.iterations;
    return M ? M(v) : Vec(v.begin(), v.end());
  };

  bool done = false;
  while (!done && rep.iterations < cfg.max_iters) {
    // (re)start from the true residual
    Vec r = A(x);
    for (long i = 0; i < n; ++i) r[i] = b[i] - r[i];
    double beta = norm2(r);
    if (beta / bnorm < cfg.tol) {
      done = true;
      rep.converged = true;
      break;
    }
    std::vector<Vec> V, Z;
    V.reserve(mdim + 1);
    if (cfg.flexible) Z.reserve(mdim);
    Vec v0 = r;
    for (auto& c : v0) c /= beta;
    V.push_back(std::move(v0));

    std::vector<Vec> Hcols;          // Hessenberg columns (j+2 entries)
    std::vector<double> gc(mdim);    // Givens cosines
    Vec gs(mdim);                    // Givens sines
    Vec g(mdim + 1, cplx(0.0));      // rotated rhs
    g[0] = cplx(beta);
    int k = 0;
    bool happy = false;
    for (int j = 0; j < mdim && rep.iterations < cfg.max_iters; ++j) {
      Vec z = precond(V[j]);
      Vec w = A(z);
      if (cfg.flexible) Z.push_back(std::move(z));
      double wnorm_before = norm2(w);
      Vec hj(j + 2, cplx(0.0));
      for (int i = 0; i <= j; ++i) {
        cplx hij = dot(V[i], w);
        hj[i] = hij;
        axpy(-hij, V[i], w);
      }
      if (norm2(w) < 0.7 * wnorm_before) {
        for (int i = 0; i <= j; ++i) {  // one reorthogonalization pass
          cplx c = dot(V[i], w);
          hj[i] += c;
          axpy(-c, V[i], w);
        }
      }
      double hnext = norm2(w);
      hj[j + 1] = cplx(hnext);
      // apply accumulated rotations, then a new one to annihilate hj[j+1]
      for (int i = 0; i < j; ++i) {
        cplx a = hj[i], bb = hj[i + 1];
        hj[i] = gc[i] * a + gs[i] * bb;
        hj[i + 1] = -std::conj(gs[i]) * a + gc[i] * bb;
      }
      {
        cplx f = hj[j], h2 = hj[j + 1];
        double af = std::abs(f), ah = std::abs(h2);
        double rr = std::hypot(af, ah);
        if (rr == 0.0) {
          gc[j] = 1.0;
          gs[j] = cplx(0.0);
        } else if (af == 0.0) {
          gc[j] = 0.0;
          gs[j] = std::conj(h2) / ah;
        } else {
          gc[j] = af / rr;
          gs[j] = (f / af) * std::conj(h2) / rr;
        }
        hj[j] = gc[j] * f + gs[j] * h2;
        hj[j + 1] = cplx(0.0);
        cplx ga = g[j];
        g[j] = gc[j] * ga;
        g[j + 1] = -std::conj(gs[j]) * ga;
      }
      Hcols.push_back(std::move(hj));
      k = j + 1;
      double est = std::abs(g[j + 1]) / bnorm;
      rep.residual_history.push_back(est);
      if (hnext < 1e-14 * bnorm) {  // happy breakdown: subspace is invariant
        happy = true;
        break;
      }
      if (est < cfg.tol) break;  // candidate convergence; confirm below
      if (hnext > 0.0) {
        Vec vnext = w;
        for (auto& c : vnext) c /= hnext;
        if (cfg.ortho_defect)
          for (int i = 0; i <= j; ++i)
            *cfg.ortho_defect =
                std::max(*cfg.ortho_defect, std::abs(dot(V[i], vnext)));
        V.push_back(std::move(vnext));
      }
    }
    if (k == 0) break;  // no progress possible
    // solve the k x k triangular system
    Vec y(k);
    for (int i = k - 1; i >= 0; --i) {
      cplx s = g[i];
      for (int j2 = i + 1; j2 < k; ++j2) s -= Hcols[j2][i] * y[j2];
      y[i] = s / Hcols[i][i];
    }
    // x += M^{-1} (V y) (or Z y in the flexible variant)
    if (cfg.flexible) {
      for (int j2 = 0; j2 < k; ++j2) axpy(y[j2], Z[j2], x);
    } else {
      Vec vy(n, cplx(0.0));
      for (int j2 = 0; j2 < k; ++j2) axpy(y[j2], V[j2], vy);
      Vec corr = M ? M(vy) : vy;  // reconstruction; not counted
      axpy(cplx(1.0), corr, x);
    }
    double relres = detail::true_relres(A, x, b, bnorm);
    if (!rep.residual_history.empty()) rep.residual_history.back() = relres;
    if (relres < cfg.tol || happy) {
      rep.converged = relres < cfg.tol || relres < 1e-12;
      done = rep.converged;
      if (happy) done = true;
    }
    if (cfg.restart == 0 && !done) break;  // full space exhausted
  }
  rep.final_relres = detail::true_relres(A, x, b, bnorm);
  if (rep.final_relres < cfg.tol) rep.converged = true;
  if (ledger) rep.flops = *ledger;
  rep.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

inline SolverReport fgmres_solve(const LinOp& A, const LinOp& M, Vec& x,
                                 std::span<const cplx> b, KrylovConfig cfg,
                                 FlopLedger* ledger = nullptr) {
  cfg.flexible = true;
  return gmres_solve(A, M, x, b, cfg, ledger);
}

/// Residual history as "iter,relres" lines.
inline std::string residual_csv(const SolverReport& rep) {
  std::string out = "iter,relres\n";
  for (std::size_t i = 0; i < rep.residual_history.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6e", rep.residual_history[i]);
    out += buf;
    out += '\n';
  }
  return out;
}

}  // namespace helmstack
