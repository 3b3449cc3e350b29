#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "helmstack/banded.hpp"
#include "helmstack/dense.hpp"
#include "helmstack/discretize.hpp"
#include "helmstack/flops.hpp"
#include "helmstack/sparse.hpp"

namespace helmstack {

/// 1D restriction stencils; the coarse point sits under the marked center
/// of each stencil.
enum class Restrict1D { Nodal121, Cell1331, Cell11 };

/// One row per coarse point; boundary rows drop out-of-range fine weights
/// without renormalization (Galerkin coarsening absorbs the scaling).
inline SparseMatrix build_restriction_1d(Restrict1D kind, int fine_size) {
  SparseMatrix out;
  switch (kind) {
    case Restrict1D::Nodal121: {
      if (fine_size < 3 || fine_size % 2 == 0)
        throw std::invalid_argument(
            "restriction: nodal size must be odd (cells even)");
      const int coarse = (fine_size + 1) / 2;
      TripletBuilder tb(coarse, fine_size);
      for (int j = 0; j < coarse; ++j) {
        int f = 2 * j;
        if (f - 1 >= 0) tb.add(j, f - 1, cplx(0.25));
        tb.add(j, f, cplx(0.5));
        if (f + 1 < fine_size) tb.add(j, f + 1, cplx(0.25));
      }
      out = tb.build();
      break;
    }
    case Restrict1D::Cell1331: {
      if (fine_size < 2 || fine_size % 2 != 0)
        throw std::invalid_argument("restriction: cell size must be even");
      const int coarse = fine_size / 2;
      TripletBuilder tb(coarse, fine_size);
      const double w[4] = {0.125, 0.375, 0.375, 0.125};
      for (int j = 0; j < coarse; ++j)
        for (int s = 0; s < 4; ++s) {
          int f = 2 * j - 1 + s;
          if (f >= 0 && f < fine_size) tb.add(j, f, cplx(w[s]));
        }
      out = tb.build();
      break;
    }
    case Restrict1D::Cell11: {
      if (fine_size < 2 || fine_size % 2 != 0)
        throw std::invalid_argument("restriction: cell size must be even");
      const int coarse = fine_size / 2;
      TripletBuilder tb(coarse, fine_size);
      for (int j = 0; j < coarse; ++j) {
        tb.add(j, 2 * j, cplx(0.5));
        tb.add(j, 2 * j + 1, cplx(0.5));
      }
      out = tb.build();
      break;
    }
  }
  return out;
}

/// Restriction for one field on grid g. component in 0..dim-1 selects a
/// displacement family (nodal along its own axis), component = -1 the
/// cell-centered pressure. mixed = true swaps every cell-centered factor
/// for the cheap two-point mean (the monolithic-restriction variant).
inline SparseMatrix build_field_restriction(const Grid& g, int component,
                                            bool mixed = false) {
  std::vector<SparseMatrix> r1d;
  for (int a = 0; a < g.dim; ++a) {
    if (a == component)
      r1d.push_back(
          build_restriction_1d(Restrict1D::Nodal121, g.nc[a] + 1));
    else
      r1d.push_back(build_restriction_1d(
          mixed ? Restrict1D::Cell11 : Restrict1D::Cell1331, g.nc[a]));
  }
  SparseMatrix R = r1d[0];
  for (int a = 1; a < g.dim; ++a) R = kron1d(R, r1d[a]);
  return R;
}

/// Prolongation is always twice the transposed full-weighting restriction,
/// for the mixed monolithic variant too.
inline SparseMatrix build_field_prolongation(const Grid& g, int component) {
  return build_field_restriction(g, component, false).transpose().scaled(
      cplx(2.0));
}

/// Monolithic intergrid over the full (n + m) mixed layout.
inline SparseMatrix build_monolithic_restriction(const Grid& g) {
  std::vector<SparseMatrix> parts;
  for (int c = 0; c < g.dim; ++c)
    parts.push_back(build_field_restriction(g, c, true));
  parts.push_back(build_field_restriction(g, -1, true));
  std::vector<const SparseMatrix*> ptrs;
  for (const auto& p : parts) ptrs.push_back(&p);
  return block_diag(ptrs);
}

inline SparseMatrix build_monolithic_prolongation(const Grid& g) {
  std::vector<SparseMatrix> parts;
  for (int c = 0; c < g.dim; ++c)
    parts.push_back(build_field_prolongation(g, c));
  parts.push_back(build_field_prolongation(g, -1));
  std::vector<const SparseMatrix*> ptrs;
  for (const auto& p : parts) ptrs.push_back(&p);
  return block_diag(ptrs);
}

enum class CycleType { V, W };
enum class SmootherKind { Jacobi, VankaRB };

struct SmootherParams {
  SmootherKind kind = SmootherKind::Jacobi;
  std::vector<double> damping = {0.8, 0.8, 0.3};  // per level; last reused

  double at(int level) const {
    if (damping.empty())
      throw std::invalid_argument("smoother: no damping parameters");
    int i = std::min<int>(level, static_cast<int>(damping.size()) - 1);
    double d = damping[i];
    if (d <= 0.0 || d > 1.0)
      throw std::invalid_argument("smoother: damping outside (0, 1]");
    return d;
  }

  static SmootherParams jacobi_2d() { return {SmootherKind::Jacobi, {0.8, 0.8, 0.3}}; }
  static SmootherParams jacobi_3d() { return {SmootherKind::Jacobi, {0.8, 0.8, 0.2}}; }
  static SmootherParams vanka_rb() { return {SmootherKind::VankaRB, {0.65, 0.5, 0.3}}; }
};

struct MgOptions {
  int levels = 2;
  CycleType cycle = CycleType::W;
  int nu1 = 1, nu2 = 2;
  SmootherParams smoother = SmootherParams::jacobi_2d();
  int coarse_max_bandwidth = 100000;
  // two-point means on cell-centered axes for block restrictions (the 3D
  // recipe); prolongation stays full-weighting either way
  bool mixed_intergrid = false;
};

/// Damped Jacobi: x += damping * D^{-1} (b - H x). Charges nnz(H) + n.
inline void jacobi_sweep(const SparseMatrix& H, std::span<const cplx> inv_diag,
                         std::span<cplx> x, std::span<const cplx> b,
                         double damping, FlopLedger* ledger = nullptr) {
  const int n = H.nrows();
  Vec r(n);
  H.apply(x, r, ledger ? &ledger->cycle : nullptr);
  for (int i = 0; i < n; ++i)
    x[i] += damping * inv_diag[i] * (b[i] - r[i]);
  if (ledger) ledger->cycle += static_cast<std::uint64_t>(n);
}

inline Vec jacobi_inverse_diagonal(const SparseMatrix& H) {
  Vec d = H.diag();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] == cplx(0.0))
      throw std::runtime_error("jacobi: zero diagonal at row " +
                               std::to_string(i));
    d[i] = cplx(1.0) / d[i];
  }
  return d;
}

inline void jacobi_sweep(const SparseMatrix& H, std::span<cplx> x,
                         std::span<const cplx> b, double damping,
                         FlopLedger* ledger = nullptr) {
  Vec inv_d = jacobi_inverse_diagonal(H);
  jacobi_sweep(H, inv_d, x, b, damping, ledger);
}

namespace detail {

/// Cached cell-wise Vanka data for one mixed-form level: the 2d+1 unknown
/// indices per cell (the faces bounding it plus its pressure) and the
/// factored local principal submatrix.
struct VankaLevel {
  Grid grid;
  std::vector<std::vector<int>> cell_dofs;  // per cell
  std::vector<DenseLU> local_lu;
  std::vector<long> red, black;  // cell partitions by (i+j+k) parity

  static VankaLevel make(const SparseMatrix& K, const Grid& g) {
    VankaLevel v;
    v.grid = g;
    FaceLayout l = FaceLayout::make(g, Topology::GhostZero);
    const long m = g.cells();
    v.cell_dofs.resize(m);
    v.local_lu.reserve(m);
    for (int k = 0; k < g.nc[2]; ++k)
      for (int j = 0; j < g.nc[1]; ++j)
        for (int i = 0; i < g.nc[0]; ++i) {
          long cell = g.cell_index(i, j, k);
          std::vector<int>& dofs = v.cell_dofs[cell];
          std::array<int, 3> idx = {i, j, k};
          for (int c = 0; c < g.dim; ++c) {
            auto lo = idx, hi = idx;
            hi[c] += 1;
            dofs.push_back(static_cast<int>(l.face_index(c, lo)));
            dofs.push_back(static_cast<int>(l.face_index(c, hi)));
          }
          dofs.push_back(static_cast<int>(l.n + cell));
          const int s = static_cast<int>(dofs.size());
          DenseMatrix loc(s, s);
          for (int a = 0; a < s; ++a)
            for (int bcol = 0; bcol < s; ++bcol)
              loc(a, bcol) = K.at(dofs[a], dofs[bcol]);
          try {
            v.local_lu.emplace_back(std::move(loc));
          } catch (const std::exception&) {
            throw std::runtime_error(
                "vanka: singular local block at cell (" + std::to_string(i) +
                "," + std::to_string(j) + "," + std::to_string(k) + ")");
          }
          if (((i + j + k) & 1) == 0)
            v.red.push_back(cell);
          else
            v.black.push_back(cell);
        }
    return v;
  }
};

inline void vanka_color_sweep(const SparseMatrix& K, const VankaLevel& v,
                              const std::vector<long>& cells,
                              std::span<cplx> x, std::span<const cplx> b,
                              double damping) {
  const auto& rp = K.row_ptr();
  const auto& ci = K.col_idx();
  const auto& vals = K.values();
  for (long cell : cells) {
    const auto& dofs = v.cell_dofs[cell];
    const int s = static_cast<int>(dofs.size());
    Vec rloc(s);
    for (int a = 0; a < s; ++a) {
      int row = dofs[a];
      cplx acc(0.0);
      for (int kk = rp[row]; kk < rp[row + 1]; ++kk)
        acc += vals[kk] * x[ci[kk]];
      rloc[a] = b[row] - acc;
    }
    Vec e = v.local_lu[cell].solve(rloc);
    for (int a = 0; a < s; ++a) x[dofs[a]] += damping * e[a];
  }
}

}  // namespace detail

/// Cell-wise red-black Vanka on the mixed-form operator. One full sweep
/// (red then black) charges nnz(K) + 17 * n_cells, the cost convention
/// used for the cycle comparisons.
inline void vanka_rb_sweep(const SparseMatrix& K, const detail::VankaLevel& v,
                           std::span<cplx> x, std::span<const cplx> b,
                           double damping, FlopLedger* ledger = nullptr) {
  detail::vanka_color_sweep(K, v, v.red, x, b, damping);
  detail::vanka_color_sweep(K, v, v.black, x, b, damping);
  if (ledger)
    ledger->cycle += static_cast<std::uint64_t>(K.nnz()) +
                     17ull * static_cast<std::uint64_t>(v.grid.cells());
}

inline void vanka_rb_sweep(const SparseMatrix& K, const Grid& g,
                           std::span<cplx> x, std::span<const cplx> b,
                           double damping, FlopLedger* ledger = nullptr) {
  detail::VankaLevel v = detail::VankaLevel::make(K, g);
  vanka_rb_sweep(K, v, x, b, damping, ledger);
}

/// Geometric multigrid hierarchy on one operator: Galerkin-coarsened
/// levels, per-level smoother data, and a factored coarsest solve. Used
/// both per acoustic block (Jacobi smoothing) and on the whole mixed
/// system (Vanka smoothing).
class MgHierarchy {
 public:
  struct Level {
    SparseMatrix H;
    SparseMatrix R, P;  // to / from the next coarser level (unset on last)
    Vec inv_diag;       // Jacobi data
    std::shared_ptr<detail::VankaLevel> vanka;
    double damping = 0.0;
  };

  /// Hierarchy for one staggered field (component = -1 for cell-centered)
  /// on grid g. H must already carry any complex shift.
  static MgHierarchy build_block(SparseMatrix H, const Grid& g, int component,
                                 const MgOptions& opt) {
    return build_impl(std::move(H), g, component, false, opt);
  }

  /// Hierarchy on the full mixed operator with the mixed restriction and
  /// full-weighting prolongation.
  static MgHierarchy build_monolithic(SparseMatrix K, const Grid& g,
                                      const MgOptions& opt) {
    return build_impl(std::move(K), g, 0, true, opt);
  }

  int levels() const { return static_cast<int>(levels_.size()); }
  const Level& level(int i) const { return levels_[i]; }
  std::uint64_t coarse_factor_nnz() const { return coarse_->factor_nnz(); }
  int size() const { return levels_.front().H.nrows(); }

  /// One multigrid cycle updating x in place.
  void cycle(std::span<const cplx> b, std::span<cplx> x,
             FlopLedger* ledger = nullptr) const {
    recurse(0, b, x, ledger);
  }

  /// One cycle from a zero initial guess (the preconditioner application).
  Vec apply(std::span<const cplx> b, FlopLedger* ledger = nullptr) const {
    Vec x(size(), cplx(0.0));
    cycle(b, x, ledger);
    return x;
  }

 private:
  static MgHierarchy build_impl(SparseMatrix Hfine, const Grid& g,
                                int component, bool monolithic,
                                const MgOptions& opt) {
    if (opt.levels < 1)
      throw std::invalid_argument("multigrid: need at least one level");
    if (!g.coarsenable(opt.levels))
      throw std::invalid_argument(
          "multigrid: grid not divisible for the requested level count");
    if (opt.nu1 < 0 || opt.nu2 < 0 || opt.nu1 + opt.nu2 < 1)
      throw std::invalid_argument("multigrid: need at least one smoothing sweep");
    MgHierarchy h;
    h.cycle_type_ = opt.cycle;
    h.nu1_ = opt.nu1;
    h.nu2_ = opt.nu2;
    h.kind_ = opt.smoother.kind;
    Grid gl = g;
    SparseMatrix H = std::move(Hfine);
    for (int l = 0; l < opt.levels; ++l) {
      Level lev;
      lev.damping = opt.smoother.at(l);
      if (l + 1 < opt.levels) {
        lev.R = monolithic
                    ? build_monolithic_restriction(gl)
                    : build_field_restriction(gl, component,
                                              opt.mixed_intergrid);
        lev.P = monolithic ? build_monolithic_prolongation(gl)
                           : build_field_prolongation(gl, component);
        if (opt.smoother.kind == SmootherKind::Jacobi)
          lev.inv_diag = jacobi_inverse_diagonal(H);
        else
          lev.vanka = std::make_shared<detail::VankaLevel>(
              detail::VankaLevel::make(H, gl));
        SparseMatrix Hc = triple_product(lev.R, H, lev.P);
        lev.H = std::move(H);
        H = std::move(Hc);
        h.levels_.push_back(std::move(lev));
        gl = gl.coarsen();
      } else {
        lev.H = std::move(H);
        h.levels_.push_back(std::move(lev));
      }
    }
    h.coarse_ = std::make_shared<BandedFactor>(h.levels_.back().H, true,
                                               opt.coarse_max_bandwidth);
    return h;
  }

  void smooth(int l, std::span<const cplx> b, std::span<cplx> x,
              FlopLedger* ledger) const {
    const Level& lev = levels_[l];
    if (kind_ == SmootherKind::Jacobi)
      jacobi_sweep(lev.H, lev.inv_diag, x, b, lev.damping, ledger);
    else
      vanka_rb_sweep(lev.H, *lev.vanka, x, b, lev.damping, ledger);
  }

  void recurse(int l, std::span<const cplx> b, std::span<cplx> x,
               FlopLedger* ledger) const {
    const Level& lev = levels_[l];
    if (l + 1 == levels()) {
      Vec y = coarse_->solve(b, ledger ? &ledger->coarse : nullptr);
      std::copy(y.begin(), y.end(), x.begin());
      return;
    }
    for (int s = 0; s < nu1_; ++s) smooth(l, b, x, ledger);
    Vec r(lev.H.nrows());
    lev.H.apply(x, r, ledger ? &ledger->cycle : nullptr);
    for (int i = 0; i < lev.H.nrows(); ++i) r[i] = b[i] - r[i];
    Vec rc = lev.R.apply(r, ledger ? &ledger->cycle : nullptr);
    Vec ec(rc.size(), cplx(0.0));
    // with an exact coarsest solve a second recursive call is a no-op,
    // so the W pattern only branches above the coarsest level
    int calls = (cycle_type_ == CycleType::W && l + 2 < levels()) ? 2 : 1;
    for (int c = 0; c < calls; ++c) recurse(l + 1, rc, ec, ledger);
    Vec corr = lev.P.apply(ec, ledger ? &ledger->cycle : nullptr);
    for (int i = 0; i < lev.H.nrows(); ++i) x[i] += corr[i];
    for (int s = 0; s < nu2_; ++s) smooth(l, b, x, ledger);
  }

  std::vector<Level> levels_;
  std::shared_ptr<BandedFactor> coarse_;
  CycleType cycle_type_ = CycleType::W;
  int nu1_ = 1, nu2_ = 2;
  SmootherKind kind_ = SmootherKind::Jacobi;
};

/// Convenience builder matching the CSLP recipe: shift the operator first,
/// then coarsen the shifted system throughout.
inline MgHierarchy build_hierarchy(const SparseMatrix& H, const Grid& g,
                                   int component,
                                   const std::vector<double>& shift_mass,
                                   double alpha, double omega,
                                   const MgOptions& opt) {
  return MgHierarchy::build_block(apply_shift(H, shift_mass, alpha, omega), g,
                                  component, opt);
}

}  // namespace helmstack
