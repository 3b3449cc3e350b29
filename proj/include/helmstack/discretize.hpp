#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "helmstack/core.hpp"
#include "helmstack/sparse.hpp"

namespace helmstack {

/// Boundary closure. GhostZero treats exterior ghost pressure/displacement as
/// zero (Dirichlet-type reinforcement); Periodic wraps and exists for the
/// exact-commutation and symbol property checks, not as a solver mode.
enum class Topology { GhostZero, Periodic };

namespace detail {

inline std::array<int, 3> decode(long idx, const std::array<int, 3>& sz) {
  std::array<int, 3> c;
  c[0] = static_cast<int>(idx % sz[0]);
  idx /= sz[0];
  c[1] = static_cast<int>(idx % sz[1]);
  c[2] = static_cast<int>(idx / sz[1]);
  return c;
}

inline long encode(const std::array<int, 3>& c, const std::array<int, 3>& sz) {
  return c[0] + static_cast<long>(sz[0]) * (c[1] + static_cast<long>(sz[1]) * c[2]);
}

inline long size_of(const std::array<int, 3>& sz) {
  return static_cast<long>(sz[0]) * sz[1] * sz[2];
}

}  // namespace detail

/// Staggered (MAC) unknown layout: one face family per displacement
/// component, x-fastest ordering within each family, families concatenated.
struct FaceLayout {
  int dim = 2;
  std::array<std::array<int, 3>, 3> fs{};  // fs[c] = sizes of component c's family
  std::array<long, 3> count{};
  std::array<long, 3> offset{};
  long n = 0;

  static FaceLayout make(const Grid& g, Topology topo) {
    FaceLayout l;
    l.dim = g.dim;
    long off = 0;
    for (int c = 0; c < g.dim; ++c) {
      l.fs[c] = {1, 1, 1};
      for (int a = 0; a < g.dim; ++a)
        l.fs[c][a] = g.nc[a] + (a == c && topo == Topology::GhostZero ? 1 : 0);
      l.count[c] = detail::size_of(l.fs[c]);
      l.offset[c] = off;
      off += l.count[c];
    }
    l.n = off;
    return l;
  }

  long face_index(int c, const std::array<int, 3>& idx) const {
    return offset[c] + detail::encode(idx, fs[c]);
  }
};

/// Discrete gradient, cells -> faces, entries +-1/h per axis. Exterior ghost
/// pressure is zero on GhostZero boundaries. B := G^T.
inline SparseMatrix build_gradient(const Grid& g, Topology topo) {
  FaceLayout l = FaceLayout::make(g, topo);
  std::array<int, 3> cs = {g.nc[0], g.nc[1], g.nc[2]};
  TripletBuilder t(static_cast<int>(l.n), static_cast<int>(g.cells()));
  for (int c = 0; c < g.dim; ++c) {
    const double inv_h = 1.0 / g.h[c];
    for (long f = 0; f < l.count[c]; ++f) {
      auto idx = detail::decode(f, l.fs[c]);
      int row = static_cast<int>(l.offset[c] + f);
      auto hi = idx, lo = idx;
      lo[c] -= 1;
      if (topo == Topology::Periodic) {
        hi[c] = idx[c] % g.nc[c];
        lo[c] = (idx[c] - 1 + g.nc[c]) % g.nc[c];
        t.add(row, static_cast<int>(detail::encode(hi, cs)), cplx(inv_h));
        t.add(row, static_cast<int>(detail::encode(lo, cs)), cplx(-inv_h));
      } else {
        if (hi[c] < g.nc[c])
          t.add(row, static_cast<int>(detail::encode(hi, cs)), cplx(inv_h));
        if (lo[c] >= 0)
          t.add(row, static_cast<int>(detail::encode(lo, cs)), cplx(-inv_h));
      }
    }
  }
  return t.build();
}

/// Face-averaging operator A_f: cells -> all faces. Interior faces take the
/// two-cell mean; GhostZero boundary faces copy the single adjacent cell.
inline SparseMatrix build_face_averaging(const Grid& g, Topology topo) {
  FaceLayout l = FaceLayout::make(g, topo);
  std::array<int, 3> cs = {g.nc[0], g.nc[1], g.nc[2]};
  TripletBuilder t(static_cast<int>(l.n), static_cast<int>(g.cells()));
  for (int c = 0; c < g.dim; ++c) {
    for (long f = 0; f < l.count[c]; ++f) {
      auto idx = detail::decode(f, l.fs[c]);
      int row = static_cast<int>(l.offset[c] + f);
      std::vector<long> cells;
      for (int s = -1; s <= 0; ++s) {
        auto cell = idx;
        cell[c] = idx[c] + s;
        if (topo == Topology::Periodic)
          cell[c] = (cell[c] + g.nc[c]) % g.nc[c];
        else if (cell[c] < 0 || cell[c] >= g.nc[c])
          continue;
        cells.push_back(detail::encode(cell, cs));
      }
      const double w = 1.0 / cells.size();
      for (long cellidx : cells) t.add(row, static_cast<int>(cellidx), cplx(w));
    }
  }
  return t.build();
}

namespace detail {

// Edge locations for the cross derivative of component c along axis ax:
// nodal in both c and ax, cell-centered elsewhere.
inline std::array<int, 3> edge_sizes(const Grid& g, Topology topo, int c, int ax) {
  std::array<int, 3> es = {1, 1, 1};
  for (int a = 0; a < g.dim; ++a)
    es[a] = g.nc[a] +
            ((a == c || a == ax) && topo == Topology::GhostZero ? 1 : 0);
  return es;
}

// Averaging of a cell field onto the edge locations of (c, ax): the mean of
// the up-to-4 adjacent cells; boundary edges average whatever is available.
inline SparseMatrix build_edge_averaging(const Grid& g, Topology topo, int c,
                                         int ax) {
  std::array<int, 3> es = edge_sizes(g, topo, c, ax);
  std::array<int, 3> cs = {g.nc[0], g.nc[1], g.nc[2]};
  TripletBuilder t(static_cast<int>(size_of(es)), static_cast<int>(g.cells()));
  for (long e = 0; e < size_of(es); ++e) {
    auto idx = decode(e, es);
    std::vector<long> cells;
    for (int sc = -1; sc <= 0; ++sc)
      for (int sa = -1; sa <= 0; ++sa) {
        auto cell = idx;
        cell[c] = idx[c] + sc;
        cell[ax] = idx[ax] + sa;
        bool ok = true;
        for (int a : {c, ax}) {
          if (topo == Topology::Periodic)
            cell[a] = (cell[a] + g.nc[a]) % g.nc[a];
          else if (cell[a] < 0 || cell[a] >= g.nc[a])
            ok = false;
        }
        if (ok) cells.push_back(encode(cell, cs));
      }
    const double w = 1.0 / cells.size();
    for (long cellidx : cells)
      t.add(static_cast<int>(e), static_cast<int>(cellidx), cplx(w));
  }
  return t.build();
}

// Difference of the u_c face field along axis ax. For ax == c the result is
// cell-centered; otherwise it lives on the (c, ax) edges. Ghost displacement
// is zero outside the domain.
inline SparseMatrix build_component_gradient(const Grid& g, Topology topo,
                                             int c, int ax) {
  FaceLayout l = FaceLayout::make(g, topo);
  const double inv_h = 1.0 / g.h[ax];
  if (ax == c) {
    std::array<int, 3> cs = {g.nc[0], g.nc[1], g.nc[2]};
    TripletBuilder t(static_cast<int>(g.cells()), static_cast<int>(l.count[c]));
    for (long cell = 0; cell < g.cells(); ++cell) {
      auto idx = decode(cell, cs);
      auto fhi = idx, flo = idx;
      fhi[c] = idx[c] + 1;
      if (topo == Topology::Periodic) fhi[c] %= g.nc[c];
      t.add(static_cast<int>(cell), static_cast<int>(encode(fhi, l.fs[c])),
            cplx(inv_h));
      t.add(static_cast<int>(cell), static_cast<int>(encode(flo, l.fs[c])),
            cplx(-inv_h));
    }
    return t.build();
  }
  std::array<int, 3> es = edge_sizes(g, topo, c, ax);
  TripletBuilder t(static_cast<int>(size_of(es)), static_cast<int>(l.count[c]));
  for (long e = 0; e < size_of(es); ++e) {
    auto idx = decode(e, es);
    auto fhi = idx, flo = idx;
    flo[ax] = idx[ax] - 1;
    const int nfax = l.fs[c][ax];
    if (topo == Topology::Periodic) {
      fhi[ax] = idx[ax] % nfax;
      flo[ax] = (idx[ax] - 1 + nfax) % nfax;
      t.add(static_cast<int>(e), static_cast<int>(encode(fhi, l.fs[c])),
            cplx(inv_h));
      t.add(static_cast<int>(e), static_cast<int>(encode(flo, l.fs[c])),
            cplx(-inv_h));
    } else {
      if (fhi[ax] < nfax)
        t.add(static_cast<int>(e), static_cast<int>(encode(fhi, l.fs[c])),
              cplx(inv_h));
      if (flo[ax] >= 0)
        t.add(static_cast<int>(e), static_cast<int>(encode(flo, l.fs[c])),
              cplx(-inv_h));
    }
  }
  return t.build();
}

inline Vec real_to_cplx(const std::vector<double>& v) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = cplx(v[i]);
  return out;
}

}  // namespace detail

struct ComponentBlock {
  SparseMatrix laplacian;       // D^T A_e(mu) D part
  std::vector<double> face_rho;    // A_f rho on this family (shift mass)
  std::vector<double> face_gamma;  // A_f gamma on this family
  SparseMatrix full;            // laplacian - omega^2 M
};

/// Acoustic-type diagonal block for one displacement component:
/// D^T diag(A_e mu) D - omega^2 diag(A_f rho (1 - i A_f gamma / omega)).
inline ComponentBlock assemble_block(const MediaModel& media, double omega,
                                     int component, Topology topo) {
  const Grid& g = media.grid;
  for (long c = 0; c < g.cells(); ++c)
    if (omega == 0.0 && media.gamma[c] > 0.0)
      throw std::invalid_argument("assemble_block: omega = 0 with attenuation");
  ComponentBlock blk;
  FaceLayout l = FaceLayout::make(g, topo);
  const long nf = l.count[component];
  SparseMatrix lap;
  bool first = true;
  Vec mu_c = detail::real_to_cplx(media.mu);
  for (int ax = 0; ax < g.dim; ++ax) {
    SparseMatrix D = detail::build_component_gradient(g, topo, component, ax);
    Vec w;
    if (ax == component) {
      w = mu_c;
    } else {
      SparseMatrix E = detail::build_edge_averaging(g, topo, component, ax);
      w = E.apply(mu_c);
    }
    SparseMatrix term = D.transpose().multiply(D.scale_rows(w));
    lap = first ? std::move(term) : lap.add(term);
    first = false;
  }

  // face-averaged rho and gamma restricted to this family
  SparseMatrix Af = build_face_averaging(g, topo);
  Vec rho_f_all = Af.apply(detail::real_to_cplx(media.rho));
  Vec gam_f_all = Af.apply(detail::real_to_cplx(media.gamma));
  blk.face_rho.resize(nf);
  blk.face_gamma.resize(nf);
  Vec mass(nf);
  for (long f = 0; f < nf; ++f) {
    double r = rho_f_all[l.offset[component] + f].real();
    double gm = gam_f_all[l.offset[component] + f].real();
    blk.face_rho[f] = r;
    blk.face_gamma[f] = gm;
    double gw = omega > 0.0 ? gm / omega : 0.0;
    mass[f] = cplx(r) * cplx(1.0, -gw);
  }
  blk.full = lap.add(SparseMatrix::diagonal(mass), cplx(1.0),
                     cplx(-omega * omega));
  blk.laplacian = std::move(lap);
  return blk;
}

/// The assembled mixed-form system [[A, G], [G^T, -C]] plus the pieces the
/// preconditioners need.
struct SaddleSystem {
  Grid grid;
  Topology topo = Topology::GhostZero;
  double omega = 0.0;
  FaceLayout layout;
  long n = 0, m = 0;

  std::vector<ComponentBlock> blocks;  // d displacement blocks
  SparseMatrix A;                      // n x n block diagonal
  SparseMatrix A_laplacian;            // same, mass terms dropped
  SparseMatrix G;                      // n x m gradient
  std::vector<double> C;               // diag(1/(lambda+mu)), real positive
  Vec Mp;                              // rho (1 - i gamma/omega) at cells
  std::vector<double> cell_rho;        // shift mass pieces
  std::vector<double> pressure_shift_mass;  // rho/(lambda+mu)

  SparseMatrix C_matrix() const {
    Vec d(C.size());
    for (std::size_t i = 0; i < C.size(); ++i) d[i] = cplx(C[i]);
    return SparseMatrix::diagonal(d);
  }

  /// Full (n+m) x (n+m) saddle matrix.
  SparseMatrix full() const {
    SparseMatrix Gt = G.transpose();
    TripletBuilder t(static_cast<int>(n + m), static_cast<int>(n + m));
    auto insert = [&](const SparseMatrix& M, int ro, int co, cplx s) {
      for (int i = 0; i < M.nrows(); ++i)
        for (int k = M.row_ptr()[i]; k < M.row_ptr()[i + 1]; ++k)
          t.add(ro + i, co + M.col_idx()[k], s * M.values()[k]);
    };
    insert(A, 0, 0, cplx(1.0));
    insert(G, 0, static_cast<int>(n), cplx(1.0));
    insert(Gt, static_cast<int>(n), 0, cplx(1.0));
    for (long i = 0; i < m; ++i)
      t.add(static_cast<int>(n + i), static_cast<int>(n + i), cplx(-C[i]));
    return t.build();
  }
};

inline SaddleSystem assemble_saddle(const MediaModel& media, double omega,
                                    Topology topo = Topology::GhostZero) {
  media.validate();
  if (omega <= 0.0)
    throw std::invalid_argument("assemble_saddle: omega must be positive");
  const Grid& g = media.grid;
  SaddleSystem s;
  s.grid = g;
  s.topo = topo;
  s.omega = omega;
  s.layout = FaceLayout::make(g, topo);
  s.n = s.layout.n;
  s.m = g.cells();
  std::vector<const SparseMatrix*> blks, laps;
  for (int c = 0; c < g.dim; ++c)
    s.blocks.push_back(assemble_block(media, omega, c, topo));
  for (const auto& b : s.blocks) {
    blks.push_back(&b.full);
    laps.push_back(&b.laplacian);
  }
  s.A = block_diag(blks);
  s.A_laplacian = block_diag(laps);
  s.G = build_gradient(g, topo);
  s.C.resize(s.m);
  s.Mp.resize(s.m);
  s.cell_rho.resize(s.m);
  s.pressure_shift_mass.resize(s.m);
  for (long c = 0; c < s.m; ++c) {
    s.C[c] = 1.0 / (media.lambda[c] + media.mu[c]);
    s.Mp[c] = cplx(media.rho[c]) * cplx(1.0, -media.gamma[c] / omega);
    s.cell_rho[c] = media.rho[c];
    s.pressure_shift_mass[c] = media.rho[c] * s.C[c];
  }
  return s;
}

enum class ApVariant { RightWeighted, FaceAveraged };

struct PressureOperator {
  SparseMatrix full;       // A_p
  SparseMatrix laplacian;  // Laplacian-related part (no mass term)
};

/// Pressure-space surrogate of the leading block: an acoustic Helmholtz
/// operator with shear wave velocity at the cell centers.
/// RightWeighted: G^T G diag(mu) - omega^2 M_p (the default; both derivative
/// factors act on mu from the left). FaceAveraged places A_f(mu) between the
/// divergence and gradient instead.
inline PressureOperator build_Ap(const MediaModel& media, double omega,
                                 ApVariant variant, Topology topo,
                                 const SparseMatrix& G) {
  PressureOperator out;
  const long m = media.grid.cells();
  SparseMatrix Gt = G.transpose();
  if (variant == ApVariant::RightWeighted) {
    out.laplacian =
        Gt.multiply(G).scale_cols(detail::real_to_cplx(media.mu));
  } else {
    SparseMatrix Af = build_face_averaging(media.grid, topo);
    Vec mu_f = Af.apply(detail::real_to_cplx(media.mu));
    out.laplacian = Gt.multiply(G.scale_rows(mu_f));
  }
  Vec mass(m);
  for (long c = 0; c < m; ++c)
    mass[c] = cplx(media.rho[c]) * cplx(1.0, -media.gamma[c] / omega);
  out.full = out.laplacian.add(SparseMatrix::diagonal(mass), cplx(1.0),
                               cplx(-omega * omega));
  return out;
}

/// H_p = G^T G + A_p C: acoustic Helmholtz with pressure wave velocity.
inline SparseMatrix build_Hp(const SaddleSystem& s, const SparseMatrix& Ap) {
  SparseMatrix Gt = s.G.transpose();
  Vec c(s.m);
  for (long i = 0; i < s.m; ++i) c[i] = cplx(s.C[i]);
  return Gt.multiply(s.G).add(Ap.scale_cols(c));
}

struct Commutator {
  SparseMatrix full;  // Xi = G^T A - A_p G^T  (m x n)
  SparseMatrix lap;   // Laplacian-related part
  SparseMatrix mass;  // mass-related part; full = lap - mass
};

inline Commutator build_commutator(const SaddleSystem& s,
                                   const PressureOperator& Ap) {
  Commutator xi;
  SparseMatrix Gt = s.G.transpose();
  xi.full = Gt.multiply(s.A).add(Ap.full.multiply(Gt), cplx(1.0), cplx(-1.0));
  xi.lap = Gt.multiply(s.A_laplacian)
               .add(Ap.laplacian.multiply(Gt), cplx(1.0), cplx(-1.0));
  // mass = lap - full (exact by linearity of the split)
  xi.mass = xi.lap.add(xi.full, cplx(1.0), cplx(-1.0));
  return xi;
}

/// H + i alpha omega^2 diag(Ms): the complex shift. The sign matches the
/// natural attenuation convention: the mass ρ(1 - iγ/ω) enters the operator
/// as -ω²M, so attenuation contributes +iωργ and the shift is equivalent to
/// γ -> γ + αω. (The opposite sign would cancel attenuation and can produce
/// a near-resonance when αω ≈ γ.)
inline SparseMatrix apply_shift(const SparseMatrix& H,
                                const std::vector<double>& Ms, double alpha,
                                double omega) {
  if (alpha == 0.0) return H;
  if (static_cast<int>(Ms.size()) > H.nrows())
    throw std::invalid_argument("apply_shift: mass diagonal too long");
  Vec d(H.nrows(), cplx(0.0));
  for (std::size_t i = 0; i < Ms.size(); ++i)
    d[i] = cplx(0.0, alpha * omega * omega * Ms[i]);
  return H.add(SparseMatrix::diagonal(d));
}

/// Unit point source on the vertical-displacement face nearest the center of
/// the top edge (face); amplitude 1/(prod h), pressure rows zero.
inline Vec point_source(const SaddleSystem& s) {
  const Grid& g = s.grid;
  const int c = g.dim - 1;  // vertical component
  std::array<int, 3> idx = {0, 0, 0};
  for (int a = 0; a < g.dim - 1; ++a) idx[a] = (g.nc[a] - 1) / 2;
  idx[c] = 0;  // top boundary face
  Vec rhs(s.n + s.m, cplx(0.0));
  rhs[s.layout.face_index(c, idx)] = cplx(1.0 / g.cell_volume());
  return rhs;
}

}  // namespace helmstack
