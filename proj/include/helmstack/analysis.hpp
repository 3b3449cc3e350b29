#pragma once

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "helmstack/krylov.hpp"
#include "helmstack/precond.hpp"

namespace helmstack {

/// Top-left-anchored rectangular sub-model (2D). Copies all material fields;
/// if an absorbing-layer spec is given the attenuation is rebuilt for the
/// slice's own boundaries (slicing loses heterogeneity outside the window,
/// so results on slices are qualitative).
inline MediaModel slice_media(const MediaModel& media, int w, int h,
                              const AbcSpec* abc = nullptr) {
  const Grid& g = media.grid;
  if (g.dim != 2) throw std::invalid_argument("slice_media: 2D models only");
  if (w <= 0 || h <= 0 || w > g.nc[0] || h > g.nc[1])
    throw std::invalid_argument("slice_media: slice exceeds grid");
  MediaModel out;
  out.grid = Grid(w, h, g.h[0], g.h[1]);
  const long cells = static_cast<long>(w) * h;
  out.rho.resize(cells);
  out.lambda.resize(cells);
  out.mu.resize(cells);
  out.gamma.resize(cells);
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      long src = g.cell_index(i, j, 0);
      long dst = out.grid.cell_index(i, j, 0);
      out.rho[dst] = media.rho[src];
      out.lambda[dst] = media.lambda[src];
      out.mu[dst] = media.mu[src];
      out.gamma[dst] = media.gamma[src];
    }
  if (abc) out = apply_abc(out, *abc);
  return out;
}

struct SpectrumReport {
  Vec eigenvalues;  // all m of them (Z is m x m)
  std::string media_name;
  int w = 0, h = 0;
  double omega = 0.0;
  double shift = 0.0;
};

/// Dense spectrum of Z for a (small) media model: forms Z column by column
/// through the mat-vec and runs the dense eigensolver.
inline SpectrumReport spectrum_of_Z(const MediaModel& media, double omega,
                                    double shift = 0.0,
                                    const std::string& name = "",
                                    long max_cells = 2500,
                                    Topology topo = Topology::GhostZero) {
  if (media.grid.cells() > max_cells)
    throw std::invalid_argument("spectrum_of_Z: model exceeds the dense cap");
  SaddleSystem s = assemble_saddle(media, omega, topo);
  PressureOperator Ap =
      build_Ap(media, omega, ApVariant::RightWeighted, topo, s.G);
  ZOperator zop(s, Ap, shift);
  SpectrumReport rep;
  rep.eigenvalues = dense_eig(zop.form_dense());
  rep.media_name = name;
  rep.w = media.grid.nc[0];
  rep.h = media.grid.nc[1];
  rep.omega = omega;
  rep.shift = shift;
  return rep;
}

inline std::string spectrum_csv(const SpectrumReport& rep) {
  std::string out = "re,im\n";
  char buf[64];
  for (const cplx& l : rep.eigenvalues) {
    std::snprintf(buf, sizeof(buf), "%.12e,%.12e\n", l.real(), l.imag());
    out += buf;
  }
  return out;
}

/// Power-method spectral radius of the shifted Z for each shift value. The
/// inner factorizations are rebuilt per shift.
inline std::vector<std::pair<double, double>> rho_z_sweep(
    const MediaModel& media, double omega, const std::vector<double>& shifts,
    Topology topo = Topology::GhostZero, double tol = 1e-4,
    int max_iter = 500) {
  SaddleSystem s = assemble_saddle(media, omega, topo);
  PressureOperator Ap =
      build_Ap(media, omega, ApVariant::RightWeighted, topo, s.G);
  std::vector<std::pair<double, double>> out;
  for (double alpha : shifts) {
    ZOperator zop(s, Ap, alpha);
    out.emplace_back(alpha, zop.spectral_radius(tol, max_iter).radius);
  }
  return out;
}

inline std::string sweep_csv(
    const std::vector<std::pair<double, double>>& sweep) {
  std::string out = "alpha,rho\n";
  char buf[64];
  for (const auto& [a, r] : sweep) {
    std::snprintf(buf, sizeof(buf), "%.6g,%.12e\n", a, r);
    out += buf;
  }
  return out;
}

struct FlopConfig {
  std::string label;
  MediaModel media;
  double omega = 0.0;
  bool monolithic = false;
  double alpha = 0.1;
  MgOptions options;
};

struct FlopTable {
  struct Row {
    std::string label;
    long cells = 0;
    int levels = 0;
    double cycle_per_cell = 0.0;   // per-cycle work, coarse solve excluded
    double coarse_nnz_per_cell = 0.0;  // LU factor nonzeros
    double total_per_cell = 0.0;
  };
  std::vector<Row> rows;
  double coarse_ratio = 0.0;  // monolithic / block-acoustic coarse nnz, if
                              // both kinds are present at matching sizes

  std::string csv() const {
    std::string out = "label,cells,levels,cycle_per_cell,coarse_nnz_per_cell,total_per_cell\n";
    char buf[160];
    for (const Row& r : rows) {
      std::snprintf(buf, sizeof(buf), "%s,%ld,%d,%.6f,%.6f,%.6f\n",
                    r.label.c_str(), r.cells, r.levels, r.cycle_per_cell,
                    r.coarse_nnz_per_cell, r.total_per_cell);
      out += buf;
    }
    return out;
  }
};

/// Measures one preconditioner application per configuration on a fixed
/// deterministic vector and reports per-cell costs from the work ledger plus
/// the coarse-factor nonzeros.
inline FlopTable flop_table(const std::vector<FlopConfig>& configs) {
  FlopTable table;
  double block_coarse = 0.0, mono_coarse = 0.0;
  for (const FlopConfig& cfg : configs) {
    SaddleSystem s = assemble_saddle(cfg.media, cfg.omega);
    FlopTable::Row row;
    row.label = cfg.label;
    row.cells = cfg.media.grid.cells();
    row.levels = cfg.options.levels;
    FlopLedger led;
    Vec r(s.n + s.m, cplx(1.0));
    std::uint64_t coarse_nnz = 0;
    if (cfg.monolithic) {
      MonolithicPrec prec = MonolithicPrec::make(s, cfg.alpha, cfg.options);
      prec.apply(r, &led);
      coarse_nnz = prec.factor_nnz();
    } else {
      PressureOperator Ap = build_Ap(cfg.media, cfg.omega,
                                     ApVariant::RightWeighted, s.topo, s.G);
      BlockAcousticPrec prec =
          BlockAcousticPrec::make_multigrid(s, Ap, cfg.alpha, cfg.options);
      prec.apply(r, &led);
      coarse_nnz = prec.factor_nnz();
    }
    row.cycle_per_cell = static_cast<double>(led.cycle) / row.cells;
    row.coarse_nnz_per_cell = static_cast<double>(coarse_nnz) / row.cells;
    row.total_per_cell = row.cycle_per_cell + row.coarse_nnz_per_cell;
    (cfg.monolithic ? mono_coarse : block_coarse) = row.coarse_nnz_per_cell;
    table.rows.push_back(std::move(row));
  }
  if (block_coarse > 0.0 && mono_coarse > 0.0)
    table.coarse_ratio = mono_coarse / block_coarse;
  return table;
}

}  // namespace helmstack
