#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "helmstack/core.hpp"
#include "helmstack/sparse.hpp"

namespace helmstack {

/// Velocity-model container matching the on-disk format: one ASCII header
/// line `EHGRID <dim> <nx> <ny> [<nz>] <hx> <hy> [<hz>]` followed by three
/// little-endian float64 arrays (rho, Vp, Vs) in x-fastest cell order.
struct EhGrid {
  Grid grid;
  std::vector<double> rho, vp, vs;
};

namespace detail {

inline void write_doubles(std::ostream& os, const std::vector<double>& v) {
  static_assert(sizeof(double) == 8);
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

inline void read_doubles(std::istream& is, std::vector<double>& v, long n) {
  v.resize(n);
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw std::runtime_error("ehgrid: truncated data section");
}

}  // namespace detail

inline void write_ehgrid(const std::string& path, const EhGrid& eh) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("ehgrid: cannot open '" + path + "'");
  const Grid& g = eh.grid;
  os << "EHGRID " << g.dim << ' ' << g.nc[0] << ' ' << g.nc[1];
  if (g.dim == 3) os << ' ' << g.nc[2];
  char buf[96];
  if (g.dim == 3)
    std::snprintf(buf, sizeof(buf), " %.17g %.17g %.17g\n", g.h[0], g.h[1],
                  g.h[2]);
  else
    std::snprintf(buf, sizeof(buf), " %.17g %.17g\n", g.h[0], g.h[1]);
  os << buf;
  detail::write_doubles(os, eh.rho);
  detail::write_doubles(os, eh.vp);
  detail::write_doubles(os, eh.vs);
  if (!os) throw std::runtime_error("ehgrid: write failed for '" + path + "'");
}

inline EhGrid read_ehgrid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("ehgrid: cannot open '" + path + "'");
  std::string header;
  std::getline(is, header);
  std::istringstream hs(header);
  std::string magic;
  int dim = 0;
  hs >> magic >> dim;
  if (magic != "EHGRID" || (dim != 2 && dim != 3))
    throw std::runtime_error("ehgrid: malformed header in '" + path + "'");
  EhGrid eh;
  if (dim == 2) {
    int nx = 0, ny = 0;
    double hx = 0, hy = 0;
    hs >> nx >> ny >> hx >> hy;
    if (!hs || nx <= 0 || ny <= 0 || hx <= 0 || hy <= 0)
      throw std::runtime_error("ehgrid: malformed header in '" + path + "'");
    eh.grid = Grid(nx, ny, hx, hy);
  } else {
    int nx = 0, ny = 0, nz = 0;
    double hx = 0, hy = 0, hz = 0;
    hs >> nx >> ny >> nz >> hx >> hy >> hz;
    if (!hs || nx <= 0 || ny <= 0 || nz <= 0 || hx <= 0 || hy <= 0 || hz <= 0)
      throw std::runtime_error("ehgrid: malformed header in '" + path + "'");
    eh.grid = Grid(nx, ny, nz, hx, hy, hz);
  }
  const long cells = eh.grid.cells();
  detail::read_doubles(is, eh.rho, cells);
  detail::read_doubles(is, eh.vp, cells);
  detail::read_doubles(is, eh.vs, cells);
  return eh;
}

/// Replicates the deepest cell row (2D) or slab (3D) `rows` extra times,
/// the standard vertical extension for shallow geophysical models.
inline EhGrid extend_bottom(const EhGrid& eh, int rows = 16) {
  if (rows < 0) throw std::invalid_argument("extend_bottom: negative rows");
  const Grid& g = eh.grid;
  EhGrid out;
  const int depth_axis = g.dim - 1;
  std::array<int, 3> nc = g.nc;
  nc[depth_axis] += rows;
  out.grid = g.dim == 2 ? Grid(nc[0], nc[1], g.h[0], g.h[1])
                        : Grid(nc[0], nc[1], nc[2], g.h[0], g.h[1], g.h[2]);
  const long slab = g.cells() / g.nc[depth_axis];
  auto extend = [&](const std::vector<double>& src, std::vector<double>& dst) {
    dst = src;
    dst.insert(dst.end(), static_cast<std::size_t>(slab) * rows, 0.0);
    const double* bottom = src.data() + (g.nc[depth_axis] - 1) * slab;
    for (int r = 0; r < rows; ++r)
      std::copy(bottom, bottom + slab,
                dst.data() + (g.nc[depth_axis] + r) * slab);
  };
  extend(eh.rho, out.rho);
  extend(eh.vp, out.vp);
  extend(eh.vs, out.vs);
  return out;
}

/// (rho, Vp, Vs) -> (rho, lambda, mu): mu = rho Vs^2, lambda = rho Vp^2 - 2mu.
inline MediaModel media_from_ehgrid(const EhGrid& eh) {
  MediaModel m;
  m.grid = eh.grid;
  const long cells = eh.grid.cells();
  if (static_cast<long>(eh.rho.size()) != cells ||
      static_cast<long>(eh.vp.size()) != cells ||
      static_cast<long>(eh.vs.size()) != cells)
    throw std::invalid_argument("ehgrid: field sizes disagree with the grid");
  m.rho.resize(cells);
  m.lambda.resize(cells);
  m.mu.resize(cells);
  m.gamma.assign(cells, 0.0);
  for (long c = 0; c < cells; ++c) {
    double mu = eh.rho[c] * eh.vs[c] * eh.vs[c];
    double lam = eh.rho[c] * eh.vp[c] * eh.vp[c] - 2.0 * mu;
    m.rho[c] = eh.rho[c];
    m.mu[c] = mu;
    m.lambda[c] = lam;
  }
  m.validate();
  return m;
}

/// Complex field dump: little-endian float64, interleaved re/im, x-fastest.
inline void write_complex_bin(const std::string& path,
                              std::span<const cplx> field) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("bin: cannot open '" + path + "'");
  std::vector<double> flat;
  flat.reserve(2 * field.size());
  for (const cplx& v : field) {
    flat.push_back(v.real());
    flat.push_back(v.imag());
  }
  detail::write_doubles(os, flat);
  if (!os) throw std::runtime_error("bin: write failed for '" + path + "'");
}

/// P6 grayscale heatmap of |field| on a w x h lattice (x-fastest rows),
/// magnitudes mapped linearly (or through log1p) onto 0-255.
inline void write_magnitude_ppm(const std::string& path,
                                std::span<const cplx> field, int w, int h,
                                bool log_scale = false) {
  if (static_cast<long>(field.size()) != static_cast<long>(w) * h)
    throw std::invalid_argument("ppm: field size does not match dimensions");
  std::vector<double> mag(field.size());
  double vmax = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    mag[i] = std::abs(field[i]);
    if (log_scale) mag[i] = std::log1p(mag[i]);
    vmax = std::max(vmax, mag[i]);
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("ppm: cannot open '" + path + "'");
  os << "P6\n" << w << ' ' << h << "\n255\n";
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) {
      double t = vmax > 0.0 ? mag[static_cast<long>(j) * w + i] / vmax : 0.0;
      auto byte = static_cast<unsigned char>(std::lround(255.0 * t));
      char px[3] = {static_cast<char>(byte), static_cast<char>(byte),
                    static_cast<char>(byte)};
      os.write(px, 3);
    }
  if (!os) throw std::runtime_error("ppm: write failed for '" + path + "'");
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("io: cannot open '" + path + "'");
  os << body;
  if (!os) throw std::runtime_error("io: write failed for '" + path + "'");
}

}  // namespace helmstack
