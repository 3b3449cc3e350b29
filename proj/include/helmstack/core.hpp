#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace helmstack {

/// Regular cell grid (2D or 3D). Cells are counted per axis; displacement
/// components live on the faces normal to their axis, pressure and physical
/// coefficients in cell centers. Axis 0 is x (fastest in memory); the last
/// axis is depth ("top" is index 0).
struct Grid {
  int dim = 2;
  std::array<int, 3> nc{0, 0, 1};    // cells per axis (nz = 1 in 2D)
  std::array<double, 3> h{0, 0, 1};  // spacings

  Grid() = default;
  Grid(int nx, int ny, double hx, double hy)
      : dim(2), nc{nx, ny, 1}, h{hx, hy, 1.0} {}
  Grid(int nx, int ny, int nz, double hx, double hy, double hz)
      : dim(3), nc{nx, ny, nz}, h{hx, hy, hz} {}

  void validate() const {
    if (dim != 2 && dim != 3) throw std::invalid_argument("grid: dim must be 2 or 3");
    for (int a = 0; a < dim; ++a) {
      if (nc[a] < 4) throw std::invalid_argument("grid: cell counts must be >= 4");
      if (h[a] <= 0.0) throw std::invalid_argument("grid: spacings must be positive");
    }
  }

  long cells() const {
    long m = 1;
    for (int a = 0; a < dim; ++a) m *= nc[a];
    return m;
  }

  double max_h() const {
    double m = 0.0;
    for (int a = 0; a < dim; ++a) m = std::max(m, h[a]);
    return m;
  }

  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= h[a];
    return v;
  }

  long cell_index(int i, int j, int k = 0) const {
    return i + static_cast<long>(nc[0]) * (j + static_cast<long>(nc[1]) * k);
  }

  /// True when every axis is divisible by 2^(levels-1).
  bool coarsenable(int levels) const {
    int f = 1 << (levels - 1);
    for (int a = 0; a < dim; ++a)
      if (nc[a] % f != 0) return false;
    return true;
  }

  Grid coarsen() const {
    Grid g = *this;
    for (int a = 0; a < dim; ++a) {
      g.nc[a] /= 2;
      g.h[a] *= 2.0;
    }
    return g;
  }
};

inline double poisson_ratio(double lambda, double mu) {
  if (lambda + mu <= 0.0)
    throw std::domain_error("poisson_ratio: lambda + mu must be positive");
  return lambda / (2.0 * (lambda + mu));
}

struct WaveVelocities {
  double vp, vs;
};

inline WaveVelocities wave_velocities(double rho, double lambda, double mu) {
  return {std::sqrt((lambda + 2.0 * mu) / rho), std::sqrt(mu / rho)};
}

/// Cell-centered physical model: density, Lame coefficients and attenuation
/// (the ABC sponge lives in gamma). Immutable after construction.
struct MediaModel {
  Grid grid;
  std::vector<double> rho, lambda, mu, gamma;

  long cells() const { return grid.cells(); }

  void validate() const {
    long m = cells();
    if (static_cast<long>(rho.size()) != m ||
        static_cast<long>(lambda.size()) != m ||
        static_cast<long>(mu.size()) != m ||
        static_cast<long>(gamma.size()) != m)
      throw std::invalid_argument("media: field size mismatch");
    for (long c = 0; c < m; ++c) {
      if (rho[c] <= 0.0) throw std::invalid_argument("media: rho must be positive");
      if (mu[c] < 0.0) throw std::invalid_argument("media: mu must be nonnegative");
      if (lambda[c] + mu[c] <= 0.0)
        throw std::invalid_argument("media: lambda + mu must be positive");
      if (gamma[c] < 0.0) throw std::invalid_argument("media: gamma must be nonnegative");
      if (mu[c] > 0.0) {
        double s = poisson_ratio(lambda[c], mu[c]);
        if (s <= 0.0 || s >= 0.5)
          throw std::invalid_argument("media: Poisson ratio outside (0, 0.5)");
      }
    }
  }

  double min_vs() const {
    double v = std::numeric_limits<double>::max();
    for (long c = 0; c < cells(); ++c)
      v = std::min(v, wave_velocities(rho[c], lambda[c], mu[c]).vs);
    return v;
  }

  double min_vp() const {
    double v = std::numeric_limits<double>::max();
    for (long c = 0; c < cells(); ++c)
      v = std::min(v, wave_velocities(rho[c], lambda[c], mu[c]).vp);
    return v;
  }
};

struct FrequencySpec {
  double omega = 0.0;
  double alpha = 0.0;       // complex-shift parameter
  double gs_target = 10.0;  // grid points per shear wavelength

  void validate() const {
    if (omega <= 0.0) throw std::invalid_argument("frequency: omega must be positive");
    if (alpha < 0.0) throw std::invalid_argument("frequency: alpha must be nonnegative");
  }
};

/// Convert an acoustic velocity model to elastic coefficients using the
/// rho = 0.25 Vp + 1.2 and Vs = 0.5 Vp rules (overridable).
struct AcousticConversionRules {
  double rho_scale = 0.25, rho_offset = 1.2;
  double vs_factor = 0.5;
};

inline MediaModel elastic_from_acoustic(const Grid& grid,
                                        const std::vector<double>& vp,
                                        const AcousticConversionRules& rules = {}) {
  if (static_cast<long>(vp.size()) != grid.cells())
    throw std::invalid_argument("elastic_from_acoustic: vp size mismatch");
  MediaModel m;
  m.grid = grid;
  long n = grid.cells();
  m.rho.resize(n);
  m.lambda.resize(n);
  m.mu.resize(n);
  m.gamma.assign(n, 0.0);
  for (long c = 0; c < n; ++c) {
    if (vp[c] <= 0.0)
      throw std::invalid_argument("elastic_from_acoustic: Vp must be positive");
    double rho = rules.rho_scale * vp[c] + rules.rho_offset;
    double vs = rules.vs_factor * vp[c];
    double mu = rho * vs * vs;
    double lam = rho * vp[c] * vp[c] - 2.0 * mu;
    if (lam + mu <= 0.0)
      throw std::invalid_argument("elastic_from_acoustic: degenerate lambda + mu");
    m.rho[c] = rho;
    m.mu[c] = mu;
    m.lambda[c] = lam;
  }
  return m;
}

/// Built-in media. "homogeneous": rho = mu = 1, lambda = 16 * factor.
/// "linear": rho in [2,3], mu in [1,15], lambda in [4,20] * factor, varying
/// linearly with depth (top low, bottom high).
inline MediaModel builtin_media(const std::string& name, const Grid& grid,
                                double lambda_factor = 1.0) {
  MediaModel m;
  m.grid = grid;
  long n = grid.cells();
  m.rho.resize(n);
  m.lambda.resize(n);
  m.mu.resize(n);
  m.gamma.assign(n, 0.0);
  const int depth_axis = grid.dim - 1;
  if (name == "homogeneous") {
    for (long c = 0; c < n; ++c) {
      m.rho[c] = 1.0;
      m.mu[c] = 1.0;
      m.lambda[c] = 16.0 * lambda_factor;
    }
  } else if (name == "linear") {
    const int nd = grid.nc[depth_axis];
    for (int k = 0; k < grid.nc[2]; ++k)
      for (int j = 0; j < grid.nc[1]; ++j)
        for (int i = 0; i < grid.nc[0]; ++i) {
          int idx_d = (depth_axis == 0 ? i : depth_axis == 1 ? j : k);
          double t = (idx_d + 0.5) / nd;
          long c = grid.cell_index(i, j, k);
          m.rho[c] = 2.0 + t;
          m.mu[c] = 1.0 + 14.0 * t;
          m.lambda[c] = (4.0 + 16.0 * t) * lambda_factor;
        }
  } else {
    throw std::invalid_argument("builtin_media: unknown name '" + name + "'");
  }
  return m;
}

/// Frequency such that the slowest-shear region has gs_target grid points per
/// shear wavelength on the coarsest axis. Falls back to Vp when mu == 0
/// everywhere (reported through the flag).
inline double select_omega(const MediaModel& media, double gs_target = 10.0,
                           bool* used_vp = nullptr) {
  double vmin = media.min_vs();
  bool fallback = (vmin <= 0.0);
  if (fallback) vmin = media.min_vp();
  if (used_vp) *used_vp = fallback;
  return 2.0 * std::numbers::pi * vmin / (gs_target * media.grid.max_h());
}

struct AbcSpec {
  int layer_width = 20;
  double gamma0 = 0.01 * std::numbers::pi;
  double gamma_max = 2.0 * std::numbers::pi;
  // which boundaries absorb; all sides by default
  std::array<bool, 3> low{true, true, true};
  std::array<bool, 3> high{true, true, true};
};

/// Attach the sponge layer: gamma0 in the interior, plus a quadratic ramp
/// reaching gamma0 + gamma_max on absorbing boundaries.
inline MediaModel apply_abc(const MediaModel& media, const AbcSpec& abc = {}) {
  const Grid& g = media.grid;
  const int L = abc.layer_width;
  for (int a = 0; a < g.dim; ++a) {
    if (abc.low[a] && abc.high[a] && 2 * L > g.nc[a])
      throw std::invalid_argument("apply_abc: layers overlap from opposite sides");
    if (L >= (g.nc[a] + 1) / 2 && (abc.low[a] || abc.high[a]) && 2 * L > g.nc[a])
      throw std::invalid_argument("apply_abc: layer too wide for grid");
  }
  MediaModel out = media;
  for (int k = 0; k < g.nc[2]; ++k)
    for (int j = 0; j < g.nc[1]; ++j)
      for (int i = 0; i < g.nc[0]; ++i) {
        int d = std::numeric_limits<int>::max();
        const int idx[3] = {i, j, k};
        for (int a = 0; a < g.dim; ++a) {
          if (abc.low[a]) d = std::min(d, idx[a]);
          if (abc.high[a]) d = std::min(d, g.nc[a] - 1 - idx[a]);
        }
        double gamma = abc.gamma0;
        if (d < L) {
          double t = static_cast<double>(L - d) / L;
          gamma += abc.gamma_max * t * t;
        }
        out.gamma[g.cell_index(i, j, k)] = gamma;
      }
  return out;
}

}  // namespace helmstack
