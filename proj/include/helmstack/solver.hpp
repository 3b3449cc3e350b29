#pragma once

#include <filesystem>
#include <numbers>
#include <optional>
#include <string>

#include <json.hpp>

#include "helmstack/analysis.hpp"
#include "helmstack/io.hpp"
#include "helmstack/krylov.hpp"
#include "helmstack/precond.hpp"

namespace helmstack {

/// Full description of one solve; serializes to/from a flat JSON document so
/// any run can be reproduced from its echoed configuration.
struct RunConfig {
  // media source: a builtin generator name, or a velocity-model file path
  std::string media_builtin = "homogeneous";
  std::string media_path;
  int nx = 64, ny = 32, nz = 0;  // nz = 0 selects 2D
  double hx = 1.0, hy = 1.0, hz = 1.0;
  double lambda_factor = 1.0;

  // absorbing sponge layer
  bool abc_enabled = true;
  int abc_layer = 20;
  double abc_gamma0 = 0.01 * std::numbers::pi;
  double abc_gamma_max = 2.0 * std::numbers::pi;

  // frequency: explicit omega wins; otherwise derived from gs_target
  double omega = 0.0;
  double gs_target = 10.0;

  // preconditioner: block-acoustic | monolithic | fp | bfbt | none
  std::string preconditioner = "block-acoustic";
  std::string block_solve = "direct";  // direct | multigrid
  int levels = 2;
  double alpha = 0.1;
  std::string cycle = "W";
  int nu1 = 1, nu2 = 2;

  // Krylov settings
  int restart = 0;
  double tol = 1e-6;
  int max_iters = 2000;
  bool flexible = false;

  std::string output_dir = "out";
  unsigned seed = 1234;
  bool ppm_log_scale = false;

  nlohmann::json to_json() const {
    return nlohmann::json{{"media_builtin", media_builtin},
                          {"media_path", media_path},
                          {"nx", nx},
                          {"ny", ny},
                          {"nz", nz},
                          {"hx", hx},
                          {"hy", hy},
                          {"hz", hz},
                          {"lambda_factor", lambda_factor},
                          {"abc_enabled", abc_enabled},
                          {"abc_layer", abc_layer},
                          {"abc_gamma0", abc_gamma0},
                          {"abc_gamma_max", abc_gamma_max},
                          {"omega", omega},
                          {"gs_target", gs_target},
                          {"preconditioner", preconditioner},
                          {"block_solve", block_solve},
                          {"levels", levels},
                          {"alpha", alpha},
                          {"cycle", cycle},
                          {"nu1", nu1},
                          {"nu2", nu2},
                          {"restart", restart},
                          {"tol", tol},
                          {"max_iters", max_iters},
                          {"flexible", flexible},
                          {"output_dir", output_dir},
                          {"seed", seed},
                          {"ppm_log_scale", ppm_log_scale}};
  }

  static RunConfig from_json(const nlohmann::json& j) {
    RunConfig c;
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("media_builtin", c.media_builtin);
    get("media_path", c.media_path);
    get("nx", c.nx);
    get("ny", c.ny);
    get("nz", c.nz);
    get("hx", c.hx);
    get("hy", c.hy);
    get("hz", c.hz);
    get("lambda_factor", c.lambda_factor);
    get("abc_enabled", c.abc_enabled);
    get("abc_layer", c.abc_layer);
    get("abc_gamma0", c.abc_gamma0);
    get("abc_gamma_max", c.abc_gamma_max);
    get("omega", c.omega);
    get("gs_target", c.gs_target);
    get("preconditioner", c.preconditioner);
    get("block_solve", c.block_solve);
    get("levels", c.levels);
    get("alpha", c.alpha);
    get("cycle", c.cycle);
    get("nu1", c.nu1);
    get("nu2", c.nu2);
    get("restart", c.restart);
    get("tol", c.tol);
    get("max_iters", c.max_iters);
    get("flexible", c.flexible);
    get("output_dir", c.output_dir);
    get("seed", c.seed);
    get("ppm_log_scale", c.ppm_log_scale);
    return c;
  }
};

struct RunResult {
  SolverReport report;
  double omega = 0.0;
  long n = 0, m = 0;
  Vec solution;  // displacement faces then pressure cells
  SaddleSystem system;
};

namespace detail {

inline MediaModel media_from_config(const RunConfig& cfg) {
  MediaModel media;
  if (!cfg.media_path.empty()) {
    media = media_from_ehgrid(read_ehgrid(cfg.media_path));
  } else {
    Grid g = cfg.nz > 0 ? Grid(cfg.nx, cfg.ny, cfg.nz, cfg.hx, cfg.hy, cfg.hz)
                        : Grid(cfg.nx, cfg.ny, cfg.hx, cfg.hy);
    g.validate();
    media = builtin_media(cfg.media_builtin, g, cfg.lambda_factor);
  }
  if (cfg.abc_enabled) {
    AbcSpec abc;
    abc.layer_width = cfg.abc_layer;
    abc.gamma0 = cfg.abc_gamma0;
    abc.gamma_max = cfg.abc_gamma_max;
    media = apply_abc(media, abc);
  }
  return media;
}

inline MgOptions mg_options_from_config(const RunConfig& cfg, int dim,
                                        bool monolithic) {
  MgOptions opt;
  opt.levels = cfg.levels;
  if (cfg.cycle == "W")
    opt.cycle = CycleType::W;
  else if (cfg.cycle == "V")
    opt.cycle = CycleType::V;
  else
    throw std::invalid_argument("config: cycle must be V or W");
  opt.nu1 = cfg.nu1;
  opt.nu2 = cfg.nu2;
  opt.smoother = monolithic ? SmootherParams::vanka_rb()
                 : dim == 3 ? SmootherParams::jacobi_3d()
                            : SmootherParams::jacobi_2d();
  opt.mixed_intergrid = (dim == 3) && !monolithic;
  return opt;
}

}  // namespace detail

/// Assemble the configured problem, build the requested preconditioner, and
/// run right-preconditioned GMRES on the point-source problem.
inline RunResult run_solve(const RunConfig& cfg) {
  MediaModel media = detail::media_from_config(cfg);
  const double omega =
      cfg.omega > 0.0 ? cfg.omega : select_omega(media, cfg.gs_target);
  RunResult res;
  res.system = assemble_saddle(media, omega);
  const SaddleSystem& s = res.system;
  res.omega = omega;
  res.n = s.n;
  res.m = s.m;

  const bool direct = cfg.block_solve == "direct";
  if (!direct && cfg.block_solve != "multigrid")
    throw std::invalid_argument("config: block_solve must be direct or multigrid");
  LinOp M;  // empty = unpreconditioned
  FlopLedger led;
  std::optional<BlockAcousticPrec> block;
  std::optional<MonolithicPrec> mono;
  std::optional<SchurTriangularPrec> schur;
  if (cfg.preconditioner == "block-acoustic" || cfg.preconditioner == "fp" ||
      cfg.preconditioner == "bfbt") {
    PressureOperator Ap =
        build_Ap(media, omega, ApVariant::RightWeighted, s.topo, s.G);
    MgOptions opt = detail::mg_options_from_config(cfg, media.grid.dim, false);
    if (cfg.preconditioner == "block-acoustic") {
      block = direct ? BlockAcousticPrec::make_direct(s, Ap)
                     : BlockAcousticPrec::make_multigrid(s, Ap, cfg.alpha, opt);
      M = [&res2 = *block, &led](std::span<const cplx> v) {
        return res2.apply(v, &led);
      };
    } else {
      SchurKind kind =
          cfg.preconditioner == "fp" ? SchurKind::Fp : SchurKind::Bfbt;
      schur = direct ? SchurTriangularPrec::make_direct(s, Ap, kind)
                     : SchurTriangularPrec::make_multigrid(s, Ap, kind,
                                                           cfg.alpha, opt);
      M = [&res2 = *schur, &led](std::span<const cplx> v) {
        return res2.apply(v, &led);
      };
    }
  } else if (cfg.preconditioner == "monolithic") {
    MgOptions opt = detail::mg_options_from_config(cfg, media.grid.dim, true);
    mono = MonolithicPrec::make(s, cfg.alpha, opt);
    M = [&res2 = *mono, &led](std::span<const cplx> v) {
      return res2.apply(v, &led);
    };
  } else if (cfg.preconditioner != "none") {
    throw std::invalid_argument("config: unknown preconditioner '" +
                                cfg.preconditioner + "'");
  }

  SparseMatrix K = s.full();
  LinOp A = [&K, &led](std::span<const cplx> v) {
    return K.apply(v, &led.other);
  };
  Vec b = point_source(s);
  KrylovConfig kc;
  kc.restart = cfg.restart;
  kc.tol = cfg.tol;
  kc.max_iters = cfg.max_iters;
  res.solution.clear();
  res.report = cfg.flexible ? fgmres_solve(A, M, res.solution, b, kc, &led)
                            : gmres_solve(A, M, res.solution, b, kc, &led);
  return res;
}

inline nlohmann::json report_json(const RunConfig& cfg, const RunResult& res) {
  return nlohmann::json{
      {"converged", res.report.converged},
      {"iterations", res.report.iterations},
      {"final_relres", res.report.final_relres},
      {"wall_time", res.report.wall_time},
      {"omega", res.omega},
      {"n", res.n},
      {"m", res.m},
      {"preconditioner", cfg.preconditioner},
      {"block_solve", cfg.block_solve},
      {"flops",
       {{"cycle", res.report.flops.cycle},
        {"coarse", res.report.flops.coarse},
        {"other", res.report.flops.other},
        {"total", res.report.flops.total()}}}};
}

/// Writes report.json, residuals.csv, the per-field binary dumps, the
/// magnitude heatmaps, and the configuration echo into cfg.output_dir.
inline void write_artifacts(const RunConfig& cfg, const RunResult& res) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  auto path = [&](const std::string& name) {
    return (fs::path(cfg.output_dir) / name).string();
  };
  write_text_file(path("report.json"), report_json(cfg, res).dump(2) + "\n");
  write_text_file(path("residuals.csv"), residual_csv(res.report));
  write_text_file(path("config.echo.json"), cfg.to_json().dump(2) + "\n");

  const SaddleSystem& s = res.system;
  std::span<const cplx> x(res.solution);
  for (int c = 0; c < s.grid.dim; ++c)
    write_complex_bin(path("u" + std::to_string(c + 1) + ".bin"),
                      x.subspan(s.layout.offset[c], s.layout.count[c]));
  write_complex_bin(path("p.bin"), x.subspan(s.n, s.m));
  if (s.grid.dim == 2) {
    // heatmaps: the vertical displacement on its face lattice, the pressure
    // on the cell lattice
    const int c = 1;
    write_magnitude_ppm(path("|u|.ppm"),
                        x.subspan(s.layout.offset[c], s.layout.count[c]),
                        s.layout.fs[c][0], s.layout.fs[c][1],
                        cfg.ppm_log_scale);
    write_magnitude_ppm(path("|p|.ppm"), x.subspan(s.n, s.m), s.grid.nc[0],
                        s.grid.nc[1], cfg.ppm_log_scale);
  }
}

/// The 3D recipe: block-acoustic preconditioning with per-block Jacobi
/// W(2,2) cycles (damping 0.8 / 0.8 / 0.2) and mixed intergrid transfers.
inline RunResult solve_3d_default(const MediaModel& media, int levels,
                                  double alpha, double tol = 1e-6,
                                  int restart = 5, int max_iters = 600) {
  if (media.grid.dim != 3)
    throw std::invalid_argument("solve_3d_default: 3D media required");
  RunResult res;
  res.omega = select_omega(media, 10.0);
  res.system = assemble_saddle(media, res.omega);
  const SaddleSystem& s = res.system;
  res.n = s.n;
  res.m = s.m;
  PressureOperator Ap =
      build_Ap(media, res.omega, ApVariant::RightWeighted, s.topo, s.G);
  MgOptions opt;
  opt.levels = levels;
  opt.cycle = CycleType::W;
  opt.nu1 = 2;
  opt.nu2 = 2;
  opt.smoother = SmootherParams::jacobi_3d();
  opt.mixed_intergrid = true;
  BlockAcousticPrec prec =
      BlockAcousticPrec::make_multigrid(s, Ap, alpha, opt);
  SparseMatrix K = s.full();
  FlopLedger led;
  LinOp A = [&K, &led](std::span<const cplx> v) {
    return K.apply(v, &led.other);
  };
  LinOp M = [&prec, &led](std::span<const cplx> v) {
    return prec.apply(v, &led);
  };
  Vec b = point_source(s);
  KrylovConfig kc;
  kc.restart = restart;
  kc.tol = tol;
  kc.max_iters = max_iters;
  res.report = gmres_solve(A, M, res.solution, b, kc, &led);
  return res;
}

}  // namespace helmstack
