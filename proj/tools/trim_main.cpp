#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "trim/io.hpp"
#include "trim/pipeline.hpp"
#include "trim/validate.hpp"

namespace {

struct CliOptions {
  std::string scene_path;
  std::string out_dir = "out";
  double h_forward = 0.0;
  double h_reverse = 0.0;
  double cfl = 0.15;
  int degree = 2;
  double noise = 0.10;
  std::uint64_t seed = 1;
  bool noise_on_total = false;
  int stride = 4;
  int grid_nx = 0;
  int grid_ny = 0;
  std::vector<std::string> variants;
  int threads = 0;
  double solver_tol = 1e-10;
};

void add_common_options(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--scene", opt.scene_path, "scene description file")->required();
  cmd->add_option("--out", opt.out_dir, "output directory");
  cmd->add_option("--h-forward", opt.h_forward, "forward mesh size (default wavelength/10)");
  cmd->add_option("--h-reverse", opt.h_reverse, "reversed mesh size (default 0.8 h_forward)");
  cmd->add_option("--cfl", opt.cfl, "time step as a fraction of h_min/V_max");
  cmd->add_option("--degree", opt.degree, "finite element degree (1 or 2)");
  cmd->add_option("--noise", opt.noise, "multiplicative noise coefficient");
  cmd->add_option("--seed", opt.seed, "noise seed (TRIM_SEED overrides when flag absent)");
  cmd->add_flag("--noise-on-total", opt.noise_on_total, "noise the total field, not the scattered");
  cmd->add_option("--stride", opt.stride, "movie frame stride in steps");
  cmd->add_option("--grid-nx", opt.grid_nx, "imaging grid points in x (default wavelength/8)");
  cmd->add_option("--grid-ny", opt.grid_ny, "imaging grid points in y");
  cmd->add_option("--variant", opt.variants,
                  "imaging variant: full, component_u2, divergence (repeatable)");
  cmd->add_option("--threads", opt.threads, "concurrent jobs (TRIM_THREADS overrides)");
  cmd->add_option("--solver-tol", opt.solver_tol, "per-step relative solver tolerance");
}

trim::RunConfig make_config(const CLI::App* cmd, const CliOptions& opt) {
  trim::RunConfig cfg;
  cfg.scene_path = opt.scene_path;
  cfg.scene = trim::load_scene(opt.scene_path);
  cfg.out_dir = opt.out_dir;
  cfg.h_forward = opt.h_forward;
  cfg.h_reverse = opt.h_reverse;
  cfg.cfl = opt.cfl;
  cfg.degree = opt.degree;
  cfg.noise_coeff = opt.noise;
  cfg.seed = opt.seed;
  cfg.seed_from_cli = cmd->count("--seed") > 0;
  cfg.noise_on_total = opt.noise_on_total;
  cfg.movie_stride = opt.stride;
  cfg.grid_nx = opt.grid_nx;
  cfg.grid_ny = opt.grid_ny;
  cfg.threads = opt.threads;
  cfg.threads_from_cli = cmd->count("--threads") > 0;
  cfg.solver_tol = opt.solver_tol;
  if (!opt.variants.empty()) {
    cfg.variants.clear();
    for (const std::string& v : opt.variants) cfg.variants.push_back(trim::rtm_variant_from_name(v));
  }
  cfg.finalize();
  return cfg;
}

int run_stages(const CLI::App* cmd, const CliOptions& opt, unsigned stages) {
  const trim::RunConfig cfg = make_config(cmd, opt);
  const trim::PipelineResult result = trim::run_pipeline(cfg, stages);
  for (const std::string& f : result.failures) std::fprintf(stderr, "error: %s\n", f.c_str());
  if (result.ok()) {
    std::printf("%zu job(s) done, outputs in %s\n", result.jobs.size(), cfg.out_dir.c_str());
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trim: coupled acoustic-elastic time-reversal imaging"};
  app.require_subcommand(1);

  CliOptions fwd_opt, rev_opt, img_opt, pipe_opt;
  CLI::App* fwd = app.add_subcommand("forward", "synthesize traces and the incident movie");
  add_common_options(fwd, fwd_opt);
  CLI::App* rev = app.add_subcommand("reverse", "back-propagate recorded scattered traces");
  add_common_options(rev, rev_opt);
  CLI::App* img = app.add_subcommand("image", "compute imaging criteria from movie files");
  add_common_options(img, img_opt);
  CLI::App* pipe = app.add_subcommand("pipeline", "forward + noise + reverse + image");
  add_common_options(pipe, pipe_opt);
  CLI::App* val = app.add_subcommand("validate", "run the invariant suite");

  std::string dump_scene, dump_out = "mesh.txt";
  double dump_h = 0.0;
  CLI::App* dump = app.add_subcommand("mesh-dump", "write the triangulation as plain text");
  dump->add_option("--scene", dump_scene, "scene description file")->required();
  dump->add_option("--h", dump_h, "mesh size (default wavelength/10)");
  dump->add_option("--out", dump_out, "output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (val->parsed()) {
      const int failures = trim::run_validation_suite(true);
      std::printf("%s\n", failures == 0 ? "validation suite: all checks passed"
                                        : "validation suite: FAILURES");
      return failures == 0 ? 0 : 1;
    }
    if (dump->parsed()) {
      const trim::SceneSpec scene = trim::load_scene(dump_scene);
      const double h = dump_h > 0.0 ? dump_h : scene.wavelength() / 10.0;
      trim::io::write_mesh(dump_out, trim::generate_mesh(scene, h));
      std::printf("mesh written to %s\n", dump_out.c_str());
      return 0;
    }
    if (fwd->parsed()) return run_stages(fwd, fwd_opt, trim::stage_forward);
    if (rev->parsed()) return run_stages(rev, rev_opt, trim::stage_reverse);
    if (img->parsed()) return run_stages(img, img_opt, trim::stage_image);
    if (pipe->parsed()) return run_stages(pipe, pipe_opt, trim::stage_all);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
