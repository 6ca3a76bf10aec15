#ifndef TRIM_CONFIG_HPP
#define TRIM_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "trim/imaging.hpp"
#include "trim/scene.hpp"

namespace trim {

/// Scene description file: flat key/value text with [section] headers.
/// Sections: domain, fluid, tissue, timing, boundaries (once);
/// skin (optional); inclusion, sra, source (repeatable).
SceneSpec load_scene(const std::string& path);
SceneSpec parse_scene(const std::string& text, const std::string& origin = "<string>");

/// Everything a pipeline run needs beyond the scene. Zeros mean "derive":
/// h_forward from the wavelength, h_reverse from h_forward, the imaging grid
/// from the wavelength, threads from the hardware.
struct RunConfig {
  std::string scene_path;
  SceneSpec scene;
  double h_forward = 0.0;
  double h_reverse = 0.0;
  double cfl = 0.15;
  int degree = 2;
  double noise_coeff = 0.10;
  std::uint64_t seed = 1;
  bool seed_from_cli = false;
  bool noise_on_total = false;  // noise the total field instead of the scattered one
  int movie_stride = 4;
  int grid_nx = 0;
  int grid_ny = 0;
  std::vector<RtmVariant> variants = {RtmVariant::component_u2};
  int threads = 0;
  bool threads_from_cli = false;
  double solver_tol = 1e-10;
  std::string out_dir = "out";

  /// Applies environment overrides (TRIM_SEED, TRIM_THREADS; flags win) and
  /// resolves every derived quantity against the scene.
  void finalize();

  double wavelength() const { return scene.wavelength(); }
  double resolved_h_forward() const;
  double resolved_h_reverse() const;
  int resolved_grid_nx() const;
  int resolved_grid_ny() const;
  int resolved_threads() const;
  std::uint64_t job_seed(int job_index) const;
};

}  // namespace trim

#endif
