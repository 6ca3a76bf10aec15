#ifndef TRIM_FORWARD_HPP
#define TRIM_FORWARD_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "trim/assembly.hpp"
#include "trim/mesh.hpp"
#include "trim/scene.hpp"
#include "trim/stepper.hpp"

namespace trim {

/// Ricker wavelet (1 - 2 pi^2 (nu0 t - 1)^2) exp(-pi^2 (nu0 t - 1)^2).
double ricker(double t, double nu0);

struct TraceRecord {
  enum class Kind { total, incident, scattered, scattered_noisy };
  Kind kind = Kind::total;
  std::vector<double> times;              // uniform, includes t = 0 and T_f
  std::vector<int> receiver_vertices;     // mesh vertex ids (snapped)
  std::vector<Point> receiver_positions;
  std::vector<Vec> values;                // values[time][receiver], Pa

  int n_times() const { return static_cast<int>(times.size()); }
  int n_receivers() const { return static_cast<int>(receiver_positions.size()); }
  double t_final() const { return times.empty() ? 0.0 : times.back(); }
  /// Linear interpolation in time, clamped to the recorded range.
  void sample(double t, Vec& out) const;
};

const char* trace_kind_name(TraceRecord::Kind k);
TraceRecord::Kind trace_kind_from_name(const std::string& name);

struct MovieFrame {
  Vec u1, u2, div;  // each nx*ny, row-major
};

/// Solid-field samples (u1, u2, div u) on a regular grid, every stride steps.
struct FieldMovie {
  int nx = 0, ny = 0;
  Point origin;
  double dx = 0.0, dy = 0.0;
  int stride = 1;
  double dt = 0.0;  // step size of the producing run
  std::vector<MovieFrame> frames;

  int n_frames() const { return static_cast<int>(frames.size()); }
  double frame_interval() const { return stride * dt; }
  double coverage() const { return n_frames() * frame_interval(); }
  bool empty() const { return frames.empty(); }
  bool same_grid(const FieldMovie& other) const;
};

struct ForwardConfig {
  double cfl = 0.15;          // fraction of h_min / V_max (degree-2 safe default)
  int degree = 2;
  double t_final = 0.0;       // <= 0: scene value, else derived from geometry
  int movie_stride = 4;
  StepperConfig stepper;
};

struct ForwardOutput {
  std::vector<TraceRecord> traces;  // one per SRA
  FieldMovie movie;                 // filled by run_incident only
  double dt = 0.0;
  int n_steps = 0;
};

/// Resolve the simulation horizon and step count: dt is reduced from the
/// stability bound so that n_steps * dt lands exactly on the horizon.
void resolve_time_grid(const SceneSpec& scene, const Mesh& mesh, const Point& source,
                       const ForwardConfig& config, double& dt, int& n_steps);

/// Full run with inclusions; records pressure traces on every SRA.
ForwardOutput run_total(const SceneSpec& scene, const Mesh& mesh, const DofMap& dofs,
                        const Point& source, const ForwardConfig& config);

/// Background run (no inclusions); records traces and the solid velocity
/// movie on a grid_nx x grid_ny sample grid for the imaging stage.
ForwardOutput run_incident(const SceneSpec& scene, const Mesh& mesh, const DofMap& dofs,
                           const Point& source, const ForwardConfig& config, int grid_nx,
                           int grid_ny);

/// total - incident, element-wise on identical time/receiver grids.
TraceRecord scattered(const TraceRecord& total, const TraceRecord& incident);

/// Multiplicative Gaussian noise: value' = (1 + coeff g) value with g iid
/// standard normal, deterministic for a given seed.
TraceRecord add_noise(const TraceRecord& traces, double coeff, std::uint64_t seed);

/// Portable standard-normal generator (explicit Box-Muller over mt19937_64).
class GaussianStream {
public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}
  double next();

private:
  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Samples the solid field onto a grid every stride steps; frames are kept
/// for step indices n with n % stride == 0 and n < n_steps, so the frame
/// count is ceil(n_steps / stride). sign = -1 emits the time-reversed field
/// in its conventional orientation.
struct MovieRecorder {
  const SampleGrid& grid;
  const DofMap& dofs;
  FieldMovie movie;
  int n_steps;
  double sign;

  MovieRecorder(const SampleGrid& g, const DofMap& d, int stride, double dt, int steps,
                double sign_ = 1.0);
  void capture(const FieldState& state);
};

}  // namespace trim

#endif
