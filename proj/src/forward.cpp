#include "trim/forward.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace trim {

double ricker(double t, double nu0) {
  const double a = M_PI * (nu0 * t - 1.0);
  const double a2 = a * a;
  return (1.0 - 2.0 * a2) * std::exp(-a2);
}

void TraceRecord::sample(double t, Vec& out) const {
  out.assign(n_receivers(), 0.0);
  if (times.empty()) return;
  if (t <= times.front()) {
    out = values.front();
    return;
  }
  if (t >= times.back()) {
    out = values.back();
    return;
  }
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times.begin());
  const double t0 = times[k - 1], t1 = times[k];
  const double w = (t - t0) / (t1 - t0);
  for (int r = 0; r < n_receivers(); ++r)
    out[r] = (1.0 - w) * values[k - 1][r] + w * values[k][r];
}

const char* trace_kind_name(TraceRecord::Kind k) {
  switch (k) {
    case TraceRecord::Kind::total: return "total";
    case TraceRecord::Kind::incident: return "incident";
    case TraceRecord::Kind::scattered: return "scattered";
    case TraceRecord::Kind::scattered_noisy: return "scattered_noisy";
  }
  return "unknown";
}

TraceRecord::Kind trace_kind_from_name(const std::string& name) {
  if (name == "total") return TraceRecord::Kind::total;
  if (name == "incident") return TraceRecord::Kind::incident;
  if (name == "scattered") return TraceRecord::Kind::scattered;
  if (name == "scattered_noisy") return TraceRecord::Kind::scattered_noisy;
  throw std::invalid_argument("unknown trace kind: " + name);
}

bool FieldMovie::same_grid(const FieldMovie& other) const {
  return nx == other.nx && ny == other.ny && std::abs(origin.x - other.origin.x) < 1e-12 &&
         std::abs(origin.y - other.origin.y) < 1e-12 && std::abs(dx - other.dx) < 1e-12 &&
         std::abs(dy - other.dy) < 1e-12;
}

double GaussianStream::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // explicit Box-Muller on 53-bit uniforms for a platform-independent stream
  double u1 = 0.0;
  do {
    u1 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  } while (u1 <= 0.0);
  const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = r * std::sin(angle);
  have_spare_ = true;
  return r * std::cos(angle);
}

void resolve_time_grid(const SceneSpec& scene, const Mesh& mesh, const Point& source,
                       const ForwardConfig& config, double& dt, int& n_steps) {
  double horizon = config.t_final;
  if (horizon <= 0.0) horizon = scene.t_final;
  if (horizon <= 0.0) horizon = default_t_final(scene, source);
  const double dt_stable = stable_dt(mesh, scene, config.cfl);
  n_steps = std::max(1, static_cast<int>(std::ceil(horizon / dt_stable - 1e-12)));
  dt = horizon / n_steps;  // exact landing on the horizon, dt <= dt_stable
}

namespace {

struct TraceRecorder {
  std::vector<int> fluid_dofs;
  TraceRecord record;

  TraceRecorder(const Mesh& mesh, const DofMap& dofs, int sra_index, TraceRecord::Kind kind) {
    record.kind = kind;
    for (int v : mesh.sra_vertices[sra_index]) {
      const int dof = dofs.fluid_dof[v];
      if (dof < 0) throw std::logic_error("TraceRecorder: receiver is not a fluid node");
      fluid_dofs.push_back(dof);
      record.receiver_vertices.push_back(v);
      record.receiver_positions.push_back(mesh.vertices[v]);
    }
  }

  void capture(const FieldState& state) {
    record.times.push_back(state.n * state.dt);
    Vec row(fluid_dofs.size());
    for (std::size_t r = 0; r < fluid_dofs.size(); ++r) row[r] = state.curr[fluid_dofs[r]];
    record.values.push_back(std::move(row));
  }
};

ForwardOutput forward_run(const SceneSpec& scene, const Mesh& mesh, const DofMap& dofs,
                          const Point& source, const ForwardConfig& config, bool with_inclusions,
                          int grid_nx, int grid_ny) {
  AssemblyOptions options;
  options.with_inclusions = with_inclusions;
  const OperatorSet ops = assemble_operators(mesh, dofs, scene, options);
  ForwardOutput out;
  resolve_time_grid(scene, mesh, source, config, out.dt, out.n_steps);

  const Vec load = assemble_sources(mesh, dofs, source);
  StepOperator op(ops, out.dt, {}, config.stepper);
  FieldState state = make_initial_state(ops, out.dt);

  std::vector<TraceRecorder> recorders;
  recorders.reserve(mesh.sra_vertices.size());
  for (std::size_t s = 0; s < mesh.sra_vertices.size(); ++s)
    recorders.emplace_back(mesh, dofs, static_cast<int>(s),
                           with_inclusions ? TraceRecord::Kind::total
                                           : TraceRecord::Kind::incident);

  SampleGrid grid;
  std::unique_ptr<MovieRecorder> movie;
  if (grid_nx > 0 && grid_ny > 0) {
    if (!scene.has_solid())
      throw std::invalid_argument("run_incident: movie requires a solid subdomain");
    grid = sample_points(mesh, dofs, grid_nx, grid_ny);
    movie = std::make_unique<MovieRecorder>(grid, dofs, config.movie_stride, out.dt,
                                            out.n_steps, 1.0);
  }

  RunOptions run_opts;
  run_opts.load = &load;
  const double nu0 = scene.nu0;
  run_opts.signal = [nu0](double t) { return ricker(t, nu0); };
  run_opts.observer = [&](const FieldState& st) {
    for (TraceRecorder& r : recorders) r.capture(st);
    if (movie) movie->capture(st);
  };
  run(op, state, out.n_steps, run_opts);

  for (TraceRecorder& r : recorders) out.traces.push_back(std::move(r.record));
  if (movie) out.movie = std::move(movie->movie);
  return out;
}

}  // namespace

MovieRecorder::MovieRecorder(const SampleGrid& g, const DofMap& d, int stride, double dt,
                             int steps, double sign_)
    : grid(g), dofs(d), n_steps(steps), sign(sign_) {
  movie.nx = g.nx;
  movie.ny = g.ny;
  movie.origin = g.origin;
  movie.dx = g.dx;
  movie.dy = g.dy;
  movie.stride = std::max(1, stride);
  movie.dt = dt;
}

void MovieRecorder::capture(const FieldState& state) {
  if (state.n % movie.stride != 0 || state.n >= n_steps) return;
  const std::size_t npts = grid.points.size();
  MovieFrame frame;
  frame.u1.assign(npts, 0.0);
  frame.u2.assign(npts, 0.0);
  frame.div.assign(npts, 0.0);
  const double* u = state.curr.data() + state.n_fluid;
  const int npt = dofs.nodes_per_tri();
  for (std::size_t p = 0; p < npts; ++p) {
    const SamplePoint& sp = grid.points[p];
    double u1 = 0.0, u2 = 0.0, div = 0.0;
    for (int k = 0; k < npt; ++k) {
      const int node = dofs.tri_nodes[sp.tri][k];
      const double a = u[dofs.solid_dof[node][0]];
      const double b = u[dofs.solid_dof[node][1]];
      u1 += sp.N[k] * a;
      u2 += sp.N[k] * b;
      div += sp.gx[k] * a + sp.gy[k] * b;
    }
    frame.u1[p] = sign * u1;
    frame.u2[p] = sign * u2;
    frame.div[p] = sign * div;
  }
  movie.frames.push_back(std::move(frame));
}

ForwardOutput run_total(const SceneSpec& scene, const Mesh& mesh, const DofMap& dofs,
                        const Point& source, const ForwardConfig& config) {
  return forward_run(scene, mesh, dofs, source, config, true, 0, 0);
}

ForwardOutput run_incident(const SceneSpec& scene, const Mesh& mesh, const DofMap& dofs,
                           const Point& source, const ForwardConfig& config, int grid_nx,
                           int grid_ny) {
  return forward_run(scene, mesh, dofs, source, config, false, grid_nx, grid_ny);
}

TraceRecord scattered(const TraceRecord& total, const TraceRecord& incident) {
  if (total.n_times() != incident.n_times() || total.n_receivers() != incident.n_receivers())
    throw std::invalid_argument("scattered: trace grids do not match");
  for (int k = 0; k < total.n_times(); ++k) {
    if (std::abs(total.times[k] - incident.times[k]) > 1e-12 * std::max(1.0, total.times.back()))
      throw std::invalid_argument("scattered: trace time grids differ");
  }
  TraceRecord out = total;
  out.kind = TraceRecord::Kind::scattered;
  for (int k = 0; k < total.n_times(); ++k)
    for (int r = 0; r < total.n_receivers(); ++r) out.values[k][r] -= incident.values[k][r];
  return out;
}

TraceRecord add_noise(const TraceRecord& traces, double coeff, std::uint64_t seed) {
  if (coeff < 0.0) throw std::invalid_argument("add_noise: coeff must be >= 0");
  TraceRecord out = traces;
  out.kind = TraceRecord::Kind::scattered_noisy;
  GaussianStream gauss(seed);
  for (Vec& row : out.values)
    for (double& v : row) v *= 1.0 + coeff * gauss.next();
  return out;
}

}  // namespace trim
