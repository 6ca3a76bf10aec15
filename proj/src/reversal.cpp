#include "trim/reversal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trim {

std::vector<int> sra_dirichlet_dofs(const DofMap& dofs, const std::vector<int>& vertices) {
  std::vector<int> rows;
  rows.reserve(vertices.size());
  for (int v : vertices) {
    if (v < 0 || v >= static_cast<int>(dofs.fluid_dof.size()) || dofs.fluid_dof[v] < 0)
      throw std::invalid_argument("sra_dirichlet_dofs: receiver is not a fluid node");
    rows.push_back(dofs.fluid_dof[v]);  // fluid dofs lead the global layout
  }
  return rows;
}

TRProblem build_tr_problem(const SceneSpec& scene, double h_reverse, const TraceRecord& traces,
                           int sra_index, const ReversalConfig& config) {
  if (traces.n_times() < 2) throw std::invalid_argument("build_tr_problem: empty traces");
  const double t_final = scene.t_final > 0.0 ? scene.t_final : traces.t_final();
  if (traces.t_final() < t_final * (1.0 - 1e-9))
    throw std::invalid_argument("build_tr_problem: traces shorter than the horizon");

  TRProblem problem;
  problem.t_final = t_final;
  problem.stepper = config.stepper;
  problem.mesh = generate_mesh(scene, h_reverse);
  problem.dofs = build_dofmap(problem.mesh, config.degree);

  AssemblyOptions options;
  options.with_inclusions = false;  // back-propagation ignores the inclusions
  problem.ops = assemble_operators(problem.mesh, problem.dofs, scene, options);

  const double dt_stable = stable_dt(problem.mesh, scene, config.cfl);
  problem.n_steps = std::max(1, static_cast<int>(std::ceil(t_final / dt_stable - 1e-12)));
  problem.dt = t_final / problem.n_steps;

  // receiver mapping between the two discretizations: by column when the
  // snapped counts agree, otherwise by nearest recorded position
  const std::vector<int>& vertices = problem.mesh.sra_vertices.at(sra_index);
  std::vector<int> column(vertices.size());
  if (static_cast<int>(vertices.size()) == traces.n_receivers()) {
    for (std::size_t k = 0; k < vertices.size(); ++k) column[k] = static_cast<int>(k);
  } else {
    for (std::size_t k = 0; k < vertices.size(); ++k) {
      const Point p = problem.mesh.vertices[vertices[k]];
      int best = 0;
      double dist = std::hypot(p.x - traces.receiver_positions[0].x,
                               p.y - traces.receiver_positions[0].y);
      for (int r = 1; r < traces.n_receivers(); ++r) {
        const double d = std::hypot(p.x - traces.receiver_positions[r].x,
                                    p.y - traces.receiver_positions[r].y);
        if (d < dist) {
          dist = d;
          best = r;
        }
      }
      column[k] = best;
    }
  }
  problem.sra_fluid_dofs = sra_dirichlet_dofs(problem.dofs, vertices);

  // schedule[k] = traces(T_f - k dt), linearly interpolated in time
  problem.schedule.resize(problem.n_steps + 1);
  Vec sampled;
  for (int k = 0; k <= problem.n_steps; ++k) {
    traces.sample(t_final - k * problem.dt, sampled);
    Vec row(vertices.size());
    for (std::size_t r = 0; r < vertices.size(); ++r) row[r] = sampled[column[r]];
    problem.schedule[k] = std::move(row);
  }
  return problem;
}

FieldMovie run_reversed(const TRProblem& problem, int grid_nx, int grid_ny, int movie_stride) {
  StepOperator op(problem.ops, problem.dt, problem.sra_fluid_dofs, problem.stepper);
  FieldState state = make_initial_state(problem.ops, problem.dt);

  const SampleGrid grid = sample_points(problem.mesh, problem.dofs, grid_nx, grid_ny);
  // the marched solid variable is the negative of the reversed field
  MovieRecorder recorder(grid, problem.dofs, movie_stride, problem.dt, problem.n_steps, -1.0);

  RunOptions opts;
  opts.dirichlet = [&](int step, Vec& values) { values = problem.schedule.at(step); };
  opts.observer = [&](const FieldState& st) { recorder.capture(st); };
  run(op, state, problem.n_steps, opts);
  return std::move(recorder.movie);
}

}  // namespace trim
