#ifndef TRIM_REVERSAL_HPP
#define TRIM_REVERSAL_HPP

#include <vector>

#include "trim/assembly.hpp"
#include "trim/forward.hpp"
#include "trim/mesh.hpp"
#include "trim/stepper.hpp"

namespace trim {

/// The time-reversed problem: background operators on the reversed mesh plus
/// the per-step Dirichlet schedule p^R(t') = p_noisy(T_f - t') at the SRA
/// receiver nodes. schedule has n_steps + 1 rows (both endpoints included).
struct TRProblem {
  Mesh mesh;
  DofMap dofs;
  OperatorSet ops;  // assembled with inclusions disabled
  std::vector<int> sra_fluid_dofs;
  std::vector<Vec> schedule;
  double dt = 0.0;
  int n_steps = 0;
  double t_final = 0.0;
  StepperConfig stepper;
};

struct ReversalConfig {
  double cfl = 0.15;
  int degree = 2;
  StepperConfig stepper;
};

/// Validates that the receiver vertices carry fluid dofs and returns them as
/// global Dirichlet rows for the step operator.
std::vector<int> sra_dirichlet_dofs(const DofMap& dofs, const std::vector<int>& vertices);

TRProblem build_tr_problem(const SceneSpec& scene, double h_reverse, const TraceRecord& traces,
                           int sra_index, const ReversalConfig& config);

/// Back-propagates the schedule through the background medium and samples the
/// reversed solid field (in its conventional + orientation) on an
/// nx x ny grid every movie_stride steps.
FieldMovie run_reversed(const TRProblem& problem, int grid_nx, int grid_ny, int movie_stride);

}  // namespace trim

#endif
