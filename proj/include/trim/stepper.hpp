#ifndef TRIM_STEPPER_HPP
#define TRIM_STEPPER_HPP

#include <functional>
#include <span>
#include <vector>

#include "trim/assembly.hpp"
#include "trim/linalg.hpp"
#include "trim/mesh.hpp"

namespace trim {

/// Two consecutive time levels of the coupled state vector [p; u].
struct FieldState {
  Vec prev;  // level n-1
  Vec curr;  // level n
  int n = 0;
  double dt = 0.0;
  int n_fluid = 0;

  std::span<const double> p_prev() const { return {prev.data(), static_cast<std::size_t>(n_fluid)}; }
  std::span<const double> p_curr() const { return {curr.data(), static_cast<std::size_t>(n_fluid)}; }
  std::span<const double> u_prev() const { return {prev.data() + n_fluid, prev.size() - n_fluid}; }
  std::span<const double> u_curr() const { return {curr.data() + n_fluid, curr.size() - n_fluid}; }
};

FieldState make_initial_state(const OperatorSet& ops, double dt);

struct EnergyReport {
  double kinetic = 0.0;      // J
  double deformation = 0.0;  // J
  double total = 0.0;        // J
  int step = 0;
};

/// Discrete energy of the centered scheme at the midpoint between the two
/// stored levels: 0.5 ||(z_n - z_{n-1})/dt||_M^2 + 0.5 z_n^T K z_{n-1}.
/// Exactly conserved in a closed domain and non-increasing with absorbing
/// forms active, up to solver tolerance.
EnergyReport energy(const FieldState& state, const OperatorSet& ops);

/// dt = cfl * h_min / V_max with h_min the smallest grid spacing and V_max
/// the largest P-wave speed among the scene materials.
double stable_dt(const Mesh& mesh, const SceneSpec& scene, double cfl);

struct StepperConfig {
  double tol = 1e-10;
  int maxit = 600;
  int restart = 40;
  bool explicit_lumped = false;  // fluid-only validation mode
};

/// One-time factory for the constant per-step system
///   [M/dt^2 + B/(2dt)]  with the skew coupling blocks +-C/(2dt),
/// optionally with Dirichlet rows replaced by identity. advance() performs a
/// centered step: stiffness at the current level, first-order terms centered
/// over the two outer levels, one non-symmetric solve per step.
class StepOperator {
public:
  StepOperator(const OperatorSet& ops, double dt, std::vector<int> dirichlet_dofs = {},
               StepperConfig config = {});

  /// Advance by one step; load may be null (no source). dirichlet_values, if
  /// present, prescribes the constrained dofs at the new time level and must
  /// match dirichlet_dofs() in length and order.
  void advance(FieldState& state, const Vec* load = nullptr, double load_scale = 0.0,
               const Vec* dirichlet_values = nullptr);

  const std::vector<int>& dirichlet_dofs() const { return dirichlet_; }
  const OperatorSet& ops() const { return ops_; }
  double dt() const { return dt_; }
  int last_iterations() const { return last_iterations_; }

private:
  void build_system();
  void build_rhs(const FieldState& state, const Vec* load, double load_scale);

  const OperatorSet& ops_;
  double dt_;
  std::vector<int> dirichlet_;
  std::vector<bool> constrained_;
  StepperConfig config_;
  SparseMatrix system_;
  SparseMatrix lumped_mass_;  // explicit mode only
  GmresSolver solver_;
  Vec rhs_, next_, scratch_;
  int last_iterations_ = 0;
};

struct RunOptions {
  const Vec* load = nullptr;                       // fluid load pattern
  std::function<double(double t)> signal;          // load scale at time t
  std::function<void(int step, Vec&)> dirichlet;   // values at the new level
  std::function<void(const FieldState&)> observer; // initial state + each step
};

/// March n_steps; the observer sees the initial state and every new state.
void run(StepOperator& op, FieldState& state, int n_steps, const RunOptions& options);

}  // namespace trim

#endif
