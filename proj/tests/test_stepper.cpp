#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "trim/stepper.hpp"

using namespace trim;

namespace {

SceneSpec coupled_scene() {
  SceneSpec s;
  s.domain = {0.0, 1.0, 0.0, 1.0};
  s.interface_y = 0.5;
  s.fluid = FluidMaterial(1.0, 1.0);
  s.tissue = SolidMaterial(1.0, 1.0, 0.25);
  s.skin = s.tissue;
  s.nu0 = 1.0;
  return s;
}

SceneSpec fluid_scene() {
  SceneSpec s;
  s.domain = {0.0, 1.0, 0.0, 1.0};
  s.interface_y = 0.0;
  s.fluid = FluidMaterial(1.0, 1.0);
  s.nu0 = 1.0;
  return s;
}

// Smooth interior bump, zero near the boundary.
double bump(const Point& p, double cx, double cy, double radius) {
  const double r2 = ((p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy)) / (radius * radius);
  return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) * std::exp(1.0) : 0.0;
}

void fill_bump_state(const Mesh&, const DofMap& dofs, FieldState& state) {
  for (std::size_t n = 0; n < dofs.nodes.size(); ++n) {
    const Point& p = dofs.nodes[n];
    if (dofs.fluid_dof[n] >= 0) {
      state.curr[dofs.fluid_dof[n]] = bump(p, 0.5, 0.75, 0.2);
      state.prev[dofs.fluid_dof[n]] = 0.96 * bump(p, 0.5, 0.75, 0.2);
    }
    if (dofs.solid_dof[n][0] >= 0) {
      const int base = dofs.fluid_dof.size() ? 0 : 0;
      (void)base;
      state.curr[state.n_fluid + dofs.solid_dof[n][1]] = 0.5 * bump(p, 0.5, 0.25, 0.2);
      state.prev[state.n_fluid + dofs.solid_dof[n][1]] = 0.49 * bump(p, 0.5, 0.25, 0.2);
    }
  }
}

}  // namespace

TEST_CASE("stable_dt formula") {
  SceneSpec s = fluid_scene();
  const Mesh mesh = generate_mesh(s, 0.5);
  CHECK(stable_dt(mesh, s, 0.5) == doctest::Approx(0.25).epsilon(1e-12));  // h=0.5, V=1
  CHECK(stable_dt(mesh, s, 0.25) == doctest::Approx(0.5 * stable_dt(mesh, s, 0.5)));
  CHECK_THROWS_AS(stable_dt(mesh, s, 0.0), std::invalid_argument);
}

TEST_CASE("stable_dt with the paper presets at h = 1.2 mm") {
  SceneSpec s;
  s.domain = {0.0, 0.012, 0.0, 0.012};
  s.interface_y = 0.0;
  s.fluid = FluidMaterial(1000.0, 2.25e9);
  s.nu0 = 100e3;
  const Mesh mesh = generate_mesh(s, 0.0012);
  CHECK(stable_dt(mesh, s, 0.5) == doctest::Approx(4e-7).epsilon(1e-12));
}

TEST_CASE("refining h halves dt") {
  SceneSpec s = fluid_scene();
  const Mesh coarse = generate_mesh(s, 0.25);
  const Mesh fine = generate_mesh(s, 0.125);
  CHECK(stable_dt(fine, s, 0.5) == doctest::Approx(0.5 * stable_dt(coarse, s, 0.5)));
}

TEST_CASE("zero state and zero load stay zero") {
  const SceneSpec s = coupled_scene();
  const Mesh mesh = generate_mesh(s, 0.25);
  const DofMap dofs = build_dofmap(mesh, 2);
  const OperatorSet ops = assemble_operators(mesh, dofs, s, AssemblyOptions{});
  const double dt = stable_dt(mesh, s, 0.15);
  StepOperator op(ops, dt);
  FieldState state = make_initial_state(ops, dt);
  for (int k = 0; k < 5; ++k) op.advance(state);
  for (double v : state.curr) CHECK(v == 0.0);
  CHECK(state.n == 5);
}

TEST_CASE("single-dof lumped system reproduces the scalar leapfrog recurrence") {
  // hand-built 1x1 operators: M = [m], K = [k]
  OperatorSet ops;
  ops.n_fluid = 1;
  ops.fluid.M = SparseMatrix::identity(1);
  ops.fluid.M.values[0] = 2.5;  // m
  ops.fluid.K = SparseMatrix::identity(1);
  ops.fluid.K.values[0] = 0.8;  // k
  CooBuilder empty;
  ops.fluid.B = empty.finalize(1, 1);
  ops.fluid.E = CooBuilder().finalize(1, 1);

  const double dt = 0.1;
  StepperConfig cfg;
  cfg.explicit_lumped = true;
  StepOperator op(ops, dt, {}, cfg);
  FieldState state = make_initial_state(ops, dt);
  state.prev[0] = 0.3;
  state.curr[0] = 0.4;
  double pm = 0.3, p0 = 0.4;
  for (int n = 0; n < 20; ++n) {
    op.advance(state);
    const double pp = 2.0 * p0 - pm - dt * dt * (0.8 / 2.5) * p0;
    CHECK(state.curr[0] == doctest::Approx(pp).epsilon(1e-14));
    pm = p0;
    p0 = pp;
  }
}

TEST_CASE("implicit path matches the explicit recurrence on a closed fluid mesh") {
  const SceneSpec s = fluid_scene();
  const Mesh mesh = generate_mesh(s, 0.25);
  const DofMap dofs = build_dofmap(mesh, 1);
  const OperatorSet ops = assemble_operators(mesh, dofs, s, AssemblyOptions::closed());
  const double dt = stable_dt(mesh, s, 0.3);

  StepperConfig tight;
  tight.tol = 1e-13;
  StepOperator implicit_op(ops, dt, {}, tight);
  FieldState a = make_initial_state(ops, dt);
  fill_bump_state(mesh, dofs, a);

  // direct dense reference: M p+ = M(2p0 - p-) - dt^2 K p0
  FieldState b = a;
  implicit_op.advance(a);
  Vec rhs(dofs.n_fluid, 0.0), tmp(dofs.n_fluid, 0.0);
  for (int i = 0; i < dofs.n_fluid; ++i) rhs[i] = 2.0 * b.curr[i] - b.prev[i];
  ops.fluid.M.multiply(rhs, tmp);
  ops.fluid.K.multiply_add(b.curr, tmp, -dt * dt);
  Vec expected;
  solve_spd(ops.fluid.M, tmp, expected, 1e-14, 5000);
  for (int i = 0; i < dofs.n_fluid; ++i)
    CHECK(a.curr[i] == doctest::Approx(expected[i]).epsilon(1e-8));
}

TEST_CASE("two steps with reversed state ordering undo one another") {
  const SceneSpec s = coupled_scene();
  const Mesh mesh = generate_mesh(s, 0.25);
  const DofMap dofs = build_dofmap(mesh, 2);
  const OperatorSet ops = assemble_operators(mesh, dofs, s, AssemblyOptions::closed());
  const double dt = stable_dt(mesh, s, 0.1);
  StepperConfig cfg;
  cfg.tol = 1e-13;
  StepOperator op(ops, dt, {}, cfg);

  FieldState state = make_initial_state(ops, dt);
  fill_bump_state(mesh, dofs, state);
  const Vec x0 = state.prev, x1 = state.curr;

  op.advance(state);  // (x1, x2)
  // discrete time reversal: swap the levels and negate the solid components
  std::swap(state.prev, state.curr);
  for (std::size_t i = state.n_fluid; i < state.curr.size(); ++i) {
    state.curr[i] = -state.curr[i];
    state.prev[i] = -state.prev[i];
  }
  op.advance(state);  // back to x0 (with flipped solid sign) in curr

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x0.size(); ++i) {
    const double target = i < static_cast<std::size_t>(state.n_fluid) ? x0[i] : -x0[i];
    num += (state.curr[i] - target) * (state.curr[i] - target);
    den += x0[i] * x0[i];
  }
  CHECK(std::sqrt(num / den) < 1e-10);
  (void)x1;
}

TEST_CASE("energy: zero state reports zeros") {
  const SceneSpec s = coupled_scene();
  const Mesh mesh = generate_mesh(s, 0.25);
  const DofMap dofs = build_dofmap(mesh, 2);
  const OperatorSet ops = assemble_operators(mesh, dofs, s, AssemblyOptions{});
  FieldState state = make_initial_state(ops, 0.01);
  const EnergyReport e = energy(state, ops);
  CHECK(e.kinetic == 0.0);
  CHECK(e.deformation == 0.0);
  CHECK(e.total == 0.0);
}

TEST_CASE("closed-domain energy is conserved over 1000 steps at cfl 0.3") {
  const SceneSpec s = coupled_scene();
  const Mesh mesh = generate_mesh(s, 0.1);
  const DofMap dofs = build_dofmap(mesh, 1);  // degree 1: cfl 0.3 is stable
  const OperatorSet ops = assemble_operators(mesh, dofs, s, AssemblyOptions::closed());
  const double dt = stable_dt(mesh, s, 0.3);
  StepOperator op(ops, dt);
  FieldState state = make_initial_state(ops, dt);
  fill_bump_state(mesh, dofs, state);

  const double e0 = energy(state, ops).total;
  REQUIRE(e0 > 0.0);
  double max_drift = 0.0;
  for (int k = 0; k < 1000; ++k) {
    op.advance(state);
    max_drift = std::max(max_drift, std::abs(energy(state, ops).total - e0) / e0);
  }
  CHECK(max_drift < 1e-3);
}

TEST_CASE("energy decays monotonically with absorbing boundaries") {
  const SceneSpec s = coupled_scene();
  const Mesh mesh = generate_mesh(s, 0.1);
  const DofMap dofs = build_dofmap(mesh, 1);
  const OperatorSet ops = assemble_operators(mesh, dofs, s, AssemblyOptions{});
  const double dt = stable_dt(mesh, s, 0.3);
  StepperConfig cfg;
  cfg.tol = 1e-13;
  StepOperator op(ops, dt, {}, cfg);
  FieldState state = make_initial_state(ops, dt);
  fill_bump_state(mesh, dofs, state);

  const double e0 = energy(state, ops).total;
  double prev = e0;
  for (int k = 0; k < 300; ++k) {
    op.advance(state);
    const double e = energy(state, ops).total;
    CHECK(e <= prev * (1.0 + 1e-10));
    prev = e;
  }
  CHECK(prev < 0.9 * e0);  // the bump actually radiated out
}

TEST_CASE("linearity of the run in the source amplitude") {
  const SceneSpec s = coupled_scene();
  const Mesh mesh = generate_mesh(s, 0.25);
  const DofMap dofs = build_dofmap(mesh, 2);
  const OperatorSet ops = assemble_operators(mesh, dofs, s, AssemblyOptions{});
  const double dt = stable_dt(mesh, s, 0.1);
  const Vec load = assemble_sources(mesh, dofs, {0.5, 0.75});
  auto signal = [](double t) { return std::sin(40.0 * t); };

  StepperConfig cfg;
  cfg.tol = 1e-13;
  auto run_with_scale = [&](double alpha) {
    StepOperator op(ops, dt, {}, cfg);
    FieldState state = make_initial_state(ops, dt);
    RunOptions opts;
    opts.load = &load;
    opts.signal = [&](double t) { return alpha * signal(t); };
    run(op, state, 60, opts);
    return state.curr;
  };
  const Vec one = run_with_scale(1.0);
  const Vec three = run_with_scale(3.0);
  double max_dev = 0.0, scale_ref = 0.0;
  for (std::size_t i = 0; i < one.size(); ++i) {
    max_dev = std::max(max_dev, std::abs(three[i] - 3.0 * one[i]));
    scale_ref = std::max(scale_ref, std::abs(three[i]));
  }
  CHECK(max_dev <= 1e-9 * scale_ref);
}

TEST_CASE("observer sees the initial state and every step") {
  const SceneSpec s = fluid_scene();
  const Mesh mesh = generate_mesh(s, 0.5);
  const DofMap dofs = build_dofmap(mesh, 1);
  const OperatorSet ops = assemble_operators(mesh, dofs, s, AssemblyOptions{});
  StepOperator op(ops, 0.01);
  FieldState state = make_initial_state(ops, 0.01);
  int calls = 0;
  RunOptions opts;
  opts.observer = [&](const FieldState& st) {
    CHECK(st.n == calls);
    ++calls;
  };
  run(op, state, 7, opts);
  CHECK(calls == 8);

  // movie-style stride counting: frames at n % k == 0, n < n_steps
  int frames = 0;
  for (int n = 0; n < 7; ++n)
    if (n % 3 == 0) ++frames;
  CHECK(frames == (7 + 2) / 3);  // ceil(7/3)
}

TEST_CASE("dirichlet row replacement pins constrained dofs") {
  const SceneSpec s = fluid_scene();
  const Mesh mesh = generate_mesh(s, 0.25);
  const DofMap dofs = build_dofmap(mesh, 2);
  const OperatorSet ops = assemble_operators(mesh, dofs, s, AssemblyOptions{});
  const double dt = stable_dt(mesh, s, 0.15);

  std::vector<int> constrained = {3, 17, 42};
  StepOperator op(ops, dt, constrained);
  FieldState state = make_initial_state(ops, dt);
  Vec values = {0.5, -0.25, 1.5};
  op.advance(state, nullptr, 0.0, &values);
  for (std::size_t k = 0; k < constrained.size(); ++k)
    CHECK(state.curr[constrained[k]] == doctest::Approx(values[k]).epsilon(1e-9));
}

TEST_CASE("second-order temporal accuracy under dt halving") {
  const SceneSpec s = fluid_scene();
  const Mesh mesh = generate_mesh(s, 0.25);
  const DofMap dofs = build_dofmap(mesh, 2);
  const OperatorSet ops = assemble_operators(mesh, dofs, s, AssemblyOptions::closed());
  const Vec load = assemble_sources(mesh, dofs, {0.52, 0.48});
  auto signal = [](double t) { return std::exp(-80.0 * (t - 0.25) * (t - 0.25)); };
  const double t_end = 1.0;

  StepperConfig cfg;
  cfg.tol = 1e-13;
  auto terminal = [&](double dt) {
    StepOperator op(ops, dt, {}, cfg);
    FieldState state = make_initial_state(ops, dt);
    RunOptions opts;
    opts.load = &load;
    opts.signal = signal;
    run(op, state, static_cast<int>(std::round(t_end / dt)), opts);
    return state.curr;
  };
  const double dt0 = 0.02;
  const Vec ref = terminal(dt0 / 8.0);
  auto err = [&](const Vec& v) {
    double e = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) e += (v[i] - ref[i]) * (v[i] - ref[i]);
    return std::sqrt(e);
  };
  const double e1 = err(terminal(dt0));
  const double e2 = err(terminal(dt0 / 2.0));
  const double factor = e1 / e2;
  CHECK(factor > 3.2);  // 4 +- 20%
  CHECK(factor < 4.8);
}
