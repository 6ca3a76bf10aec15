#include "trim/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trim {

FieldState make_initial_state(const OperatorSet& ops, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("make_initial_state: dt must be > 0");
  FieldState s;
  s.prev.assign(ops.n_total(), 0.0);
  s.curr.assign(ops.n_total(), 0.0);
  s.n = 0;
  s.dt = dt;
  s.n_fluid = ops.n_fluid;
  return s;
}

EnergyReport energy(const FieldState& state, const OperatorSet& ops) {
  EnergyReport r;
  r.step = state.n;
  const int nf = ops.n_fluid;
  const int nsd = ops.n_solid_dofs();
  const double inv_dt = 1.0 / state.dt;

  Vec rate_f(nf), rate_s(nsd);
  for (int i = 0; i < nf; ++i) rate_f[i] = (state.curr[i] - state.prev[i]) * inv_dt;
  for (int i = 0; i < nsd; ++i)
    rate_s[i] = (state.curr[nf + i] - state.prev[nf + i]) * inv_dt;

  Vec tmp(std::max(nf, nsd));
  if (nf > 0) {
    tmp.resize(nf);
    ops.fluid.M.multiply(rate_f, tmp);
    r.kinetic += 0.5 * dot(rate_f, tmp);
    Vec p_curr(state.curr.begin(), state.curr.begin() + nf);
    Vec p_prev(state.prev.begin(), state.prev.begin() + nf);
    ops.fluid.K.multiply(p_prev, tmp);
    r.deformation += 0.5 * dot(p_curr, tmp);
    if (ops.fluid.E.nnz() > 0) {
      ops.fluid.E.multiply(p_prev, tmp);
      r.deformation += 0.5 * dot(p_curr, tmp);
    }
  }
  if (nsd > 0) {
    tmp.resize(nsd);
    ops.solid.M.multiply(rate_s, tmp);
    r.kinetic += 0.5 * dot(rate_s, tmp);
    Vec u_curr(state.curr.begin() + nf, state.curr.end());
    Vec u_prev(state.prev.begin() + nf, state.prev.end());
    ops.solid.K.multiply(u_prev, tmp);
    r.deformation += 0.5 * dot(u_curr, tmp);
  }
  r.total = r.kinetic + r.deformation;
  return r;
}

double stable_dt(const Mesh& mesh, const SceneSpec& scene, double cfl) {
  if (cfl <= 0.0 || cfl > 1.0) throw std::invalid_argument("stable_dt: cfl must be in (0, 1]");
  double v_max = derive_velocities(scene.fluid).vp;
  if (scene.has_solid()) {
    v_max = std::max(v_max, derive_velocities(scene.tissue).vp);
    if (scene.skin_band) v_max = std::max(v_max, derive_velocities(scene.skin).vp);
    for (const InclusionSpec& inc : scene.inclusions)
      v_max = std::max(v_max, derive_velocities(inc.material).vp);
  }
  return cfl * mesh.min_spacing / v_max;
}

StepOperator::StepOperator(const OperatorSet& ops, double dt, std::vector<int> dirichlet_dofs,
                           StepperConfig config)
    : ops_(ops),
      dt_(dt),
      dirichlet_(std::move(dirichlet_dofs)),
      config_(config),
      solver_(config.tol, config.maxit, config.restart) {
  if (dt_ <= 0.0) throw std::invalid_argument("StepOperator: dt must be > 0");
  const int n = ops_.n_total();
  constrained_.assign(n, false);
  for (int d : dirichlet_) {
    if (d < 0 || d >= n) throw std::invalid_argument("StepOperator: dirichlet dof out of range");
    constrained_[d] = true;
  }
  rhs_.assign(n, 0.0);
  next_.assign(n, 0.0);
  scratch_.assign(n, 0.0);
  if (config_.explicit_lumped) {
    if (ops_.has_solid() || ops_.fluid.B.nnz() > 0 || !dirichlet_.empty())
      throw std::invalid_argument(
          "StepOperator: explicit lumped mode supports unconstrained fluid-only problems");
    lumped_mass_ = lump(ops_.fluid.M);
  } else {
    build_system();
  }
}

void StepOperator::build_system() {
  const int nf = ops_.n_fluid;
  const int n = ops_.n_total();
  const double w_mass = 1.0 / (dt_ * dt_);
  const double w_damp = 1.0 / (2.0 * dt_);

  CooBuilder coo(static_cast<std::size_t>(
      ops_.fluid.M.nnz() + ops_.fluid.B.nnz() +
      (ops_.has_solid() ? ops_.solid.M.nnz() + ops_.solid.B.nnz() + 2 * ops_.C.nnz() : 0) + n));

  auto add_block = [&](const SparseMatrix& m, int row0, int col0, double scale) {
    for (int i = 0; i < m.rows; ++i) {
      if (constrained_[row0 + i]) continue;
      for (std::int64_t k = m.row_offsets[i]; k < m.row_offsets[i + 1]; ++k)
        coo.add(row0 + i, col0 + m.col_indices[k], scale * m.values[k]);
    }
  };
  add_block(ops_.fluid.M, 0, 0, w_mass);
  add_block(ops_.fluid.B, 0, 0, w_damp);
  if (ops_.has_solid()) {
    add_block(ops_.solid.M, nf, nf, w_mass);
    add_block(ops_.solid.B, nf, nf, w_damp);
    add_block(ops_.C, 0, nf, w_damp);
    add_block(ops_.C_t, nf, 0, -w_damp);
  }
  for (int d : dirichlet_) coo.add(d, d, 1.0);
  system_ = coo.finalize(n, n);
  solver_.set_matrix(system_);
}

namespace {

// y[row0 + i] += alpha * (A x)[i] with x read at an offset of the global
// state vector; avoids per-step block copies.
void block_multiply_add(const SparseMatrix& m, const double* x, double* y, double alpha) {
  for (int i = 0; i < m.rows; ++i) {
    double s = 0.0;
    const std::int64_t end = m.row_offsets[i + 1];
    for (std::int64_t k = m.row_offsets[i]; k < end; ++k)
      s += m.values[k] * x[m.col_indices[k]];
    y[i] += alpha * s;
  }
}

}  // namespace

void StepOperator::build_rhs(const FieldState& state, const Vec* load, double load_scale) {
  const int nf = ops_.n_fluid;
  const int n = ops_.n_total();
  const double w_mass = 1.0 / (dt_ * dt_);
  const double w_damp = 1.0 / (2.0 * dt_);

  // scratch = 2 z0 - z-
  for (int i = 0; i < n; ++i) scratch_[i] = 2.0 * state.curr[i] - state.prev[i];
  std::fill(rhs_.begin(), rhs_.end(), 0.0);

  const double* p0 = state.curr.data();
  const double* pm = state.prev.data();
  const double* u0 = state.curr.data() + nf;
  const double* um = state.prev.data() + nf;

  block_multiply_add(ops_.fluid.M, scratch_.data(), rhs_.data(), w_mass);
  block_multiply_add(ops_.fluid.K, p0, rhs_.data(), -1.0);
  if (ops_.fluid.E.nnz() > 0) block_multiply_add(ops_.fluid.E, p0, rhs_.data(), -1.0);
  if (ops_.fluid.B.nnz() > 0) block_multiply_add(ops_.fluid.B, pm, rhs_.data(), w_damp);
  if (load != nullptr && load_scale != 0.0) {
    for (int i = 0; i < nf; ++i) rhs_[i] += load_scale * (*load)[i];
  }

  if (ops_.has_solid()) {
    block_multiply_add(ops_.solid.M, scratch_.data() + nf, rhs_.data() + nf, w_mass);
    block_multiply_add(ops_.solid.K, u0, rhs_.data() + nf, -1.0);
    if (ops_.solid.B.nnz() > 0)
      block_multiply_add(ops_.solid.B, um, rhs_.data() + nf, w_damp);
    block_multiply_add(ops_.C_t, pm, rhs_.data() + nf, -w_damp);
    block_multiply_add(ops_.C, um, rhs_.data(), w_damp);
  }
}

void StepOperator::advance(FieldState& state, const Vec* load, double load_scale,
                           const Vec* dirichlet_values) {
  const int n = ops_.n_total();
  if (static_cast<int>(state.curr.size()) != n)
    throw std::invalid_argument("StepOperator: state size mismatch");

  if (config_.explicit_lumped) {
    // p+ = 2 p0 - p- + dt^2 Ml^{-1} (L f - (K + E) p0)
    Vec r(n, 0.0);
    ops_.fluid.K.multiply(state.curr, r);
    if (ops_.fluid.E.nnz() > 0) ops_.fluid.E.multiply_add(state.curr, r, 1.0);
    for (int i = 0; i < n; ++i) {
      double f = -r[i];
      if (load != nullptr) f += load_scale * (*load)[i];
      next_[i] = 2.0 * state.curr[i] - state.prev[i] + dt_ * dt_ * f / lumped_mass_.values[i];
    }
  } else {
    build_rhs(state, load, load_scale);
    if (!dirichlet_.empty()) {
      if (dirichlet_values == nullptr || dirichlet_values->size() != dirichlet_.size())
        throw std::invalid_argument("StepOperator: dirichlet values missing or mis-sized");
      for (std::size_t k = 0; k < dirichlet_.size(); ++k)
        rhs_[dirichlet_[k]] = (*dirichlet_values)[k];
    }
    // warm start from the linear predictor
    for (int i = 0; i < n; ++i) next_[i] = 2.0 * state.curr[i] - state.prev[i];
    try {
      const SolveReport rep = solver_.solve(rhs_, next_);
      last_iterations_ = rep.iterations;
    } catch (const SolveFailure& failure) {
      throw SolveFailure("step " + std::to_string(state.n) + ": " + failure.what(),
                         failure.residual());
    }
  }

  std::swap(state.prev, state.curr);
  std::swap(state.curr, next_);
  ++state.n;
}

void run(StepOperator& op, FieldState& state, int n_steps, const RunOptions& options) {
  if (options.observer) options.observer(state);
  Vec dval(op.dirichlet_dofs().size(), 0.0);
  for (int k = 0; k < n_steps; ++k) {
    const double t = state.n * state.dt;
    const double amplitude = options.signal ? options.signal(t) : 0.0;
    const Vec* dptr = nullptr;
    if (options.dirichlet) {
      options.dirichlet(state.n + 1, dval);
      dptr = &dval;
    }
    op.advance(state, options.load, amplitude, dptr);
    if (options.observer) options.observer(state);
  }
}

}  // namespace trim
