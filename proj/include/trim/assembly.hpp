#ifndef TRIM_ASSEMBLY_HPP
#define TRIM_ASSEMBLY_HPP

#include "trim/linalg.hpp"
#include "trim/mesh.hpp"
#include "trim/scene.hpp"

namespace trim {

struct AssemblyOptions {
  bool with_inclusions = true;
  // which outer sides carry absorbing forms; interior symmetry/validation
  // setups switch individual sides off (a side without the form is a
  // natural, reflecting boundary)
  bool absorb_top = true;
  bool absorb_bottom = true;
  bool absorb_left = true;
  bool absorb_right = true;

  static AssemblyOptions closed(bool with_inclusions = true) {
    return {with_inclusions, false, false, false, false};
  }
};

struct FluidOperators {
  SparseMatrix M;  // (1/lambda_f) mass
  SparseMatrix K;  // (1/rho_f) stiffness
  SparseMatrix B;  // Gamma_f absorbing form, weight 1/sqrt(rho_f lambda_f)
  SparseMatrix E;  // Bayliss-Turkel curvature form, weight 1/(2 r rho_f); zero otherwise
};

struct SolidOperators {
  SparseMatrix M;  // rho_s mass
  SparseMatrix K;  // lambda div.div + 2 mu eps:eps
  SparseMatrix B;  // Gamma_s absorbing form from the rotated impedance matrix
};

/// All operators of the coupled first-order-in-time system. Fluid blocks are
/// n_fluid square, solid blocks 2*n_solid_nodes square, C maps solid dofs to
/// fluid equations; the solid equations receive -C^T.
struct OperatorSet {
  FluidOperators fluid;
  SolidOperators solid;
  SparseMatrix C;    // n_fluid x 2*n_solid_nodes
  SparseMatrix C_t;  // cached transpose
  int n_fluid = 0;
  int n_solid_nodes = 0;
  AssemblyOptions options;

  int n_solid_dofs() const { return 2 * n_solid_nodes; }
  int n_total() const { return n_fluid + n_solid_dofs(); }
  bool has_solid() const { return n_solid_nodes > 0; }
  bool has_coupling() const { return !C.empty(); }
};

FluidOperators assemble_fluid(const Mesh& mesh, const DofMap& dofs, const SceneSpec& scene,
                              const AssemblyOptions& options);
SolidOperators assemble_solid(const Mesh& mesh, const DofMap& dofs, const SceneSpec& scene,
                              const AssemblyOptions& options);
SparseMatrix assemble_coupling(const Mesh& mesh, const DofMap& dofs);

/// Nodal load of a regularized point source at source_point (fluid only):
/// basis values of the containing triangle, so the weights sum to one.
Vec assemble_sources(const Mesh& mesh, const DofMap& dofs, const Point& source_point);

OperatorSet assemble_operators(const Mesh& mesh, const DofMap& dofs, const SceneSpec& scene,
                               const AssemblyOptions& options);

/// Impedance matrix rho Vp n n^T + rho Vs t t^T of the elastic absorbing
/// condition for outward normal (nx, ny); reduces to the diagonal pair
/// (sqrt(rho(lambda+2mu)), sqrt(rho mu)) on axis-aligned edges.
std::array<std::array<double, 2>, 2> elastic_abc_matrix(const SolidMaterial& m, double nx,
                                                        double ny);

}  // namespace trim

#endif
