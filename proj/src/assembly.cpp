#include "trim/assembly.hpp"

#include <cmath>
#include <stdexcept>

#include "trim/fem.hpp"

namespace trim {

namespace {

bool side_absorbs(const AssemblyOptions& opt, const BoundaryEdge& e) {
  if (e.ny > 0.5) return opt.absorb_top;
  if (e.ny < -0.5) return opt.absorb_bottom;
  if (e.nx < -0.5) return opt.absorb_left;
  return opt.absorb_right;
}

// Basis values of a triangle at a point on one of its edges.
void edge_basis(const Mesh& mesh, const DofMap& dofs, int tri, const Point& p,
                std::array<double, 6>& N) {
  const Triangle& t = mesh.triangles[tri];
  const auto bary = fem::barycentric(mesh.vertices[t.v[0]], mesh.vertices[t.v[1]],
                                     mesh.vertices[t.v[2]], p);
  std::array<std::array<double, 2>, fem::max_nodes> dref;
  std::array<double, fem::max_nodes> Nref;
  fem::basis(dofs.degree, bary[1], bary[2], Nref, dref);
  for (int k = 0; k < 6; ++k) N[k] = k < dofs.nodes_per_tri() ? Nref[k] : 0.0;
}

struct EdgeQuadrature {
  Point point;
  double weight;  // already scaled by edge length
};

std::array<EdgeQuadrature, 3> edge_quadrature(const Mesh& mesh, const BoundaryEdge& e) {
  const Point& a = mesh.vertices[e.v0];
  const Point& b = mesh.vertices[e.v1];
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  std::array<EdgeQuadrature, 3> out;
  const auto& rule = fem::edge_rule();
  for (int q = 0; q < 3; ++q) {
    out[q].point = {a.x + rule[q].t * (b.x - a.x), a.y + rule[q].t * (b.y - a.y)};
    out[q].weight = rule[q].w * len;
  }
  return out;
}

}  // namespace

std::array<std::array<double, 2>, 2> elastic_abc_matrix(const SolidMaterial& m, double nx,
                                                        double ny) {
  const Velocities v = derive_velocities(m);
  const double zp = m.rho * v.vp;
  const double zs = m.rho * v.vs;
  const double tx = ny, ty = -nx;  // tangent
  const double off = zp * (nx * ny) + zs * (tx * ty);
  return {{{zp * nx * nx + zs * tx * tx, off}, {off, zp * ny * ny + zs * ty * ty}}};
}

FluidOperators assemble_fluid(const Mesh& mesh, const DofMap& dofs, const SceneSpec& scene,
                              const AssemblyOptions& options) {
  const int nf = dofs.n_fluid;
  CooBuilder m_coo, k_coo, b_coo, e_coo;
  const int npt = dofs.nodes_per_tri();
  const double inv_lambda = 1.0 / scene.fluid.lambda;
  const double inv_rho = 1.0 / scene.fluid.rho;

  std::array<double, fem::max_nodes> N;
  std::array<std::array<double, 2>, fem::max_nodes> dref;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    if (!tri.is_fluid()) continue;
    const fem::TriGeometry geom(mesh.vertices[tri.v[0]], mesh.vertices[tri.v[1]],
                                mesh.vertices[tri.v[2]]);
    std::array<int, 6> gdof;
    for (int k = 0; k < npt; ++k) gdof[k] = dofs.fluid_dof[dofs.tri_nodes[t][k]];
    double gx[6], gy[6];
    for (const auto& qp : fem::triangle_rule()) {
      fem::basis(dofs.degree, qp.xi, qp.eta, N, dref);
      const double w = qp.w * geom.area;
      for (int k = 0; k < npt; ++k) geom.gradient(dref[k], gx[k], gy[k]);
      for (int i = 0; i < npt; ++i) {
        for (int j = 0; j < npt; ++j) {
          // products grouped symmetrically so the matrix is bitwise symmetric
          m_coo.add(gdof[i], gdof[j], w * inv_lambda * (N[i] * N[j]));
          k_coo.add(gdof[i], gdof[j], w * inv_rho * (gx[i] * gx[j] + gy[i] * gy[j]));
        }
      }
    }
  }

  const double b_weight = 1.0 / std::sqrt(scene.fluid.rho * scene.fluid.lambda);
  const bool bt_mode = scene.fluid_abc == FluidAbcKind::bayliss_turkel;
  if (bt_mode && scene.bt_radius <= 0.0)
    throw std::invalid_argument("assemble_fluid: bayliss_turkel requires a positive radius");
  const double e_weight = bt_mode ? 1.0 / (2.0 * scene.bt_radius * scene.fluid.rho) : 0.0;

  std::array<double, 6> Ne;
  for (const BoundaryEdge& e : mesh.boundary_edges) {
    if (e.tag != BoundaryTag::gamma_f || !side_absorbs(options, e)) continue;
    std::array<int, 6> gdof;
    for (int k = 0; k < npt; ++k) gdof[k] = dofs.fluid_dof[dofs.tri_nodes[e.adjacent][k]];
    for (const EdgeQuadrature& q : edge_quadrature(mesh, e)) {
      edge_basis(mesh, dofs, e.adjacent, q.point, Ne);
      for (int i = 0; i < npt; ++i) {
        if (Ne[i] == 0.0) continue;
        for (int j = 0; j < npt; ++j) {
          if (Ne[j] == 0.0) continue;
          b_coo.add(gdof[i], gdof[j], q.weight * b_weight * (Ne[i] * Ne[j]));
          if (bt_mode) e_coo.add(gdof[i], gdof[j], q.weight * e_weight * (Ne[i] * Ne[j]));
        }
      }
    }
  }

  FluidOperators ops;
  ops.M = m_coo.finalize(nf, nf);
  ops.K = k_coo.finalize(nf, nf);
  ops.B = b_coo.finalize(nf, nf);
  ops.E = e_coo.finalize(nf, nf);
  return ops;
}

SolidOperators assemble_solid(const Mesh& mesh, const DofMap& dofs, const SceneSpec& scene,
                              const AssemblyOptions& options) {
  const int ns = dofs.n_solid_dofs();
  CooBuilder m_coo, k_coo, b_coo;
  const int npt = dofs.nodes_per_tri();

  std::array<double, fem::max_nodes> N;
  std::array<std::array<double, 2>, fem::max_nodes> dref;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    if (tri.is_fluid()) continue;
    const fem::TriGeometry geom(mesh.vertices[tri.v[0]], mesh.vertices[tri.v[1]],
                                mesh.vertices[tri.v[2]]);
    const Point c = mesh.centroid(static_cast<int>(t));
    const MaterialRef ref = material_at(scene, c, options.with_inclusions);
    if (ref.is_fluid())
      throw std::logic_error("assemble_solid: fluid material under a solid triangle");
    const double rho = ref.solid.rho;
    const double lambda = ref.solid.lambda;
    const double mu = ref.solid.mu;

    std::array<int, 6> n1, n2;  // solid dof ids per component
    for (int k = 0; k < npt; ++k) {
      const int node = dofs.tri_nodes[t][k];
      n1[k] = dofs.solid_dof[node][0];
      n2[k] = dofs.solid_dof[node][1];
    }
    double gx[6], gy[6];
    for (const auto& qp : fem::triangle_rule()) {
      fem::basis(dofs.degree, qp.xi, qp.eta, N, dref);
      const double w = qp.w * geom.area;
      for (int k = 0; k < npt; ++k) geom.gradient(dref[k], gx[k], gy[k]);
      for (int i = 0; i < npt; ++i) {
        for (int j = 0; j < npt; ++j) {
          const double mass = w * rho * (N[i] * N[j]);
          m_coo.add(n1[i], n1[j], mass);
          m_coo.add(n2[i], n2[j], mass);
          const double gdot = gx[i] * gx[j] + gy[i] * gy[j];
          // (test comp a, trial comp b):
          //   lambda d_a(i) d_b(j) + mu (delta_ab grad.grad + d_a(j) d_b(i));
          // products grouped symmetrically for bitwise symmetry
          k_coo.add(n1[i], n1[j], w * (lambda * (gx[i] * gx[j]) + mu * (gdot + gx[j] * gx[i])));
          k_coo.add(n1[i], n2[j], w * (lambda * (gx[i] * gy[j]) + mu * (gx[j] * gy[i])));
          k_coo.add(n2[i], n1[j], w * (lambda * (gy[i] * gx[j]) + mu * (gy[j] * gx[i])));
          k_coo.add(n2[i], n2[j], w * (lambda * (gy[i] * gy[j]) + mu * (gdot + gy[j] * gy[i])));
        }
      }
    }
  }

  std::array<double, 6> Ne;
  for (const BoundaryEdge& e : mesh.boundary_edges) {
    if ((e.tag != BoundaryTag::gamma_s_horizontal && e.tag != BoundaryTag::gamma_s_vertical) ||
        !side_absorbs(options, e))
      continue;
    const Point c = mesh.centroid(e.adjacent);
    const MaterialRef ref = material_at(scene, c, options.with_inclusions);
    const auto M = elastic_abc_matrix(ref.solid, e.nx, e.ny);
    std::array<int, 6> n1, n2;
    for (int k = 0; k < npt; ++k) {
      const int node = dofs.tri_nodes[e.adjacent][k];
      n1[k] = dofs.solid_dof[node][0];
      n2[k] = dofs.solid_dof[node][1];
    }
    for (const EdgeQuadrature& q : edge_quadrature(mesh, e)) {
      edge_basis(mesh, dofs, e.adjacent, q.point, Ne);
      for (int i = 0; i < npt; ++i) {
        if (Ne[i] == 0.0) continue;
        for (int j = 0; j < npt; ++j) {
          if (Ne[j] == 0.0) continue;
          const double s = q.weight * (Ne[i] * Ne[j]);
          b_coo.add(n1[i], n1[j], s * M[0][0]);
          b_coo.add(n1[i], n2[j], s * M[0][1]);
          b_coo.add(n2[i], n1[j], s * M[1][0]);
          b_coo.add(n2[i], n2[j], s * M[1][1]);
        }
      }
    }
  }

  SolidOperators ops;
  ops.M = m_coo.finalize(ns, ns);
  ops.K = k_coo.finalize(ns, ns);
  ops.B = b_coo.finalize(ns, ns);
  return ops;
}

SparseMatrix assemble_coupling(const Mesh& mesh, const DofMap& dofs) {
  bool any = false;
  CooBuilder coo;
  const int npt = dofs.nodes_per_tri();
  std::array<double, 6> Nf, Ns;
  for (const BoundaryEdge& e : mesh.boundary_edges) {
    if (e.tag != BoundaryTag::gamma_i) continue;
    any = true;
    std::array<int, 6> fdof, s1, s2;
    for (int k = 0; k < npt; ++k) {
      fdof[k] = dofs.fluid_dof[dofs.tri_nodes[e.adjacent_fluid][k]];
      const int node = dofs.tri_nodes[e.adjacent][k];
      s1[k] = dofs.solid_dof[node][0];
      s2[k] = dofs.solid_dof[node][1];
    }
    for (const EdgeQuadrature& q : edge_quadrature(mesh, e)) {
      edge_basis(mesh, dofs, e.adjacent_fluid, q.point, Nf);
      edge_basis(mesh, dofs, e.adjacent, q.point, Ns);
      for (int i = 0; i < npt; ++i) {
        if (Nf[i] == 0.0) continue;
        for (int j = 0; j < npt; ++j) {
          if (Ns[j] == 0.0) continue;
          const double s = q.weight * Nf[i] * Ns[j];
          coo.add(fdof[i], s1[j], s * e.nx);
          coo.add(fdof[i], s2[j], s * e.ny);
        }
      }
    }
  }
  if (!any) throw std::invalid_argument("assemble_coupling: mesh has no interface edges");
  return coo.finalize(dofs.n_fluid, dofs.n_solid_dofs());
}

Vec assemble_sources(const Mesh& mesh, const DofMap& dofs, const Point& source_point) {
  const int tri = mesh.locate(source_point);
  if (tri < 0) throw std::invalid_argument("assemble_sources: source outside the mesh");
  if (!mesh.triangles[tri].is_fluid())
    throw std::invalid_argument("assemble_sources: source must lie in the fluid");
  std::array<double, 6> N, gx, gy;
  evaluate_basis(mesh, dofs, tri, source_point, N, gx, gy);
  Vec load(dofs.n_fluid, 0.0);
  for (int k = 0; k < dofs.nodes_per_tri(); ++k)
    load[dofs.fluid_dof[dofs.tri_nodes[tri][k]]] += N[k];
  return load;
}

OperatorSet assemble_operators(const Mesh& mesh, const DofMap& dofs, const SceneSpec& scene,
                               const AssemblyOptions& options) {
  OperatorSet ops;
  ops.options = options;
  ops.n_fluid = dofs.n_fluid;
  ops.n_solid_nodes = dofs.n_solid_nodes;
  ops.fluid = assemble_fluid(mesh, dofs, scene, options);
  if (dofs.n_solid_nodes > 0) {
    ops.solid = assemble_solid(mesh, dofs, scene, options);
    ops.C = assemble_coupling(mesh, dofs);
    ops.C_t = ops.C.transposed();
  }
  return ops;
}

}  // namespace trim
