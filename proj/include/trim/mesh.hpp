#ifndef TRIM_MESH_HPP
#define TRIM_MESH_HPP

#include <array>
#include <vector>

#include "trim/scene.hpp"

namespace trim {

enum class BoundaryTag { gamma_f, gamma_s_horizontal, gamma_s_vertical, gamma_i };

struct Triangle {
  std::array<int, 3> v;  // CCW vertex ids
  RegionKind region = RegionKind::fluid;
  int inclusion_index = -1;
  bool is_fluid() const { return region == RegionKind::fluid; }
};

struct BoundaryEdge {
  int v0 = -1;
  int v1 = -1;
  BoundaryTag tag = BoundaryTag::gamma_f;
  double nx = 0.0, ny = 0.0;  // outward normal; for gamma_i: from solid into fluid
  int adjacent = -1;          // adjacent triangle (solid side for gamma_i)
  int adjacent_fluid = -1;    // fluid side, gamma_i only
};

/// Structured conforming triangulation of the scene rectangle. Grid lines are
/// placed exactly on the interface, the skin-band edges and every SRA row, so
/// tagged edges align with element edges.
struct Mesh {
  std::vector<Point> vertices;
  std::vector<Triangle> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<std::vector<int>> sra_vertices;  // snapped receiver vertices per SRA

  std::vector<double> xs, ys;  // grid line coordinates
  double min_spacing = 0.0;
  double interface_y = 0.0;
  Rect domain;

  int n_cells_x() const { return static_cast<int>(xs.size()) - 1; }
  int n_cells_y() const { return static_cast<int>(ys.size()) - 1; }
  Point centroid(int tri) const;
  /// Containing triangle of p (ties resolved consistently); -1 if outside.
  int locate(const Point& p) const;
  double boundary_length(BoundaryTag tag) const;
};

Mesh generate_mesh(const SceneSpec& scene, double h_target);

/// Scalar (fluid) and 2-vector (solid) Lagrange degrees of freedom.
/// Interface nodes carry both. Global layout: fluid dofs first, then the
/// interleaved (u1, u2) pairs of solid nodes.
struct DofMap {
  int degree = 2;
  std::vector<Point> nodes;                    // vertices, then P2 edge midpoints
  std::vector<std::array<int, 6>> tri_nodes;   // 3 or 6 valid entries per triangle
  std::vector<int> fluid_dof;                  // node -> fluid index or -1
  std::vector<std::array<int, 2>> solid_dof;   // node -> (u1, u2) indices or {-1,-1}
  std::vector<int> interface_nodes;
  int n_fluid = 0;
  int n_solid_nodes = 0;

  int nodes_per_tri() const { return degree == 1 ? 3 : 6; }
  int n_solid_dofs() const { return 2 * n_solid_nodes; }
  int n_total() const { return n_fluid + n_solid_dofs(); }
  int global_fluid(int node) const { return fluid_dof[node]; }
  int global_solid(int node, int comp) const { return n_fluid + solid_dof[node][comp]; }
};

DofMap build_dofmap(const Mesh& mesh, int degree);

/// Regular sample grid over the solid subdomain with precomputed containing
/// triangles, basis values and physical basis gradients.
struct SamplePoint {
  Point position;
  int tri = -1;
  std::array<double, 6> N{};
  std::array<double, 6> gx{};
  std::array<double, 6> gy{};
};

struct SampleGrid {
  int nx = 0, ny = 0;
  Point origin;
  double dx = 0.0, dy = 0.0;
  std::vector<SamplePoint> points;  // row-major, index = iy*nx + ix

  Point position(int ix, int iy) const {
    return {origin.x + ix * dx, origin.y + iy * dy};
  }
};

SampleGrid sample_points(const Mesh& mesh, const DofMap& dofs, int nx, int ny);

/// Basis values/gradients of one triangle at an arbitrary interior point.
void evaluate_basis(const Mesh& mesh, const DofMap& dofs, int tri, const Point& p,
                    std::array<double, 6>& N, std::array<double, 6>& gx,
                    std::array<double, 6>& gy);

}  // namespace trim

#endif
