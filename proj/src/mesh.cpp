#include "trim/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "trim/fem.hpp"

namespace trim {

namespace {

// Subdivide [a, b] into ceil((b-a)/h) uniform intervals and append the
// interior + right breakpoints to out (assumes out already ends with a).
void subdivide(double a, double b, double h, std::vector<double>& out) {
  const double len = b - a;
  const int n = std::max(1, static_cast<int>(std::ceil(len / h - 1e-12)));
  for (int i = 1; i <= n; ++i) out.push_back(a + len * i / n);
  out.back() = b;  // exact endpoint
}

int nearest_index(const std::vector<double>& grid, double value) {
  int best = 0;
  double dist = std::abs(grid[0] - value);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double d = std::abs(grid[i] - value);
    if (d < dist) {
      dist = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

Point Mesh::centroid(int tri) const {
  const Triangle& t = triangles[tri];
  return {(vertices[t.v[0]].x + vertices[t.v[1]].x + vertices[t.v[2]].x) / 3.0,
          (vertices[t.v[0]].y + vertices[t.v[1]].y + vertices[t.v[2]].y) / 3.0};
}

int Mesh::locate(const Point& p) const {
  if (p.x < xs.front() - 1e-12 || p.x > xs.back() + 1e-12 || p.y < ys.front() - 1e-12 ||
      p.y > ys.back() + 1e-12)
    return -1;
  auto cell_of = [](const std::vector<double>& g, double v) {
    auto it = std::upper_bound(g.begin(), g.end(), v);
    int c = static_cast<int>(it - g.begin()) - 1;
    return std::clamp(c, 0, static_cast<int>(g.size()) - 2);
  };
  const int cx = cell_of(xs, p.x);
  const int cy = cell_of(ys, p.y);
  // local coordinates in the cell; the SW-NE diagonal splits it
  const double tx = (p.x - xs[cx]) / (xs[cx + 1] - xs[cx]);
  const double ty = (p.y - ys[cy]) / (ys[cy + 1] - ys[cy]);
  const int base = 2 * (cy * n_cells_x() + cx);
  return (ty <= tx) ? base : base + 1;
}

double Mesh::boundary_length(BoundaryTag tag) const {
  double len = 0.0;
  for (const BoundaryEdge& e : boundary_edges) {
    if (e.tag == tag)
      len += std::hypot(vertices[e.v1].x - vertices[e.v0].x,
                        vertices[e.v1].y - vertices[e.v0].y);
  }
  return len;
}

Mesh generate_mesh(const SceneSpec& scene, double h_target) {
  scene.validate();
  if (h_target <= 0.0) throw std::invalid_argument("generate_mesh: h_target must be > 0");
  if (scene.skin_band) {
    const double thickness = scene.skin_band->y_top - scene.skin_band->y_bottom;
    if (h_target > thickness * (1.0 + 1e-12))
      throw std::invalid_argument("generate_mesh: h_target exceeds the skin thickness");
  }

  Mesh mesh;
  mesh.domain = scene.domain;
  mesh.interface_y = scene.interface_y;

  // y breakpoints: domain edges, interface, skin edges, SRA rows
  std::vector<double> marks = {scene.domain.y0, scene.domain.y1};
  if (scene.has_solid()) marks.push_back(scene.interface_y);
  if (scene.skin_band) {
    marks.push_back(scene.skin_band->y_top);
    marks.push_back(scene.skin_band->y_bottom);
  }
  for (const SraSpec& sra : scene.sras) {
    marks.push_back(sra.start.y);
    marks.push_back(sra.end.y);
  }
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-15; }),
              marks.end());

  mesh.ys.push_back(marks.front());
  for (std::size_t i = 0; i + 1 < marks.size(); ++i)
    subdivide(marks[i], marks[i + 1], h_target, mesh.ys);

  mesh.xs.push_back(scene.domain.x0);
  subdivide(scene.domain.x0, scene.domain.x1, h_target, mesh.xs);

  const int nx = mesh.n_cells_x();
  const int ny = mesh.n_cells_y();

  mesh.min_spacing = scene.domain.width();
  for (int i = 0; i < nx; ++i) mesh.min_spacing = std::min(mesh.min_spacing, mesh.xs[i + 1] - mesh.xs[i]);
  for (int j = 0; j < ny; ++j) mesh.min_spacing = std::min(mesh.min_spacing, mesh.ys[j + 1] - mesh.ys[j]);

  mesh.vertices.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) mesh.vertices.push_back({mesh.xs[i], mesh.ys[j]});
  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };

  // two CCW triangles per cell, split along the SW-NE diagonal
  mesh.triangles.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int sw = vid(i, j), se = vid(i + 1, j), ne = vid(i + 1, j + 1), nw = vid(i, j + 1);
      Triangle lower{{sw, se, ne}, RegionKind::fluid, -1};
      Triangle upper{{sw, ne, nw}, RegionKind::fluid, -1};
      for (Triangle* t : {&lower, &upper}) {
        Point c = {(mesh.vertices[t->v[0]].x + mesh.vertices[t->v[1]].x + mesh.vertices[t->v[2]].x) / 3.0,
                   (mesh.vertices[t->v[0]].y + mesh.vertices[t->v[1]].y + mesh.vertices[t->v[2]].y) / 3.0};
        const MaterialRef ref = material_at(scene, c, true);
        t->region = ref.region;
        t->inclusion_index = ref.inclusion_index;
        mesh.triangles.push_back(*t);
      }
    }
  }
  auto lower_tri = [nx](int i, int j) { return 2 * (j * nx + i); };
  auto upper_tri = [nx](int i, int j) { return 2 * (j * nx + i) + 1; };

  // outer boundary edges
  const bool solid_present = scene.has_solid();
  for (int i = 0; i < nx; ++i) {
    BoundaryEdge bottom{vid(i, 0), vid(i + 1, 0),
                        solid_present ? BoundaryTag::gamma_s_horizontal : BoundaryTag::gamma_f,
                        0.0, -1.0, lower_tri(i, 0), -1};
    mesh.boundary_edges.push_back(bottom);
    BoundaryEdge top{vid(i, ny), vid(i + 1, ny), BoundaryTag::gamma_f, 0.0, 1.0,
                     upper_tri(i, ny - 1), -1};
    mesh.boundary_edges.push_back(top);
  }
  for (int j = 0; j < ny; ++j) {
    const double ymid = 0.5 * (mesh.ys[j] + mesh.ys[j + 1]);
    const bool fluid_side = !solid_present || ymid > scene.interface_y;
    BoundaryEdge left{vid(0, j), vid(0, j + 1),
                      fluid_side ? BoundaryTag::gamma_f : BoundaryTag::gamma_s_vertical,
                      -1.0, 0.0, upper_tri(0, j), -1};
    mesh.boundary_edges.push_back(left);
    BoundaryEdge right{vid(nx, j), vid(nx, j + 1),
                       fluid_side ? BoundaryTag::gamma_f : BoundaryTag::gamma_s_vertical,
                       1.0, 0.0, lower_tri(nx - 1, j), -1};
    mesh.boundary_edges.push_back(right);
  }

  // interface edges on the grid row at interface_y, normal from solid into fluid
  if (solid_present) {
    const int j_if = nearest_index(mesh.ys, scene.interface_y);
    if (std::abs(mesh.ys[j_if] - scene.interface_y) > 1e-12 * std::max(1.0, std::abs(scene.interface_y)))
      throw std::logic_error("generate_mesh: interface row missing from the grid");
    for (int i = 0; i < nx; ++i) {
      BoundaryEdge gi{vid(i, j_if), vid(i + 1, j_if), BoundaryTag::gamma_i, 0.0, 1.0,
                      upper_tri(i, j_if - 1), lower_tri(i, j_if)};
      mesh.boundary_edges.push_back(gi);
    }
  }

  // receivers snapped to the nearest grid vertices; colliding snaps dedupe
  for (const SraSpec& sra : scene.sras) {
    std::vector<int> nodes;
    int previous = -1;
    for (int k = 0; k < sra.receiver_count; ++k) {
      const Point pos = sra.receiver_position(k);
      const int i = nearest_index(mesh.xs, pos.x);
      const int j = nearest_index(mesh.ys, pos.y);
      const int v = vid(i, j);
      if (v != previous) nodes.push_back(v);
      previous = v;
    }
    mesh.sra_vertices.push_back(std::move(nodes));
  }

  return mesh;
}

DofMap build_dofmap(const Mesh& mesh, int degree) {
  if (degree != 1 && degree != 2) throw std::invalid_argument("build_dofmap: degree must be 1 or 2");
  DofMap dm;
  dm.degree = degree;
  dm.nodes = mesh.vertices;
  dm.tri_nodes.resize(mesh.triangles.size());

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& v = mesh.triangles[t].v;
    dm.tri_nodes[t] = {v[0], v[1], v[2], -1, -1, -1};
  }
  if (degree == 2) {
    std::map<std::pair<int, int>, int> midpoint;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& v = mesh.triangles[t].v;
      for (int e = 0; e < 3; ++e) {
        const int a = v[e], b = v[(e + 1) % 3];
        const auto key = std::minmax(a, b);
        auto it = midpoint.find(key);
        int node;
        if (it == midpoint.end()) {
          node = static_cast<int>(dm.nodes.size());
          dm.nodes.push_back({0.5 * (mesh.vertices[a].x + mesh.vertices[b].x),
                              0.5 * (mesh.vertices[a].y + mesh.vertices[b].y)});
          midpoint.emplace(key, node);
        } else {
          node = it->second;
        }
        dm.tri_nodes[t][3 + e] = node;
      }
    }
  }

  const int n_nodes = static_cast<int>(dm.nodes.size());
  std::vector<bool> in_fluid(n_nodes, false), in_solid(n_nodes, false);
  const int npt = dm.nodes_per_tri();
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    auto& mark = mesh.triangles[t].is_fluid() ? in_fluid : in_solid;
    for (int k = 0; k < npt; ++k) mark[dm.tri_nodes[t][k]] = true;
  }

  dm.fluid_dof.assign(n_nodes, -1);
  dm.solid_dof.assign(n_nodes, {-1, -1});
  for (int n = 0; n < n_nodes; ++n) {
    if (in_fluid[n]) dm.fluid_dof[n] = dm.n_fluid++;
    if (in_solid[n]) {
      dm.solid_dof[n] = {2 * dm.n_solid_nodes, 2 * dm.n_solid_nodes + 1};
      ++dm.n_solid_nodes;
    }
    if (in_fluid[n] && in_solid[n]) dm.interface_nodes.push_back(n);
  }
  return dm;
}

void evaluate_basis(const Mesh& mesh, const DofMap& dofs, int tri, const Point& p,
                    std::array<double, 6>& N, std::array<double, 6>& gx,
                    std::array<double, 6>& gy) {
  const Triangle& t = mesh.triangles[tri];
  const Point& a = mesh.vertices[t.v[0]];
  const Point& b = mesh.vertices[t.v[1]];
  const Point& c = mesh.vertices[t.v[2]];
  const auto bary = fem::barycentric(a, b, c, p);
  std::array<double, fem::max_nodes> Nref;
  std::array<std::array<double, 2>, fem::max_nodes> dref;
  const int count = fem::basis(dofs.degree, bary[1], bary[2], Nref, dref);
  const fem::TriGeometry geom(a, b, c);
  N.fill(0.0);
  gx.fill(0.0);
  gy.fill(0.0);
  for (int k = 0; k < count; ++k) {
    N[k] = Nref[k];
    geom.gradient(dref[k], gx[k], gy[k]);
  }
}

SampleGrid sample_points(const Mesh& mesh, const DofMap& dofs, int nx, int ny) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("sample_points: nx, ny must be >= 2");
  SampleGrid grid;
  grid.nx = nx;
  grid.ny = ny;
  const double y_top = mesh.interface_y > mesh.domain.y0 ? mesh.interface_y : mesh.domain.y1;
  grid.origin = {mesh.domain.x0, mesh.domain.y0};
  grid.dx = mesh.domain.width() / (nx - 1);
  grid.dy = (y_top - mesh.domain.y0) / (ny - 1);
  grid.points.resize(static_cast<std::size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      SamplePoint& sp = grid.points[static_cast<std::size_t>(iy) * nx + ix];
      sp.position = grid.position(ix, iy);
      // nudge interface points onto the solid side
      Point q = sp.position;
      if (mesh.interface_y > mesh.domain.y0 && q.y >= mesh.interface_y)
        q.y = mesh.interface_y - 1e-12 * std::max(1.0, std::abs(mesh.interface_y));
      sp.tri = mesh.locate(q);
      if (sp.tri < 0) throw std::logic_error("sample_points: point escaped the mesh");
      evaluate_basis(mesh, dofs, sp.tri, sp.position, sp.N, sp.gx, sp.gy);
    }
  }
  return grid;
}

}  // namespace trim
