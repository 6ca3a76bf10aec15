#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "trim/linalg.hpp"
#include "trim/mesh.hpp"

using namespace trim;

namespace {

// Unit-square fluid-only scene (interface collapsed onto the bottom edge).
SceneSpec unit_fluid_scene() {
  SceneSpec s;
  s.domain = {0.0, 1.0, 0.0, 1.0};
  s.interface_y = 0.0;
  s.fluid = FluidMaterial(1.0, 1.0);
  s.nu0 = 1.0;
  return s;
}

// Two-layer scene on [0,1]^2 with the interface at mid height.
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

}  // namespace

TEST_CASE("unit square at h=0.5 has 4 cells, 8 triangles, 9 vertices") {
  const Mesh mesh = generate_mesh(unit_fluid_scene(), 0.5);
  CHECK(mesh.n_cells_x() == 2);
  CHECK(mesh.n_cells_y() == 2);
  CHECK(mesh.triangles.size() == 8);
  CHECK(mesh.vertices.size() == 9);
  // Euler relation V - E + T = 1 for the triangulated rectangle
  std::set<std::pair<int, int>> edges;
  for (const Triangle& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const int a = t.v[e], b = t.v[(e + 1) % 3];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  }
  CHECK(static_cast<int>(mesh.vertices.size()) - static_cast<int>(edges.size()) +
            static_cast<int>(mesh.triangles.size()) ==
        1);
}

TEST_CASE("every interface edge borders one fluid and one solid triangle") {
  const Mesh mesh = generate_mesh(coupled_scene(), 0.25);
  int count = 0;
  for (const BoundaryEdge& e : mesh.boundary_edges) {
    if (e.tag != BoundaryTag::gamma_i) continue;
    ++count;
    CHECK(!mesh.triangles[e.adjacent].is_fluid());
    CHECK(mesh.triangles[e.adjacent_fluid].is_fluid());
    CHECK(e.ny == 1.0);  // normal points from the solid into the fluid
  }
  CHECK(count == mesh.n_cells_x());
}

TEST_CASE("no triangle straddles the interface") {
  const Mesh mesh = generate_mesh(coupled_scene(), 0.21);  // incommensurate h
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Point c = mesh.centroid(static_cast<int>(t));
    const bool above = c.y > 0.5;
    CHECK(mesh.triangles[t].is_fluid() == above);
    for (int k = 0; k < 3; ++k) {
      const double y = mesh.vertices[mesh.triangles[t].v[k]].y;
      if (above)
        CHECK(y >= 0.5 - 1e-12);
      else
        CHECK(y <= 0.5 + 1e-12);
    }
  }
}

TEST_CASE("an inclusion two cells wide is tagged") {
  SceneSpec s = coupled_scene();
  InclusionSpec inc;
  inc.center = {0.5, 0.25};
  inc.semi_a = inc.semi_b = 0.125;  // radius 2h at h = 1/16
  inc.material = SolidMaterial(2.0, 2.0, 0.5);
  s.inclusions.push_back(inc);
  const Mesh mesh = generate_mesh(s, 1.0 / 16.0);
  int tagged = 0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (mesh.triangles[t].region == RegionKind::inclusion) {
      ++tagged;
      CHECK(mesh.triangles[t].inclusion_index == 0);
      // centroid-sampling oracle: centroid must lie inside the ellipse
      CHECK(inc.contains(mesh.centroid(static_cast<int>(t))));
    }
  }
  CHECK(tagged >= 1);
}

TEST_CASE("h larger than the skin thickness is rejected") {
  SceneSpec s = coupled_scene();
  s.skin_band = SkinBand{0.5, 0.45};
  CHECK_THROWS_AS(generate_mesh(s, 0.1), std::invalid_argument);
  CHECK_NOTHROW(generate_mesh(s, 0.05));
}

TEST_CASE("boundary tag lengths partition perimeter plus interface") {
  const Mesh mesh = generate_mesh(coupled_scene(), 0.125);
  const double perimeter = 4.0;
  const double total = mesh.boundary_length(BoundaryTag::gamma_f) +
                       mesh.boundary_length(BoundaryTag::gamma_s_horizontal) +
                       mesh.boundary_length(BoundaryTag::gamma_s_vertical) +
                       mesh.boundary_length(BoundaryTag::gamma_i);
  CHECK(total == doctest::Approx(perimeter + 1.0).epsilon(1e-12));
  CHECK(mesh.boundary_length(BoundaryTag::gamma_s_horizontal) == doctest::Approx(1.0));
  CHECK(mesh.boundary_length(BoundaryTag::gamma_s_vertical) == doctest::Approx(1.0));
  CHECK(mesh.boundary_length(BoundaryTag::gamma_f) == doctest::Approx(2.0));
}

TEST_CASE("halving h quadruples the triangle count") {
  const SceneSpec s = coupled_scene();
  const Mesh coarse = generate_mesh(s, 0.25);
  const Mesh fine = generate_mesh(s, 0.125);
  CHECK(fine.triangles.size() == 4 * coarse.triangles.size());
}

TEST_CASE("SRA receivers snap to grid vertices on the SRA row") {
  SceneSpec s = coupled_scene();
  s.sras.push_back({{0.1, 0.73}, {0.9, 0.73}, 9});
  const Mesh mesh = generate_mesh(s, 0.25);
  REQUIRE(mesh.sra_vertices.size() == 1);
  CHECK(!mesh.sra_vertices[0].empty());
  for (int v : mesh.sra_vertices[0]) CHECK(mesh.vertices[v].y == doctest::Approx(0.73));
}

TEST_CASE("single fluid triangle carries 6 P2 dofs and no solid dofs") {
  // smallest possible mesh: one cell = two triangles; use a fluid-only scene
  const Mesh mesh = generate_mesh(unit_fluid_scene(), 1.0);
  REQUIRE(mesh.triangles.size() == 2);
  const DofMap dofs = build_dofmap(mesh, 2);
  // both triangles fluid: 9 shared nodes on the P2 lattice
  CHECK(dofs.n_fluid == 9);
  CHECK(dofs.n_solid_nodes == 0);
  // per triangle: 6 distinct nodes
  std::set<int> tri0(dofs.tri_nodes[0].begin(), dofs.tri_nodes[0].end());
  CHECK(tri0.size() == 6);
}

TEST_CASE("degree-1 interface nodes of one shared edge") {
  const Mesh mesh = generate_mesh(coupled_scene(), 0.5);
  const DofMap dofs = build_dofmap(mesh, 1);
  // interface row has 3 vertices at h=0.5
  CHECK(dofs.interface_nodes.size() == 3);
  for (int n : dofs.interface_nodes) {
    CHECK(dofs.fluid_dof[n] >= 0);
    CHECK(dofs.solid_dof[n][0] >= 0);
  }
}

TEST_CASE("degree-2 dof count matches the (2m+1)(2n+1) lattice") {
  const Mesh mesh = generate_mesh(unit_fluid_scene(), 0.25);
  const DofMap dofs = build_dofmap(mesh, 2);
  const int m = mesh.n_cells_x(), n = mesh.n_cells_y();
  CHECK(dofs.n_fluid == (2 * m + 1) * (2 * n + 1));
  CHECK(static_cast<int>(dofs.nodes.size()) == (2 * m + 1) * (2 * n + 1));
}

TEST_CASE("fluid and solid dof indices are contiguous and disjoint") {
  const Mesh mesh = generate_mesh(coupled_scene(), 0.25);
  const DofMap dofs = build_dofmap(mesh, 2);
  std::set<int> fluid_seen, solid_seen;
  for (std::size_t n = 0; n < dofs.nodes.size(); ++n) {
    if (dofs.fluid_dof[n] >= 0) fluid_seen.insert(dofs.fluid_dof[n]);
    if (dofs.solid_dof[n][0] >= 0) {
      solid_seen.insert(dofs.solid_dof[n][0]);
      solid_seen.insert(dofs.solid_dof[n][1]);
    }
  }
  CHECK(static_cast<int>(fluid_seen.size()) == dofs.n_fluid);
  CHECK(*fluid_seen.begin() == 0);
  CHECK(*fluid_seen.rbegin() == dofs.n_fluid - 1);
  CHECK(static_cast<int>(solid_seen.size()) == dofs.n_solid_dofs());
  CHECK(*solid_seen.rbegin() == dofs.n_solid_dofs() - 1);
}

TEST_CASE("sample grid corners and barycentric identity") {
  const Mesh mesh = generate_mesh(coupled_scene(), 0.25);
  const DofMap dofs = build_dofmap(mesh, 2);
  const SampleGrid grid = sample_points(mesh, dofs, 2, 2);
  REQUIRE(grid.points.size() == 4);
  CHECK(grid.points[0].position.x == doctest::Approx(0.0));
  CHECK(grid.points[0].position.y == doctest::Approx(0.0));
  CHECK(grid.points[3].position.x == doctest::Approx(1.0));
  CHECK(grid.points[3].position.y == doctest::Approx(0.5));  // top of the solid
  for (const SamplePoint& p : grid.points) {
    double s = 0.0;
    for (double v : p.N) s += v;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));  // partition of unity
    CHECK(!mesh.triangles[p.tri].is_fluid());
  }
}

TEST_CASE("P2 interpolant agrees from both sides of a shared edge") {
  const Mesh mesh = generate_mesh(coupled_scene(), 0.5);
  const DofMap dofs = build_dofmap(mesh, 2);
  // nodal values of a smooth function
  auto f = [](const Point& p) { return 0.3 + p.x * p.x - 0.7 * p.y + 0.2 * p.x * p.y; };
  Vec nodal(dofs.nodes.size());
  for (std::size_t n = 0; n < dofs.nodes.size(); ++n) nodal[n] = f(dofs.nodes[n]);

  // diagonal midpoint of the first cell lies on the edge between tris 0 and 1
  const Point p = {0.3, 0.3};
  std::array<double, 6> N, gx, gy;
  double values[2];
  for (int tri : {0, 1}) {
    evaluate_basis(mesh, dofs, tri, p, N, gx, gy);
    double v = 0.0;
    for (int k = 0; k < 6; ++k) v += N[k] * nodal[dofs.tri_nodes[tri][k]];
    values[mesh.triangles[tri].is_fluid() ? 1 : 0] = v;
    (void)values;
  }
  evaluate_basis(mesh, dofs, 0, p, N, gx, gy);
  double v0 = 0.0;
  for (int k = 0; k < 6; ++k) v0 += N[k] * nodal[dofs.tri_nodes[0][k]];
  evaluate_basis(mesh, dofs, 1, p, N, gx, gy);
  double v1 = 0.0;
  for (int k = 0; k < 6; ++k) v1 += N[k] * nodal[dofs.tri_nodes[1][k]];
  CHECK(std::abs(v0 - v1) < 1e-10);
}

TEST_CASE("locate resolves cells and diagonals") {
  const Mesh mesh = generate_mesh(unit_fluid_scene(), 0.5);
  const int below = mesh.locate({0.3, 0.1});   // below the cell diagonal
  const int above = mesh.locate({0.1, 0.3});   // above it
  CHECK(below % 2 == 0);
  CHECK(above % 2 == 1);
  CHECK(mesh.locate({2.0, 0.0}) == -1);
}

TEST_CASE("degraded sample grids are rejected") {
  const Mesh mesh = generate_mesh(coupled_scene(), 0.25);
  const DofMap dofs = build_dofmap(mesh, 2);
  CHECK_THROWS_AS(sample_points(mesh, dofs, 1, 5), std::invalid_argument);
}
