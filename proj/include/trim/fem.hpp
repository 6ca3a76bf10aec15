#ifndef TRIM_FEM_HPP
#define TRIM_FEM_HPP

#include <array>

#include "trim/scene.hpp"

namespace trim::fem {

constexpr int max_nodes = 6;  // P2 triangle

/// Lagrange basis on the reference triangle (0,0)-(1,0)-(0,1).
/// Node order: three vertices, then midpoints of edges 01, 12, 20 (degree 2).
/// Returns the node count (3 or 6); dN holds (d/dxi, d/deta) pairs.
int basis(int degree, double xi, double eta, std::array<double, max_nodes>& N,
          std::array<std::array<double, 2>, max_nodes>& dN);

struct TriQuadPoint {
  double xi;
  double eta;
  double w;  // weights sum to 1; multiply by triangle area
};

/// 6-point rule, exact for polynomials of degree 4.
const std::array<TriQuadPoint, 6>& triangle_rule();

struct EdgeQuadPoint {
  double t;  // in [0,1] along the edge
  double w;  // weights sum to 1; multiply by edge length
};

/// 3-point Gauss-Legendre, exact for degree 5.
const std::array<EdgeQuadPoint, 3>& edge_rule();

/// Affine geometry of a triangle with vertices a, b, c.
struct TriGeometry {
  double area;
  double jinv[2][2];  // inverse Jacobian of the map (xi,eta) -> x

  TriGeometry(const Point& a, const Point& b, const Point& c);
  /// Physical gradient of a basis function from its reference gradient.
  void gradient(const std::array<double, 2>& dref, double& gx, double& gy) const;
};

/// Barycentric coordinates (l1, l2, l3) of p in triangle (a, b, c).
std::array<double, 3> barycentric(const Point& a, const Point& b, const Point& c, const Point& p);

}  // namespace trim::fem

#endif
