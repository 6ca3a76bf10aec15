#include "trim/fem.hpp"

#include <cmath>
#include <stdexcept>

namespace trim::fem {

int basis(int degree, double xi, double eta, std::array<double, max_nodes>& N,
          std::array<std::array<double, 2>, max_nodes>& dN) {
  const double l1 = 1.0 - xi - eta;
  const double l2 = xi;
  const double l3 = eta;
  if (degree == 1) {
    N = {l1, l2, l3, 0, 0, 0};
    dN[0] = {-1.0, -1.0};
    dN[1] = {1.0, 0.0};
    dN[2] = {0.0, 1.0};
    return 3;
  }
  if (degree == 2) {
    N = {l1 * (2 * l1 - 1), l2 * (2 * l2 - 1), l3 * (2 * l3 - 1),
         4 * l1 * l2,       4 * l2 * l3,       4 * l3 * l1};
    dN[0] = {1 - 4 * l1, 1 - 4 * l1};
    dN[1] = {4 * l2 - 1, 0.0};
    dN[2] = {0.0, 4 * l3 - 1};
    dN[3] = {4 * (l1 - l2), -4 * l2};
    dN[4] = {4 * l3, 4 * l2};
    dN[5] = {-4 * l3, 4 * (l1 - l3)};
    return 6;
  }
  throw std::invalid_argument("fem::basis: degree must be 1 or 2");
}

const std::array<TriQuadPoint, 6>& triangle_rule() {
  static const std::array<TriQuadPoint, 6> rule = {{
      {0.445948490915965, 0.445948490915965, 0.223381589678011},
      {0.445948490915965, 0.108103018168070, 0.223381589678011},
      {0.108103018168070, 0.445948490915965, 0.223381589678011},
      {0.091576213509771, 0.091576213509771, 0.109951743655322},
      {0.091576213509771, 0.816847572980459, 0.109951743655322},
      {0.816847572980459, 0.091576213509771, 0.109951743655322},
  }};
  return rule;
}

const std::array<EdgeQuadPoint, 3>& edge_rule() {
  static const std::array<EdgeQuadPoint, 3> rule = {{
      {0.5 - 0.387298334620742, 5.0 / 18.0},  // sqrt(15)/10 offsets
      {0.5, 8.0 / 18.0},
      {0.5 + 0.387298334620742, 5.0 / 18.0},
  }};
  return rule;
}

TriGeometry::TriGeometry(const Point& a, const Point& b, const Point& c) {
  const double j11 = b.x - a.x;
  const double j21 = b.y - a.y;
  const double j12 = c.x - a.x;
  const double j22 = c.y - a.y;
  const double det = j11 * j22 - j12 * j21;
  if (det == 0.0) throw std::invalid_argument("TriGeometry: degenerate triangle");
  area = 0.5 * std::abs(det);
  jinv[0][0] = j22 / det;
  jinv[0][1] = -j12 / det;
  jinv[1][0] = -j21 / det;
  jinv[1][1] = j11 / det;
}

void TriGeometry::gradient(const std::array<double, 2>& dref, double& gx, double& gy) const {
  gx = dref[0] * jinv[0][0] + dref[1] * jinv[1][0];
  gy = dref[0] * jinv[0][1] + dref[1] * jinv[1][1];
}

std::array<double, 3> barycentric(const Point& a, const Point& b, const Point& c,
                                  const Point& p) {
  const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
  const double l2 = ((p.x - a.x) * (c.y - a.y) - (c.x - a.x) * (p.y - a.y)) / det;
  const double l3 = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
  return {1.0 - l2 - l3, l2, l3};
}

}  // namespace trim::fem
