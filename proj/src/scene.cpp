#include "trim/scene.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trim {

FluidMaterial::FluidMaterial(double rho_, double lambda_) : rho(rho_), lambda(lambda_) {
  if (rho <= 0.0) throw std::invalid_argument("FluidMaterial: rho must be > 0");
  if (lambda <= 0.0) throw std::invalid_argument("FluidMaterial: lambda must be > 0");
}

SolidMaterial::SolidMaterial(double rho_, double lambda_, double mu_)
    : rho(rho_), lambda(lambda_), mu(mu_) {
  if (rho <= 0.0) throw std::invalid_argument("SolidMaterial: rho must be > 0");
  if (mu < 0.0) throw std::invalid_argument("SolidMaterial: mu must be >= 0");
  if (lambda + 2.0 * mu <= 0.0)
    throw std::invalid_argument("SolidMaterial: lambda + 2 mu must be > 0");
}

Velocities derive_velocities(const FluidMaterial& m) {
  return {std::sqrt(m.lambda / m.rho), 0.0};
}

Velocities derive_velocities(const SolidMaterial& m) {
  return {std::sqrt((m.lambda + 2.0 * m.mu) / m.rho), std::sqrt(m.mu / m.rho)};
}

double young_modulus(const SolidMaterial& m) {
  if (m.lambda + m.mu <= 0.0)
    throw std::invalid_argument("young_modulus: lambda + mu must be > 0");
  return m.mu * (3.0 * m.lambda + 2.0 * m.mu) / (m.lambda + m.mu);
}

bool InclusionSpec::contains(const Point& p) const {
  const double dx = p.x - center.x;
  const double dy = p.y - center.y;
  const double c = std::cos(rotation);
  const double s = std::sin(rotation);
  const double u = (c * dx + s * dy) / semi_a;
  const double v = (-s * dx + c * dy) / semi_b;
  return u * u + v * v <= 1.0;
}

Point SraSpec::receiver_position(int k) const {
  if (receiver_count < 1) throw std::invalid_argument("SraSpec: receiver_count must be >= 1");
  if (receiver_count == 1) return {0.5 * (start.x + end.x), 0.5 * (start.y + end.y)};
  const double t = static_cast<double>(k) / (receiver_count - 1);
  return {start.x + t * (end.x - start.x), start.y + t * (end.y - start.y)};
}

double SceneSpec::wavelength() const {
  if (nu0 <= 0.0) throw std::invalid_argument("SceneSpec: nu0 must be > 0");
  return derive_velocities(fluid).vp / nu0;
}

void SceneSpec::validate() const {
  if (domain.width() <= 0.0 || domain.height() <= 0.0)
    throw std::invalid_argument("SceneSpec: degenerate domain rectangle");
  if (interface_y < domain.y0 || interface_y >= domain.y1)
    throw std::invalid_argument("SceneSpec: interface_y must lie in [y0, y1)");
  if (nu0 <= 0.0) throw std::invalid_argument("SceneSpec: nu0 must be > 0");
  if (skin_band) {
    if (skin_band->y_top > interface_y || skin_band->y_bottom >= skin_band->y_top ||
        skin_band->y_bottom < domain.y0)
      throw std::invalid_argument("SceneSpec: skin band must be a proper slab in the solid");
  }
  for (const InclusionSpec& inc : inclusions) {
    if (inc.semi_a <= 0.0 || inc.semi_b <= 0.0)
      throw std::invalid_argument("SceneSpec: inclusion semi-axes must be > 0");
    const double r = std::max(inc.semi_a, inc.semi_b);
    if (inc.center.y + r > interface_y || inc.center.y - r < domain.y0 ||
        inc.center.x - r < domain.x0 || inc.center.x + r > domain.x1)
      throw std::invalid_argument("SceneSpec: inclusion must lie inside the solid subdomain");
    if (skin_band && inc.center.y + r > skin_band->y_bottom)
      throw std::invalid_argument("SceneSpec: inclusion overlaps the skin band");
  }
  for (const SraSpec& sra : sras) {
    if (sra.receiver_count < 1)
      throw std::invalid_argument("SceneSpec: receiver_count must be >= 1");
    for (const Point& p : {sra.start, sra.end}) {
      if (!(p.y > interface_y && p.y < domain.y1 && p.x > domain.x0 && p.x < domain.x1))
        throw std::invalid_argument("SceneSpec: SRA must lie strictly inside the fluid");
    }
  }
  for (const Point& s : sources) {
    if (!(s.y > interface_y && s.y <= domain.y1 && s.x >= domain.x0 && s.x <= domain.x1))
      throw std::invalid_argument("SceneSpec: sources must lie in the fluid");
  }
  for (double f : sources_on_sra) {
    if (f < 0.0 || f > 1.0)
      throw std::invalid_argument("SceneSpec: sources_on_sra fractions must lie in [0,1]");
  }
}

std::vector<Point> SceneSpec::sources_for_sra(int sra_index) const {
  std::vector<Point> pts = sources;
  if (!sources_on_sra.empty()) {
    const SraSpec& sra = sras.at(sra_index);
    for (double f : sources_on_sra) {
      pts.push_back({sra.start.x + f * (sra.end.x - sra.start.x),
                     sra.start.y + f * (sra.end.y - sra.start.y)});
    }
  }
  return pts;
}

MaterialRef material_at(const SceneSpec& scene, const Point& x, bool with_inclusions) {
  if (!scene.domain.contains(x))
    throw std::invalid_argument("material_at: point outside the domain");
  MaterialRef ref;
  if (x.y > scene.interface_y) {
    ref.region = RegionKind::fluid;
    ref.fluid = scene.fluid;
    return ref;
  }
  if (with_inclusions) {
    for (std::size_t k = 0; k < scene.inclusions.size(); ++k) {
      if (scene.inclusions[k].contains(x)) {
        ref.region = RegionKind::inclusion;
        ref.inclusion_index = static_cast<int>(k);
        ref.solid = scene.inclusions[k].material;
        return ref;
      }
    }
  }
  if (scene.skin_band && x.y <= scene.skin_band->y_top && x.y >= scene.skin_band->y_bottom) {
    ref.region = RegionKind::skin;
    ref.solid = scene.skin;
    return ref;
  }
  ref.region = RegionKind::tissue;
  ref.solid = scene.tissue;
  return ref;
}

const std::vector<MaterialPreset>& builtin_presets() {
  static const std::vector<MaterialPreset> presets = [] {
    std::vector<MaterialPreset> p;
    MaterialPreset fluid;
    fluid.name = "fluid";
    fluid.is_fluid = true;
    fluid.fluid = FluidMaterial(1000.0, 2.25e9);
    p.push_back(fluid);
    p.push_back({"skin", false, {}, SolidMaterial(1150.0, 6.66e9, 66.66e3)});
    p.push_back({"tissue", false, {}, SolidMaterial(1000.0, 1.83e9, 18.33e3)});
    p.push_back({"benign", false, {}, SolidMaterial(1000.0, 2.16e9, 21.66e3)});
    p.push_back({"malignant", false, {}, SolidMaterial(1000.0, 2.99e9, 30.0e3)});
    return p;
  }();
  return presets;
}

const MaterialPreset& preset(const std::string& name) {
  for (const MaterialPreset& p : builtin_presets()) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("unknown material preset: " + name);
}

double default_t_final(const SceneSpec& scene, const Point& source) {
  double vp_min = derive_velocities(scene.fluid).vp;
  if (scene.has_solid()) {
    vp_min = std::min(vp_min, derive_velocities(scene.tissue).vp);
    if (scene.skin_band) vp_min = std::min(vp_min, derive_velocities(scene.skin).vp);
    for (const InclusionSpec& inc : scene.inclusions)
      vp_min = std::min(vp_min, derive_velocities(inc.material).vp);
  }
  const Point corners[4] = {{scene.domain.x0, scene.domain.y0},
                            {scene.domain.x1, scene.domain.y0},
                            {scene.domain.x0, scene.domain.y1},
                            {scene.domain.x1, scene.domain.y1}};
  auto dist = [](const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
  };
  double longest = 0.0;
  for (const Point& c : corners) {
    double to_receiver = 0.0;
    for (const SraSpec& sra : scene.sras) {
      for (int k = 0; k < sra.receiver_count; ++k)
        to_receiver = std::max(to_receiver, dist(c, sra.receiver_position(k)));
    }
    longest = std::max(longest, dist(source, c) + to_receiver);
  }
  if (longest == 0.0) longest = dist({scene.domain.x0, scene.domain.y0},
                                     {scene.domain.x1, scene.domain.y1});
  return 3.0 * longest / vp_min;
}

}  // namespace trim
