#ifndef TRIM_SCENE_HPP
#define TRIM_SCENE_HPP

#include <optional>
#include <string>
#include <vector>

namespace trim {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Rect {
  double x0 = 0.0, x1 = 0.0;
  double y0 = 0.0, y1 = 0.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool contains(const Point& p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
};

/// Homogeneous fluid: density and bulk modulus.
struct FluidMaterial {
  double rho = 0.0;     // kg/m^3
  double lambda = 0.0;  // Pa

  FluidMaterial() = default;
  FluidMaterial(double rho_, double lambda_);
};

/// Isotropic solid: density and Lame parameters.
struct SolidMaterial {
  double rho = 0.0;     // kg/m^3
  double lambda = 0.0;  // Pa
  double mu = 0.0;      // Pa

  SolidMaterial() = default;
  SolidMaterial(double rho_, double lambda_, double mu_);
};

struct Velocities {
  double vp = 0.0;  // m/s
  double vs = 0.0;  // m/s
};

Velocities derive_velocities(const FluidMaterial& m);
Velocities derive_velocities(const SolidMaterial& m);

/// E = mu (3 lambda + 2 mu) / (lambda + mu); rejects lambda + mu <= 0.
double young_modulus(const SolidMaterial& m);

/// Elliptic inclusion embedded in the tissue layer.
struct InclusionSpec {
  Point center;
  double semi_a = 0.0;   // m
  double semi_b = 0.0;   // m
  double rotation = 0.0;  // radians
  SolidMaterial material;

  bool contains(const Point& p) const;
};

/// Source-receivers array: a segment in the fluid sampled by receiver_count
/// equally spaced transducers.
struct SraSpec {
  Point start;
  Point end;
  int receiver_count = 1;

  Point receiver_position(int k) const;
};

enum class FluidAbcKind { engquist_majda, bayliss_turkel };

struct SkinBand {
  double y_top = 0.0;
  double y_bottom = 0.0;
};

enum class RegionKind { fluid, skin, tissue, inclusion };

struct MaterialRef {
  RegionKind region = RegionKind::fluid;
  int inclusion_index = -1;  // valid when region == inclusion
  FluidMaterial fluid;       // valid when region == fluid
  SolidMaterial solid;       // valid otherwise
  bool is_fluid() const { return region == RegionKind::fluid; }
};

/// Full experiment description. Fluid occupies y in (interface_y, domain.y1],
/// solid y in [domain.y0, interface_y). interface_y == domain.y0 degenerates
/// to an all-fluid scene (used by acoustic-only validation problems).
struct SceneSpec {
  Rect domain;
  double interface_y = 0.0;
  std::optional<SkinBand> skin_band;
  FluidMaterial fluid;
  SolidMaterial skin;
  SolidMaterial tissue;
  std::vector<InclusionSpec> inclusions;
  std::vector<SraSpec> sras;
  std::vector<Point> sources;          // explicit source points in the fluid
  std::vector<double> sources_on_sra;  // fractions in [0,1] along each SRA
  double nu0 = 0.0;      // Hz
  double t_final = 0.0;  // s; <= 0 means "derive from geometry"
  FluidAbcKind fluid_abc = FluidAbcKind::engquist_majda;
  double bt_radius = 0.0;  // Bayliss-Turkel radius, used in bayliss_turkel mode

  bool has_solid() const { return interface_y > domain.y0; }
  double wavelength() const;  // V_f^p / nu0
  void validate() const;

  /// Source points effective for one SRA: explicit sources plus the
  /// fraction-mapped points of sources_on_sra.
  std::vector<Point> sources_for_sra(int sra_index) const;
};

MaterialRef material_at(const SceneSpec& scene, const Point& x, bool with_inclusions);

struct MaterialPreset {
  std::string name;
  bool is_fluid = false;
  FluidMaterial fluid;
  SolidMaterial solid;
};

/// The five built-in materials: fluid, skin, tissue, benign, malignant.
const std::vector<MaterialPreset>& builtin_presets();
const MaterialPreset& preset(const std::string& name);

/// Geometric travel-time bound used for the default simulation horizon:
/// 3 x max over domain corners of (source->corner + corner->receiver),
/// at the slowest P speed in the scene.
double default_t_final(const SceneSpec& scene, const Point& source);

}  // namespace trim

#endif
