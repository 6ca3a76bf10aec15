#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "trim/scene.hpp"

using namespace trim;

namespace {

SceneSpec demo_scene() {
  SceneSpec s;
  s.domain = {-0.075, 0.075, -0.06, 0.03};
  s.interface_y = 0.0;
  s.skin_band = SkinBand{0.0, -0.0025};
  s.fluid = preset("fluid").fluid;
  s.skin = preset("skin").solid;
  s.tissue = preset("tissue").solid;
  InclusionSpec inc;
  inc.center = {0.0, -0.03};
  inc.semi_a = inc.semi_b = 0.006;
  inc.material = preset("malignant").solid;
  s.inclusions.push_back(inc);
  s.sras.push_back({{-0.06, 0.015}, {0.06, 0.015}, 27});
  s.sources.push_back({0.0, 0.015});
  s.nu0 = 100e3;
  return s;
}

}  // namespace

TEST_CASE("fluid velocities") {
  const Velocities v = derive_velocities(FluidMaterial(1000.0, 2.25e9));
  CHECK(v.vp == doctest::Approx(1500.0).epsilon(1e-12));
  CHECK(v.vs == 0.0);
}

TEST_CASE("solid shear velocity from the malignant parameters") {
  const Velocities v = derive_velocities(SolidMaterial(1000.0, 2.99e9, 3.0e4));
  CHECK(v.vs == doctest::Approx(std::sqrt(30.0)).epsilon(1e-12));  // 5.477...
  CHECK(v.vs == doctest::Approx(5.477).epsilon(1e-3));
}

TEST_CASE("unit material velocities") {
  const Velocities v = derive_velocities(FluidMaterial(1.0, 1.0));
  CHECK(v.vp == 1.0);
  CHECK(v.vs == 0.0);
}

TEST_CASE("material constructors reject degenerate inputs") {
  CHECK_THROWS_AS(FluidMaterial(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(FluidMaterial(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SolidMaterial(1.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(SolidMaterial(1.0, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("young modulus of the tumor presets") {
  CHECK(young_modulus(preset("malignant").solid) == doctest::Approx(9.0e4).epsilon(2e-3));
  CHECK(young_modulus(preset("benign").solid) == doctest::Approx(6.5e4).epsilon(2e-3));
  CHECK(young_modulus(SolidMaterial(1.0, 0.0, 1.0)) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("young modulus rejects lambda + mu <= 0") {
  SolidMaterial m;
  m.rho = 1.0;
  m.lambda = -1.0;
  m.mu = 0.5;
  CHECK_THROWS_AS(young_modulus(m), std::invalid_argument);
}

TEST_CASE("young modulus is monotone in mu at fixed lambda") {
  const double lambda = 2.0e9;
  double prev = 0.0;
  for (double mu = 1e3; mu <= 1e6; mu *= 2.0) {
    const double e = young_modulus(SolidMaterial(1000.0, lambda, mu));
    CHECK(e > prev);
    prev = e;
  }
}

TEST_CASE("preset velocities match the quoted values within 0.3%") {
  struct Expect {
    const char* name;
    double vp;
    double vs;
  };
  const Expect table[] = {
      {"fluid", 1500.0, 0.0},   {"skin", 2407.73, 7.61},      {"tissue", 1354.02, 4.28},
      {"benign", 1471.97, 4.65}, {"malignant", 1732.06, 5.47},
  };
  for (const Expect& e : table) {
    const MaterialPreset& p = preset(e.name);
    const Velocities v = p.is_fluid ? derive_velocities(p.fluid) : derive_velocities(p.solid);
    CHECK(std::abs(v.vp - e.vp) / e.vp < 3e-3);
    if (e.vs > 0.0)
      CHECK(std::abs(v.vs - e.vs) / e.vs < 3e-3);
    else
      CHECK(v.vs == 0.0);
  }
}

TEST_CASE("unknown preset throws") { CHECK_THROWS_AS(preset("adipose"), std::invalid_argument); }

TEST_CASE("material_at classification") {
  const SceneSpec s = demo_scene();
  const Point center = s.inclusions[0].center;

  const MaterialRef with = material_at(s, center, true);
  CHECK(with.region == RegionKind::inclusion);
  CHECK(with.inclusion_index == 0);
  CHECK(with.solid.lambda == s.inclusions[0].material.lambda);

  const MaterialRef without = material_at(s, center, false);
  CHECK(without.region == RegionKind::tissue);

  const MaterialRef skin = material_at(s, {0.03, -0.001}, true);
  CHECK(skin.region == RegionKind::skin);
  CHECK(skin.solid.rho == 1150.0);

  const MaterialRef fl = material_at(s, {0.0, 0.02}, true);
  CHECK(fl.region == RegionKind::fluid);

  CHECK_THROWS_AS(material_at(s, {1.0, 1.0}, true), std::invalid_argument);
}

TEST_CASE("material_at is piecewise constant within a region") {
  const SceneSpec s = demo_scene();
  const MaterialRef a = material_at(s, {-0.05, -0.04}, true);
  const MaterialRef b = material_at(s, {0.055, -0.052}, true);
  CHECK(a.region == RegionKind::tissue);
  CHECK(b.region == RegionKind::tissue);
  CHECK(a.solid.lambda == b.solid.lambda);
  CHECK(a.solid.mu == b.solid.mu);
  CHECK(a.solid.rho == b.solid.rho);
}

TEST_CASE("rotated ellipse containment") {
  InclusionSpec inc;
  inc.center = {0.0, 0.0};
  inc.semi_a = 2.0;
  inc.semi_b = 0.5;
  inc.rotation = M_PI / 2.0;
  CHECK(inc.contains({0.0, 1.9}));
  CHECK(!inc.contains({1.9, 0.0}));
}

TEST_CASE("scene validation rejects bad geometry") {
  SceneSpec s = demo_scene();
  s.interface_y = 0.05;  // above an SRA point -> SRA no longer in fluid
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);

  SceneSpec s2 = demo_scene();
  s2.inclusions[0].center.y = -0.001;  // pokes into the skin band
  CHECK_THROWS_AS(s2.validate(), std::invalid_argument);

  SceneSpec s3 = demo_scene();
  s3.sources[0] = {0.0, -0.03};  // source buried in the solid
  CHECK_THROWS_AS(s3.validate(), std::invalid_argument);
}

TEST_CASE("wavelength and sra-relative sources") {
  SceneSpec s = demo_scene();
  CHECK(s.wavelength() == doctest::Approx(0.015).epsilon(1e-12));
  s.sources.clear();
  s.sources_on_sra = {0.0, 0.5, 1.0};
  const auto pts = s.sources_for_sra(0);
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].x == doctest::Approx(-0.06));
  CHECK(pts[1].x == doctest::Approx(0.0));
  CHECK(pts[2].x == doctest::Approx(0.06));
  CHECK(pts[1].y == doctest::Approx(0.015));
}

TEST_CASE("default horizon covers the round trip with margin") {
  const SceneSpec s = demo_scene();
  const double t = default_t_final(s, s.sources[0]);
  // strictly longer than three direct crossings of the diagonal
  const double diag = std::hypot(s.domain.width(), s.domain.height());
  CHECK(t > diag / 1500.0);
  CHECK(t < 1.0);  // sane order of magnitude
}
