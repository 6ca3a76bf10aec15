#include "trim/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace trim {

namespace {

std::string trim_ws(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

struct KeyValue {
  std::string section;
  std::string key;
  std::string value;
  int section_count;  // 1-based instance number of the section
  int line;
};

std::vector<KeyValue> parse_kv(const std::string& text, const std::string& origin) {
  std::vector<KeyValue> out;
  std::istringstream is(text);
  std::string line, section;
  int section_count = 0;
  std::vector<std::pair<std::string, int>> counts;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim_ws(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": bad section header");
      section = trim_ws(line.substr(1, line.size() - 2));
      auto it = std::find_if(counts.begin(), counts.end(),
                             [&](const auto& p) { return p.first == section; });
      if (it == counts.end()) {
        counts.push_back({section, 1});
        section_count = 1;
      } else {
        section_count = ++it->second;
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": expected key = value");
    out.push_back({section, trim_ws(line.substr(0, eq)), trim_ws(line.substr(eq + 1)),
                   section_count, lineno});
  }
  return out;
}

double to_double(const KeyValue& kv) {
  try {
    std::size_t used = 0;
    const double v = std::stod(kv.value, &used);
    if (trim_ws(kv.value.substr(used)).empty()) return v;
  } catch (...) {
  }
  throw std::invalid_argument("line " + std::to_string(kv.line) + ": bad number for " + kv.key);
}

Point to_point(const KeyValue& kv) {
  std::istringstream is(kv.value);
  double x, y;
  if (!(is >> x >> y))
    throw std::invalid_argument("line " + std::to_string(kv.line) + ": expected two numbers for " +
                                kv.key);
  return {x, y};
}

SolidMaterial solid_from(const std::string& preset_name, double rho, double lambda, double mu,
                         bool have_explicit) {
  if (!preset_name.empty()) {
    const MaterialPreset& p = preset(preset_name);
    if (p.is_fluid) throw std::invalid_argument("preset " + preset_name + " is a fluid");
    return p.solid;
  }
  if (!have_explicit) throw std::invalid_argument("material missing (preset name or rho/lambda/mu)");
  return SolidMaterial(rho, lambda, mu);
}

}  // namespace

SceneSpec parse_scene(const std::string& text, const std::string& origin) {
  SceneSpec scene;
  scene.tissue = preset("tissue").solid;
  scene.skin = preset("skin").solid;
  scene.fluid = preset("fluid").fluid;

  struct SolidAccum {
    std::string preset_name;
    double rho = 0.0, lambda = 0.0, mu = 0.0;
    bool any = false;
  };
  SolidAccum tissue_acc, skin_acc;
  bool skin_section = false;
  double skin_thickness = 0.0, skin_top = 0.0, skin_bottom = 0.0;
  bool skin_explicit_band = false;

  struct InclusionAccum {
    Point center;
    double a = 0.0, b = 0.0, rotation = 0.0;
    SolidAccum mat;
  };
  std::vector<InclusionAccum> inclusions;
  std::vector<SraSpec> sras;
  struct SourceAccum {
    bool on_sra = false;
    double fraction = 0.0;
    Point position;
  };
  std::vector<SourceAccum> sources;

  for (const KeyValue& kv : parse_kv(text, origin)) {
    if (kv.section == "domain") {
      if (kv.key == "x0") scene.domain.x0 = to_double(kv);
      else if (kv.key == "x1") scene.domain.x1 = to_double(kv);
      else if (kv.key == "y0") scene.domain.y0 = to_double(kv);
      else if (kv.key == "y1") scene.domain.y1 = to_double(kv);
      else if (kv.key == "interface_y") scene.interface_y = to_double(kv);
      else throw std::invalid_argument("unknown domain key: " + kv.key);
    } else if (kv.section == "fluid") {
      if (kv.key == "material") scene.fluid = preset(kv.value).fluid;
      else if (kv.key == "rho") scene.fluid.rho = to_double(kv);
      else if (kv.key == "lambda") scene.fluid.lambda = to_double(kv);
      else throw std::invalid_argument("unknown fluid key: " + kv.key);
    } else if (kv.section == "tissue" || kv.section == "skin") {
      SolidAccum& acc = kv.section == "tissue" ? tissue_acc : skin_acc;
      if (kv.section == "skin") skin_section = true;
      if (kv.key == "material") acc.preset_name = kv.value;
      else if (kv.key == "rho") { acc.rho = to_double(kv); acc.any = true; }
      else if (kv.key == "lambda") { acc.lambda = to_double(kv); acc.any = true; }
      else if (kv.key == "mu") { acc.mu = to_double(kv); acc.any = true; }
      else if (kv.section == "skin" && kv.key == "thickness") skin_thickness = to_double(kv);
      else if (kv.section == "skin" && kv.key == "y_top") { skin_top = to_double(kv); skin_explicit_band = true; }
      else if (kv.section == "skin" && kv.key == "y_bottom") { skin_bottom = to_double(kv); skin_explicit_band = true; }
      else throw std::invalid_argument("unknown " + kv.section + " key: " + kv.key);
    } else if (kv.section == "inclusion") {
      if (static_cast<int>(inclusions.size()) < kv.section_count) inclusions.resize(kv.section_count);
      InclusionAccum& acc = inclusions[kv.section_count - 1];
      if (kv.key == "center") acc.center = to_point(kv);
      else if (kv.key == "semi_axes") { const Point p = to_point(kv); acc.a = p.x; acc.b = p.y; }
      else if (kv.key == "rotation") acc.rotation = to_double(kv);
      else if (kv.key == "material") acc.mat.preset_name = kv.value;
      else if (kv.key == "rho") { acc.mat.rho = to_double(kv); acc.mat.any = true; }
      else if (kv.key == "lambda") { acc.mat.lambda = to_double(kv); acc.mat.any = true; }
      else if (kv.key == "mu") { acc.mat.mu = to_double(kv); acc.mat.any = true; }
      else throw std::invalid_argument("unknown inclusion key: " + kv.key);
    } else if (kv.section == "sra") {
      if (static_cast<int>(sras.size()) < kv.section_count) sras.resize(kv.section_count);
      SraSpec& sra = sras[kv.section_count - 1];
      if (kv.key == "start") sra.start = to_point(kv);
      else if (kv.key == "end") sra.end = to_point(kv);
      else if (kv.key == "receivers") sra.receiver_count = static_cast<int>(to_double(kv));
      else throw std::invalid_argument("unknown sra key: " + kv.key);
    } else if (kv.section == "source") {
      if (static_cast<int>(sources.size()) < kv.section_count) sources.resize(kv.section_count);
      SourceAccum& src = sources[kv.section_count - 1];
      if (kv.key == "position") src.position = to_point(kv);
      else if (kv.key == "on_sra") { src.on_sra = true; src.fraction = to_double(kv); }
      else throw std::invalid_argument("unknown source key: " + kv.key);
    } else if (kv.section == "timing") {
      if (kv.key == "nu0") scene.nu0 = to_double(kv);
      else if (kv.key == "t_final") scene.t_final = to_double(kv);
      else throw std::invalid_argument("unknown timing key: " + kv.key);
    } else if (kv.section == "boundaries") {
      if (kv.key == "fluid_abc") {
        if (kv.value == "engquist_majda") scene.fluid_abc = FluidAbcKind::engquist_majda;
        else if (kv.value == "bayliss_turkel") scene.fluid_abc = FluidAbcKind::bayliss_turkel;
        else throw std::invalid_argument("unknown fluid_abc: " + kv.value);
      } else if (kv.key == "bt_radius") scene.bt_radius = to_double(kv);
      else throw std::invalid_argument("unknown boundaries key: " + kv.key);
    } else {
      throw std::invalid_argument("unknown section: [" + kv.section + "]");
    }
  }

  scene.tissue = solid_from(tissue_acc.preset_name, tissue_acc.rho, tissue_acc.lambda,
                            tissue_acc.mu, tissue_acc.any);
  if (skin_section) {
    scene.skin = solid_from(skin_acc.preset_name.empty() ? "skin" : skin_acc.preset_name,
                            skin_acc.rho, skin_acc.lambda, skin_acc.mu, skin_acc.any);
    if (skin_explicit_band) {
      scene.skin_band = SkinBand{skin_top, skin_bottom};
    } else {
      const double thickness =
          skin_thickness > 0.0 ? skin_thickness : scene.wavelength() / 6.0;
      scene.skin_band = SkinBand{scene.interface_y, scene.interface_y - thickness};
    }
  }
  for (const InclusionAccum& acc : inclusions) {
    InclusionSpec inc;
    inc.center = acc.center;
    inc.semi_a = acc.a;
    inc.semi_b = acc.b;
    inc.rotation = acc.rotation;
    inc.material = solid_from(acc.mat.preset_name, acc.mat.rho, acc.mat.lambda, acc.mat.mu,
                              acc.mat.any);
    scene.inclusions.push_back(inc);
  }
  scene.sras = sras;
  for (const SourceAccum& src : sources) {
    if (src.on_sra) scene.sources_on_sra.push_back(src.fraction);
    else scene.sources.push_back(src.position);
  }
  scene.validate();
  if (scene.sras.empty()) throw std::invalid_argument("scene declares no [sra] section");
  if (scene.sources.empty() && scene.sources_on_sra.empty())
    throw std::invalid_argument("scene declares no [source] section");
  return scene;
}

SceneSpec load_scene(const std::string& path) {
  std::ifstream is(path);
  if (!is.good()) throw std::runtime_error("cannot open scene file: " + path);
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_scene(buffer.str(), path);
}

void RunConfig::finalize() {
  if (!seed_from_cli) {
    if (const char* env = std::getenv("TRIM_SEED")) seed = std::strtoull(env, nullptr, 10);
  }
  if (!threads_from_cli) {
    if (const char* env = std::getenv("TRIM_THREADS")) threads = std::atoi(env);
  }
  if (cfl <= 0.0 || cfl > 1.0) throw std::invalid_argument("cfl must lie in (0, 1]");
  if (degree != 1 && degree != 2) throw std::invalid_argument("degree must be 1 or 2");
  if (noise_coeff < 0.0) throw std::invalid_argument("noise coefficient must be >= 0");
  if (movie_stride < 1) throw std::invalid_argument("movie stride must be >= 1");
  if (solver_tol <= 0.0 || solver_tol >= 1.0) throw std::invalid_argument("bad solver tolerance");
  scene.validate();
}

double RunConfig::resolved_h_forward() const {
  return h_forward > 0.0 ? h_forward : wavelength() / 10.0;
}

double RunConfig::resolved_h_reverse() const {
  return h_reverse > 0.0 ? h_reverse : 0.8 * resolved_h_forward();
}

int RunConfig::resolved_grid_nx() const {
  if (grid_nx > 0) return grid_nx;
  const double spacing = wavelength() / 8.0;
  return std::max(2, static_cast<int>(std::round(scene.domain.width() / spacing)) + 1);
}

int RunConfig::resolved_grid_ny() const {
  if (grid_ny > 0) return grid_ny;
  const double spacing = wavelength() / 8.0;
  const double height = scene.has_solid() ? scene.interface_y - scene.domain.y0
                                          : scene.domain.height();
  return std::max(2, static_cast<int>(std::round(height / spacing)) + 1);
}

int RunConfig::resolved_threads() const {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 2;
}

std::uint64_t RunConfig::job_seed(int job_index) const {
  return seed + 1000003ull * static_cast<std::uint64_t>(job_index);
}

}  // namespace trim
