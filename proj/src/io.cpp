#include "trim/io.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace trim::io {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error(what);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char bytes[8];
  is.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

void write_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64(os, bits);
}

double read_f64(std::istream& is) {
  const std::uint64_t bits = read_u64(is);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void write_f64_array(std::ostream& os, const Vec& v) {
  for (double x : v) write_f64(os, x);
}

void read_f64_array(std::istream& is, Vec& v) {
  for (double& x : v) x = read_f64(is);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_traces(const std::string& path, const TraceRecord& traces) {
  std::ofstream os(path);
  require(os.good(), "write_traces: cannot open " + path);
  os << "# kind=" << trace_kind_name(traces.kind) << " receivers=" << traces.n_receivers()
     << " samples=" << traces.n_times() << " vertices=";
  for (int r = 0; r < traces.n_receivers(); ++r) {
    if (r) os << ';';
    os << traces.receiver_vertices[r];
  }
  os << '\n';
  os << "time";
  for (const Point& p : traces.receiver_positions)
    os << ",p(" << format_double(p.x) << '|' << format_double(p.y) << ')';
  os << '\n';
  for (int k = 0; k < traces.n_times(); ++k) {
    os << format_double(traces.times[k]);
    for (int r = 0; r < traces.n_receivers(); ++r) os << ',' << format_double(traces.values[k][r]);
    os << '\n';
  }
  require(os.good(), "write_traces: write failed on " + path);
}

TraceRecord read_traces(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), "read_traces: cannot open " + path);
  TraceRecord traces;
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), "read_traces: missing metadata line");
  require(line.rfind("# kind=", 0) == 0, "read_traces: bad metadata line");
  {
    std::istringstream meta(line.substr(2));
    std::string token;
    while (meta >> token) {
      if (token.rfind("kind=", 0) == 0) traces.kind = trace_kind_from_name(token.substr(5));
      if (token.rfind("vertices=", 0) == 0 && token.size() > 9) {
        for (const std::string& s : split(token.substr(9), ';'))
          traces.receiver_vertices.push_back(std::stoi(s));
      }
    }
  }
  require(static_cast<bool>(std::getline(is, line)), "read_traces: missing header row");
  for (const std::string& cell : split(line, ',')) {
    if (cell == "time") continue;
    require(cell.size() > 3 && cell.front() == 'p', "read_traces: bad header cell " + cell);
    const std::string inner = cell.substr(2, cell.size() - 3);
    const auto parts = split(inner, '|');
    require(parts.size() == 2, "read_traces: bad coordinate " + cell);
    traces.receiver_positions.push_back({std::stod(parts[0]), std::stod(parts[1])});
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    require(cells.size() == traces.receiver_positions.size() + 1, "read_traces: ragged row");
    traces.times.push_back(std::stod(cells[0]));
    Vec row(traces.receiver_positions.size());
    for (std::size_t r = 0; r < row.size(); ++r) row[r] = std::stod(cells[r + 1]);
    traces.values.push_back(std::move(row));
  }
  if (traces.receiver_vertices.size() != traces.receiver_positions.size())
    traces.receiver_vertices.assign(traces.receiver_positions.size(), -1);
  return traces;
}

void write_movie(const std::string& path, const FieldMovie& movie) {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), "write_movie: cannot open " + path);
  os.write("TRIM", 4);
  write_u64(os, 1);  // version
  write_u64(os, static_cast<std::uint64_t>(movie.nx));
  write_u64(os, static_cast<std::uint64_t>(movie.ny));
  write_u64(os, static_cast<std::uint64_t>(movie.n_frames()));
  write_u64(os, static_cast<std::uint64_t>(movie.stride));
  write_f64(os, movie.dt);
  for (const MovieFrame& f : movie.frames) {
    write_f64_array(os, f.u1);
    write_f64_array(os, f.u2);
    write_f64_array(os, f.div);
  }
  require(os.good(), "write_movie: write failed on " + path);
}

FieldMovie read_movie(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "read_movie: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  require(is.good() && std::memcmp(magic, "TRIM", 4) == 0, "read_movie: bad magic in " + path);
  const std::uint64_t version = read_u64(is);
  require(version == 1, "read_movie: unsupported version");
  FieldMovie movie;
  movie.nx = static_cast<int>(read_u64(is));
  movie.ny = static_cast<int>(read_u64(is));
  const std::uint64_t frames = read_u64(is);
  movie.stride = static_cast<int>(read_u64(is));
  movie.dt = read_f64(is);
  const std::size_t npts = static_cast<std::size_t>(movie.nx) * movie.ny;
  movie.frames.resize(frames);
  for (MovieFrame& f : movie.frames) {
    f.u1.resize(npts);
    f.u2.resize(npts);
    f.div.resize(npts);
    read_f64_array(is, f.u1);
    read_f64_array(is, f.u2);
    read_f64_array(is, f.div);
  }
  require(is.good(), "read_movie: truncated file " + path);
  return movie;
}

void write_image_csv(const std::string& path, const ImageField& image) {
  std::ofstream os(path);
  require(os.good(), "write_image_csv: cannot open " + path);
  os << "# origin_x=" << format_double(image.origin.x)
     << " origin_y=" << format_double(image.origin.y) << " dx=" << format_double(image.dx)
     << " dy=" << format_double(image.dy) << " nx=" << image.nx << " ny=" << image.ny
     << " variant=" << rtm_variant_name(image.variant) << '\n';
  for (int iy = 0; iy < image.ny; ++iy) {
    for (int ix = 0; ix < image.nx; ++ix) {
      if (ix) os << ',';
      os << format_double(image.at(ix, iy));
    }
    os << '\n';
  }
  require(os.good(), "write_image_csv: write failed on " + path);
}

ImageField read_image_csv(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), "read_image_csv: cannot open " + path);
  std::string line;
  require(static_cast<bool>(std::getline(is, line)) && line.rfind("# ", 0) == 0,
          "read_image_csv: missing metadata line");
  ImageField image;
  {
    std::istringstream meta(line.substr(2));
    std::string token;
    while (meta >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = token.substr(0, eq), value = token.substr(eq + 1);
      if (key == "origin_x") image.origin.x = std::stod(value);
      else if (key == "origin_y") image.origin.y = std::stod(value);
      else if (key == "dx") image.dx = std::stod(value);
      else if (key == "dy") image.dy = std::stod(value);
      else if (key == "nx") image.nx = std::stoi(value);
      else if (key == "ny") image.ny = std::stoi(value);
      else if (key == "variant") image.variant = rtm_variant_from_name(value);
    }
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    for (const std::string& cell : split(line, ',')) image.values.push_back(std::stod(cell));
  }
  require(static_cast<int>(image.values.size()) == image.nx * image.ny,
          "read_image_csv: value count mismatch");
  return image;
}

void write_image_pgm(const std::string& path, const std::string& sidecar_path,
                     const ImageField& image) {
  double lo = image.values.empty() ? 0.0 : image.values[0];
  double hi = lo;
  for (double v : image.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi > lo ? hi - lo : 1.0;
  std::ofstream os(path, std::ios::binary);
  require(os.good(), "write_image_pgm: cannot open " + path);
  os << "P5\n" << image.nx << ' ' << image.ny << "\n255\n";
  // top image row = largest y, the usual raster orientation
  for (int iy = image.ny - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < image.nx; ++ix) {
      const double t = (image.at(ix, iy) - lo) / span;
      const int g = std::max(0, std::min(255, static_cast<int>(t * 255.0 + 0.5)));
      const unsigned char byte = static_cast<unsigned char>(g);
      os.write(reinterpret_cast<const char*>(&byte), 1);
    }
  }
  require(os.good(), "write_image_pgm: write failed on " + path);
  std::ofstream sc(sidecar_path);
  require(sc.good(), "write_image_pgm: cannot open " + sidecar_path);
  sc << "min=" << format_double(lo) << "\nmax=" << format_double(hi)
     << "\nscale=" << format_double(255.0 / span) << "\nvariant=" << rtm_variant_name(image.variant)
     << "\norigin_x=" << format_double(image.origin.x)
     << "\norigin_y=" << format_double(image.origin.y) << "\ndx=" << format_double(image.dx)
     << "\ndy=" << format_double(image.dy) << '\n';
  require(sc.good(), "write_image_pgm: sidecar write failed");
}

void write_mesh(const std::string& path, const Mesh& mesh) {
  std::ofstream os(path);
  require(os.good(), "write_mesh: cannot open " + path);
  os << "# trim-mesh vertices=" << mesh.vertices.size() << " triangles=" << mesh.triangles.size()
     << " edges=" << mesh.boundary_edges.size() << '\n';
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    os << "vertex " << v << ' ' << format_double(mesh.vertices[v].x) << ' '
       << format_double(mesh.vertices[v].y) << '\n';
  auto region_name = [](RegionKind r) {
    switch (r) {
      case RegionKind::fluid: return "fluid";
      case RegionKind::skin: return "skin";
      case RegionKind::tissue: return "tissue";
      case RegionKind::inclusion: return "inclusion";
    }
    return "unknown";
  };
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tr = mesh.triangles[t];
    os << "triangle " << t << ' ' << tr.v[0] << ' ' << tr.v[1] << ' ' << tr.v[2] << ' '
       << region_name(tr.region) << ' ' << tr.inclusion_index << '\n';
  }
  auto tag_name = [](BoundaryTag tag) {
    switch (tag) {
      case BoundaryTag::gamma_f: return "GammaF";
      case BoundaryTag::gamma_s_horizontal: return "GammaS_horizontal";
      case BoundaryTag::gamma_s_vertical: return "GammaS_vertical";
      case BoundaryTag::gamma_i: return "GammaI";
    }
    return "unknown";
  };
  for (const BoundaryEdge& e : mesh.boundary_edges)
    os << "edge " << e.v0 << ' ' << e.v1 << ' ' << tag_name(e.tag) << '\n';
  require(os.good(), "write_mesh: write failed on " + path);
}

}  // namespace trim::io
