#include "trim/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace trim {

const char* rtm_variant_name(RtmVariant v) {
  switch (v) {
    case RtmVariant::full: return "full";
    case RtmVariant::component_u2: return "component_u2";
    case RtmVariant::divergence: return "divergence";
    case RtmVariant::percentage: return "percentage";
    case RtmVariant::sum: return "sum";
  }
  return "unknown";
}

RtmVariant rtm_variant_from_name(const std::string& name) {
  if (name == "full") return RtmVariant::full;
  if (name == "component_u2" || name == "u2") return RtmVariant::component_u2;
  if (name == "divergence" || name == "div") return RtmVariant::divergence;
  if (name == "percentage") return RtmVariant::percentage;
  if (name == "sum") return RtmVariant::sum;
  throw std::invalid_argument("unknown imaging variant: " + name);
}

bool ImageField::same_grid(const ImageField& other) const {
  return nx == other.nx && ny == other.ny && std::abs(origin.x - other.origin.x) < 1e-12 &&
         std::abs(origin.y - other.origin.y) < 1e-12 && std::abs(dx - other.dx) < 1e-12 &&
         std::abs(dy - other.dy) < 1e-12;
}

double ImageField::max_value() const {
  double m = values.empty() ? 0.0 : values[0];
  for (double v : values) m = std::max(m, v);
  return m;
}

double ImageField::region_peak(const InclusionSpec& region, double dilation) const {
  InclusionSpec dilated = region;
  dilated.semi_a += dilation;
  dilated.semi_b += dilation;
  double peak = -std::numeric_limits<double>::infinity();
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix)
      if (dilated.contains(position(ix, iy))) peak = std::max(peak, at(ix, iy));
  if (!std::isfinite(peak))
    throw std::invalid_argument("region_peak: region contains no grid points");
  return peak;
}

namespace {

// Per-point product of the chosen quantity between two frames.
inline double frame_product(const MovieFrame& a, const MovieFrame& b, std::size_t p,
                            RtmVariant variant) {
  switch (variant) {
    case RtmVariant::full: return a.u1[p] * b.u1[p] + a.u2[p] * b.u2[p];
    case RtmVariant::component_u2: return a.u2[p] * b.u2[p];
    case RtmVariant::divergence: return a.div[p] * b.div[p];
    default: throw std::invalid_argument("rtm: variant must be full, component_u2 or divergence");
  }
}

inline double frame_energy(const MovieFrame& a, std::size_t p, RtmVariant variant) {
  switch (variant) {
    case RtmVariant::full: return a.u1[p] * a.u1[p] + a.u2[p] * a.u2[p];
    case RtmVariant::component_u2: return a.u2[p] * a.u2[p];
    case RtmVariant::divergence: return a.div[p] * a.div[p];
    default: throw std::invalid_argument("rtm_percentage: unsupported variant");
  }
}

}  // namespace

ImageField rtm(const FieldMovie& reversed, const FieldMovie& incident, RtmVariant variant) {
  if (!reversed.same_grid(incident))
    throw std::invalid_argument("rtm: movies sampled on different grids");
  if (reversed.empty() || incident.empty())
    throw std::invalid_argument("rtm: empty movie");

  ImageField image;
  image.nx = reversed.nx;
  image.ny = reversed.ny;
  image.origin = reversed.origin;
  image.dx = reversed.dx;
  image.dy = reversed.dy;
  image.variant = variant;
  const std::size_t npts = reversed.frames[0].u1.size();
  image.values.assign(npts, 0.0);

  const double t_final = incident.coverage();
  const double dt_frame = reversed.frame_interval();
  const double inc_interval = incident.frame_interval();

  for (int j = 0; j < reversed.n_frames(); ++j) {
    const double t_rev = j * dt_frame;
    if (t_rev > t_final + 1e-12) break;
    // incident frame at t = T_f - t', linearly interpolated and clamped
    const double s = (t_final - t_rev) / inc_interval;
    int k0 = static_cast<int>(std::floor(s));
    double w = s - k0;
    if (k0 >= incident.n_frames() - 1) {
      k0 = incident.n_frames() - 1;
      w = 0.0;
    }
    if (k0 < 0) {
      k0 = 0;
      w = 0.0;
    }
    const MovieFrame& rev = reversed.frames[j];
    const MovieFrame& inc0 = incident.frames[k0];
    const MovieFrame* inc1 = (w > 0.0 && k0 + 1 < incident.n_frames())
                                 ? &incident.frames[k0 + 1]
                                 : nullptr;
    for (std::size_t p = 0; p < npts; ++p) {
      double v = frame_product(rev, inc0, p, variant);
      if (inc1 != nullptr)
        v = (1.0 - w) * v + w * frame_product(rev, *inc1, p, variant);
      image.values[p] += v * dt_frame;
    }
  }
  return image;
}

ImageField rtm_percentage(const ImageField& image, const FieldMovie& incident) {
  if (image.nx != incident.nx || image.ny != incident.ny)
    throw std::invalid_argument("rtm_percentage: image and movie grids differ");
  const double dt_frame = incident.frame_interval();
  const std::size_t npts = image.values.size();
  double denom = 0.0;
  Vec accum(npts, 0.0);
  for (const MovieFrame& f : incident.frames)
    for (std::size_t p = 0; p < npts; ++p) accum[p] += frame_energy(f, p, image.variant) * dt_frame;
  for (double v : accum) denom = std::max(denom, v);
  if (denom <= 0.0)
    throw std::invalid_argument("rtm_percentage: incident movie carries no energy");

  ImageField out = image;
  out.variant = RtmVariant::percentage;
  for (double& v : out.values) v /= denom;
  return out;
}

namespace {

ImageField accumulate(const std::vector<ImageField>& parts, const char* who) {
  if (parts.empty()) throw std::invalid_argument(std::string(who) + ": no images");
  ImageField out = parts.front();
  out.variant = RtmVariant::sum;
  for (std::size_t k = 1; k < parts.size(); ++k) {
    if (!parts[k].same_grid(out))
      throw std::invalid_argument(std::string(who) + ": mismatched grids");
    for (std::size_t p = 0; p < out.values.size(); ++p) out.values[p] += parts[k].values[p];
    out.provenance.insert(out.provenance.end(), parts[k].provenance.begin(),
                          parts[k].provenance.end());
  }
  return out;
}

}  // namespace

ImageField rtm_sum(const std::vector<ImageField>& per_source) {
  return accumulate(per_source, "rtm_sum");
}

ImageField aggregate_probes(const std::vector<ImageField>& per_sra) {
  return accumulate(per_sra, "aggregate_probes");
}

PeakReport find_peaks(const ImageField& image, double threshold_fraction) {
  if (threshold_fraction <= 0.0 || threshold_fraction >= 1.0)
    throw std::invalid_argument("find_peaks: threshold_fraction must lie in (0,1)");
  PeakReport report;
  const double global_max = image.max_value();
  report.threshold = threshold_fraction * global_max;

  const int nx = image.nx, ny = image.ny;
  auto value = [&](int ix, int iy) { return image.at(ix, iy); };

  std::vector<int> peak_index(static_cast<std::size_t>(nx) * ny, -1);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const double v = value(ix, iy);
      if (v < report.threshold) continue;
      bool strict_max = true;
      for (int dy = -1; dy <= 1 && strict_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int jx = ix + dx, jy = iy + dy;
          if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) continue;
          if (value(jx, jy) >= v) {
            strict_max = false;
            break;
          }
        }
      }
      if (!strict_max) continue;
      Peak p;
      p.ix = ix;
      p.iy = iy;
      p.location = image.position(ix, iy);
      p.value = v;
      peak_index[static_cast<std::size_t>(iy) * nx + ix] =
          static_cast<int>(report.peaks.size());
      report.peaks.push_back(p);
    }
  }

  // prominence by descending flood: a peak's component merges with a
  // higher-peak component at its key saddle level
  std::vector<std::size_t> order(static_cast<std::size_t>(nx) * ny);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return image.values[a] > image.values[b]; });
  std::vector<int> parent(order.size(), -1);  // union-find over flooded cells
  std::vector<int> comp_peak(order.size(), -1);
  std::function<int(int)> find = [&](int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  for (std::size_t cell : order) {
    parent[cell] = static_cast<int>(cell);
    comp_peak[cell] = peak_index[cell];
    const int ix = static_cast<int>(cell) % nx;
    const int iy = static_cast<int>(cell) / nx;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int jx = ix + dx, jy = iy + dy;
        if (jx < 0 || jx >= nx || jy < 0 || jy >= ny) continue;
        const std::size_t other = static_cast<std::size_t>(jy) * nx + jx;
        if (parent[other] < 0) continue;  // not flooded yet (lower value)
        const int ra = find(static_cast<int>(cell));
        const int rb = find(static_cast<int>(other));
        if (ra == rb) continue;
        int pa = comp_peak[ra], pb = comp_peak[rb];
        // the component whose peak is lower dies at this saddle
        auto peak_value = [&](int idx) {
          return idx >= 0 ? report.peaks[idx].value : -std::numeric_limits<double>::infinity();
        };
        if (peak_value(pa) < peak_value(pb)) {
          std::swap(pa, pb);
        }
        if (pb >= 0 && report.peaks[pb].prominence == 0.0)
          report.peaks[pb].prominence = report.peaks[pb].value - image.values[cell];
        parent[rb] = ra;
        comp_peak[ra] = pa;
      }
    }
  }
  // the global maximum never merged into anything higher
  for (Peak& p : report.peaks) {
    if (p.prominence == 0.0) {
      double min_value = p.value;
      for (double v : image.values) min_value = std::min(min_value, v);
      p.prominence = p.value - min_value;
    }
  }

  std::sort(report.peaks.begin(), report.peaks.end(),
            [](const Peak& a, const Peak& b) { return a.value > b.value; });
  return report;
}

}  // namespace trim
