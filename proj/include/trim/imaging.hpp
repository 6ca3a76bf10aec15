#ifndef TRIM_IMAGING_HPP
#define TRIM_IMAGING_HPP

#include <string>
#include <vector>

#include "trim/forward.hpp"
#include "trim/scene.hpp"

namespace trim {

enum class RtmVariant { full, component_u2, divergence, percentage, sum };

const char* rtm_variant_name(RtmVariant v);
RtmVariant rtm_variant_from_name(const std::string& name);

struct ImageField {
  int nx = 0, ny = 0;
  Point origin;
  double dx = 0.0, dy = 0.0;
  Vec values;  // row-major, iy*nx + ix
  RtmVariant variant = RtmVariant::full;
  std::vector<std::string> provenance;

  double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * nx + ix]; }
  Point position(int ix, int iy) const { return {origin.x + ix * dx, origin.y + iy * dy}; }
  bool same_grid(const ImageField& other) const;
  double max_value() const;
  /// Max over grid points inside the ellipse dilated by `dilation` on both
  /// semi-axes (region peak used by the discrimination experiments).
  double region_peak(const InclusionSpec& region, double dilation) const;
};

/// Cross-correlation image: reversed frame at t' integrates against the
/// incident frame at T_f - t' (linearly interpolated), rectangle rule over
/// the reversed frame grid.
ImageField rtm(const FieldMovie& reversed, const FieldMovie& incident, RtmVariant variant);

/// Image normalized by the peak time-integrated incident energy of the same
/// quantity, max taken over the sampled solid grid.
ImageField rtm_percentage(const ImageField& image, const FieldMovie& incident);

/// Pointwise sum over per-source percentage images.
ImageField rtm_sum(const std::vector<ImageField>& per_source);

/// Pointwise sum over SRA placements (same accumulation as rtm_sum).
ImageField aggregate_probes(const std::vector<ImageField>& per_sra);

struct Peak {
  Point location;
  int ix = 0, iy = 0;
  double value = 0.0;
  double prominence = 0.0;
};

struct PeakReport {
  std::vector<Peak> peaks;  // sorted by value, descending
  double threshold = 0.0;   // absolute cut applied
};

/// Strict local maxima over 8-neighborhoods with value >= fraction * max.
PeakReport find_peaks(const ImageField& image, double threshold_fraction = 0.3);

}  // namespace trim

#endif
