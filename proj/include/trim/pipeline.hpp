#ifndef TRIM_PIPELINE_HPP
#define TRIM_PIPELINE_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "trim/config.hpp"
#include "trim/forward.hpp"
#include "trim/imaging.hpp"

namespace trim {

struct PipelineJob {
  int index = 0;           // global job index; also seeds the noise stream
  int sra = 0;
  int source_ordinal = 0;  // position within the SRA's source list
  int distinct_source = 0; // index into the deduplicated source table
  Point source;
  std::string label;       // "sra<i>_src<j>"
};

struct VariantImages {
  RtmVariant variant = RtmVariant::component_u2;
  std::vector<ImageField> per_job;  // percentage image per job
  std::vector<ImageField> per_sra;  // rtm_sum over each SRA's jobs
  std::optional<ImageField> aggregate;  // probe aggregation, multi-SRA runs
};

enum PipelineStages : unsigned {
  stage_forward = 1u,
  stage_reverse = 2u,
  stage_image = 4u,
  stage_all = 7u,
};

struct PipelineResult {
  std::vector<PipelineJob> jobs;
  std::vector<VariantImages> variants;
  std::vector<std::string> failures;  // "stage job label: message"
  double h_forward = 0.0;
  double h_reverse = 0.0;
  double dt_forward = 0.0;
  int steps_forward = 0;
  int n_sras = 0;

  bool ok() const { return failures.empty(); }
  const VariantImages& images(RtmVariant v) const;
};

/// Runs the requested stages for every (SRA, source) job. With an out_dir the
/// artifact tree and a manifest are written; stages not requested read their
/// inputs back from the directory. Jobs run concurrently up to the thread
/// budget; outputs are deterministic for a fixed (config, seed).
PipelineResult run_pipeline(const RunConfig& config, unsigned stages = stage_all);

/// Deterministic job enumeration for a scene (sra-major, then sources).
std::vector<PipelineJob> enumerate_jobs(const SceneSpec& scene);

/// Reattach grid placement (dropped by the movie file format) from the scene.
void restore_grid_geometry(FieldMovie& movie, const SceneSpec& scene);

/// Bounded parallel loop; exceptions are reported per index.
void parallel_for(int count, int threads, const std::function<void(int)>& body,
                  std::vector<std::string>& failures, const std::string& stage_name);

}  // namespace trim

#endif
