#include "trim/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "trim/io.hpp"
#include "trim/reversal.hpp"

namespace trim {

namespace fs = std::filesystem;

const VariantImages& PipelineResult::images(RtmVariant v) const {
  for (const VariantImages& vi : variants)
    if (vi.variant == v) return vi;
  throw std::invalid_argument("pipeline did not compute this imaging variant");
}

std::vector<PipelineJob> enumerate_jobs(const SceneSpec& scene) {
  std::vector<PipelineJob> jobs;
  std::vector<Point> distinct;
  for (int s = 0; s < static_cast<int>(scene.sras.size()); ++s) {
    const std::vector<Point> sources = scene.sources_for_sra(s);
    for (int k = 0; k < static_cast<int>(sources.size()); ++k) {
      PipelineJob job;
      job.index = static_cast<int>(jobs.size());
      job.sra = s;
      job.source_ordinal = k;
      job.source = sources[k];
      job.label = "sra" + std::to_string(s) + "_src" + std::to_string(k);
      int found = -1;
      for (int d = 0; d < static_cast<int>(distinct.size()); ++d) {
        if (std::abs(distinct[d].x - job.source.x) < 1e-12 &&
            std::abs(distinct[d].y - job.source.y) < 1e-12)
          found = d;
      }
      if (found < 0) {
        found = static_cast<int>(distinct.size());
        distinct.push_back(job.source);
      }
      job.distinct_source = found;
      jobs.push_back(job);
    }
  }
  if (jobs.empty()) throw std::invalid_argument("scene yields no (sra, source) jobs");
  return jobs;
}

void restore_grid_geometry(FieldMovie& movie, const SceneSpec& scene) {
  movie.origin = {scene.domain.x0, scene.domain.y0};
  const double y_top = scene.has_solid() ? scene.interface_y : scene.domain.y1;
  movie.dx = scene.domain.width() / (movie.nx - 1);
  movie.dy = (y_top - scene.domain.y0) / (movie.ny - 1);
}

void parallel_for(int count, int threads, const std::function<void(int)>& body,
                  std::vector<std::string>& failures, const std::string& stage_name) {
  threads = std::max(1, std::min(threads, count));
  std::atomic<int> next{0};
  std::mutex failure_mutex;
  auto worker = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failures.push_back(stage_name + " " + std::to_string(i) + ": " + e.what());
      }
    }
  };
  if (threads == 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
}

namespace {

struct SourceData {
  ForwardOutput total;
  ForwardOutput incident;
};

std::string trace_path(const RunConfig& cfg, const char* kind, const PipelineJob& job) {
  return cfg.out_dir + "/traces_" + kind + "_" + job.label + ".csv";
}

std::string incident_movie_path(const RunConfig& cfg, int distinct_source) {
  return cfg.out_dir + "/movie_incident_src" + std::to_string(distinct_source) + ".trim";
}

std::string reversed_movie_path(const RunConfig& cfg, const PipelineJob& job) {
  return cfg.out_dir + "/movie_reversed_" + job.label + ".trim";
}

std::string image_base(const RunConfig& cfg, RtmVariant v, const std::string& tag) {
  return cfg.out_dir + "/image_" + rtm_variant_name(v) + "_" + tag;
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& config, unsigned stages) {
  RunConfig cfg = config;  // finalized copy
  cfg.finalize();
  const bool writing = !cfg.out_dir.empty();
  if (writing) fs::create_directories(cfg.out_dir);

  PipelineResult result;
  result.jobs = enumerate_jobs(cfg.scene);
  result.n_sras = static_cast<int>(cfg.scene.sras.size());
  result.h_forward = cfg.resolved_h_forward();
  result.h_reverse = cfg.resolved_h_reverse();

  const int grid_nx = cfg.resolved_grid_nx();
  const int grid_ny = cfg.resolved_grid_ny();
  const int threads = cfg.resolved_threads();

  int n_distinct = 0;
  for (const PipelineJob& job : result.jobs)
    n_distinct = std::max(n_distinct, job.distinct_source + 1);
  std::vector<Point> distinct_sources(n_distinct);
  for (const PipelineJob& job : result.jobs) distinct_sources[job.distinct_source] = job.source;

  ForwardConfig fwd;
  fwd.cfl = cfg.cfl;
  fwd.degree = cfg.degree;
  fwd.movie_stride = cfg.movie_stride;
  fwd.stepper.tol = cfg.solver_tol;

  std::vector<SourceData> per_source(n_distinct);
  std::vector<TraceRecord> noisy_per_job(result.jobs.size());
  std::vector<FieldMovie> reversed_per_job(result.jobs.size());

  // ---- forward stage: total + incident per distinct source --------------
  if (stages & stage_forward) {
    const Mesh mesh = generate_mesh(cfg.scene, result.h_forward);
    const DofMap dofs = build_dofmap(mesh, cfg.degree);
    // 2 tasks per source: even -> total, odd -> incident
    parallel_for(
        2 * n_distinct, threads,
        [&](int task) {
          const int d = task / 2;
          if (task % 2 == 0)
            per_source[d].total = run_total(cfg.scene, mesh, dofs, distinct_sources[d], fwd);
          else
            per_source[d].incident =
                run_incident(cfg.scene, mesh, dofs, distinct_sources[d], fwd, grid_nx, grid_ny);
        },
        result.failures, "forward");
    if (!result.failures.empty()) return result;
    result.dt_forward = per_source[0].total.dt;
    result.steps_forward = per_source[0].total.n_steps;

    for (const PipelineJob& job : result.jobs) {
      const SourceData& src = per_source[job.distinct_source];
      const TraceRecord& total = src.total.traces.at(job.sra);
      const TraceRecord& incident = src.incident.traces.at(job.sra);
      TraceRecord scat = scattered(total, incident);
      TraceRecord noisy;
      if (cfg.noise_on_total) {
        TraceRecord noisy_total = add_noise(total, cfg.noise_coeff, cfg.job_seed(job.index));
        noisy_total.kind = TraceRecord::Kind::total;
        noisy = scattered(noisy_total, incident);
        noisy.kind = TraceRecord::Kind::scattered_noisy;
      } else {
        noisy = add_noise(scat, cfg.noise_coeff, cfg.job_seed(job.index));
      }
      if (writing) {
        io::write_traces(trace_path(cfg, "total", job), total);
        io::write_traces(trace_path(cfg, "incident", job), incident);
        io::write_traces(trace_path(cfg, "scattered", job), scat);
        io::write_traces(trace_path(cfg, "scattered_noisy", job), noisy);
      }
      noisy_per_job[job.index] = std::move(noisy);
    }
    if (writing) {
      for (int d = 0; d < n_distinct; ++d)
        io::write_movie(incident_movie_path(cfg, d), per_source[d].incident.movie);
    }
  }

  // ---- reverse stage -----------------------------------------------------
  if (stages & stage_reverse) {
    ReversalConfig rev;
    rev.cfl = cfg.cfl;
    rev.degree = cfg.degree;
    rev.stepper.tol = cfg.solver_tol;
    parallel_for(
        static_cast<int>(result.jobs.size()), threads,
        [&](int j) {
          const PipelineJob& job = result.jobs[j];
          TraceRecord noisy;
          if (!(stages & stage_forward))
            noisy = io::read_traces(trace_path(cfg, "scattered_noisy", job));
          else
            noisy = noisy_per_job[j];
          const TRProblem problem =
              build_tr_problem(cfg.scene, result.h_reverse, noisy, job.sra, rev);
          FieldMovie movie = run_reversed(problem, grid_nx, grid_ny, cfg.movie_stride);
          if (writing) io::write_movie(reversed_movie_path(cfg, job), movie);
          reversed_per_job[j] = std::move(movie);
        },
        result.failures, "reverse");
    if (!result.failures.empty()) return result;
  }

  // ---- imaging stage -----------------------------------------------------
  if (stages & stage_image) {
    for (RtmVariant variant : cfg.variants) {
      VariantImages vi;
      vi.variant = variant;
      vi.per_job.resize(result.jobs.size());
      parallel_for(
          static_cast<int>(result.jobs.size()), threads,
          [&](int j) {
            const PipelineJob& job = result.jobs[j];
            FieldMovie reversed;
            const FieldMovie* reversed_ptr = &reversed_per_job[j];
            if (reversed_per_job[j].empty()) {
              reversed = io::read_movie(reversed_movie_path(cfg, job));
              restore_grid_geometry(reversed, cfg.scene);
              reversed_ptr = &reversed;
            }
            FieldMovie incident;
            const FieldMovie* incident_ptr = &per_source[job.distinct_source].incident.movie;
            if (incident_ptr->empty()) {
              incident = io::read_movie(incident_movie_path(cfg, job.distinct_source));
              restore_grid_geometry(incident, cfg.scene);
              incident_ptr = &incident;
            }
            const ImageField raw = rtm(*reversed_ptr, *incident_ptr, variant);
            ImageField pct = rtm_percentage(raw, *incident_ptr);
            pct.provenance.push_back(job.label);
            vi.per_job[j] = std::move(pct);
          },
          result.failures, std::string("image_") + rtm_variant_name(variant));
      if (!result.failures.empty()) return result;

      for (int s = 0; s < result.n_sras; ++s) {
        std::vector<ImageField> parts;
        for (const PipelineJob& job : result.jobs)
          if (job.sra == s) parts.push_back(vi.per_job[job.index]);
        vi.per_sra.push_back(rtm_sum(parts));
      }
      if (result.n_sras > 1) vi.aggregate = aggregate_probes(vi.per_sra);

      if (writing) {
        for (const PipelineJob& job : result.jobs) {
          const std::string base = image_base(cfg, variant, job.label);
          io::write_image_csv(base + ".csv", vi.per_job[job.index]);
          io::write_image_pgm(base + ".pgm", base + ".pgm.txt", vi.per_job[job.index]);
        }
        for (int s = 0; s < result.n_sras; ++s) {
          const std::string base = image_base(cfg, variant, "sum_sra" + std::to_string(s));
          io::write_image_csv(base + ".csv", vi.per_sra[s]);
          io::write_image_pgm(base + ".pgm", base + ".pgm.txt", vi.per_sra[s]);
        }
        const ImageField& final_image = vi.aggregate ? *vi.aggregate : vi.per_sra[0];
        const std::string base = image_base(cfg, variant, vi.aggregate ? "aggregate" : "final");
        io::write_image_csv(base + ".csv", final_image);
        io::write_image_pgm(base + ".pgm", base + ".pgm.txt", final_image);
        const PeakReport peaks = find_peaks(final_image, 0.3);
        std::ofstream ps(cfg.out_dir + "/peaks_" + rtm_variant_name(variant) + ".txt");
        ps << "# threshold=" << io::format_double(peaks.threshold) << '\n';
        for (const Peak& p : peaks.peaks)
          ps << "peak x=" << io::format_double(p.location.x)
             << " y=" << io::format_double(p.location.y)
             << " value=" << io::format_double(p.value)
             << " prominence=" << io::format_double(p.prominence) << '\n';
      }
      result.variants.push_back(std::move(vi));
    }
  }

  // ---- manifest ----------------------------------------------------------
  if (writing) {
    std::ofstream mf(cfg.out_dir + "/manifest.txt");
    mf << "# trim-manifest version=1\n";
    mf << "scene=" << (cfg.scene_path.empty() ? "<inline>" : cfg.scene_path) << '\n';
    mf << "wavelength=" << io::format_double(cfg.wavelength()) << '\n';
    mf << "h_forward=" << io::format_double(result.h_forward)
       << " h_reverse=" << io::format_double(result.h_reverse) << '\n';
    mf << "cfl=" << io::format_double(cfg.cfl) << " degree=" << cfg.degree
       << " solver_tol=" << io::format_double(cfg.solver_tol) << '\n';
    mf << "noise_coeff=" << io::format_double(cfg.noise_coeff) << " seed=" << cfg.seed
       << " noise_on_total=" << (cfg.noise_on_total ? 1 : 0) << '\n';
    mf << "movie_stride=" << cfg.movie_stride << " grid=" << grid_nx << 'x' << grid_ny << '\n';
    if (result.steps_forward > 0)
      mf << "dt_forward=" << io::format_double(result.dt_forward)
         << " steps_forward=" << result.steps_forward << '\n';
    for (const PipelineJob& job : result.jobs) {
      mf << "job index=" << job.index << " sra=" << job.sra << " src=" << job.source_ordinal
         << " source=(" << io::format_double(job.source.x) << '|'
         << io::format_double(job.source.y) << ") noise_seed=" << cfg.job_seed(job.index)
         << '\n';
      if (stages & stage_forward) {
        for (const char* kind : {"total", "incident", "scattered", "scattered_noisy"})
          mf << "file " << fs::path(trace_path(cfg, kind, job)).filename().string()
             << " stage=forward job=" << job.index << " kind=" << kind << '\n';
      }
      if (stages & stage_reverse)
        mf << "file " << fs::path(reversed_movie_path(cfg, job)).filename().string()
           << " stage=reverse job=" << job.index << '\n';
    }
    if (stages & stage_forward) {
      for (int d = 0; d < n_distinct; ++d)
        mf << "file " << fs::path(incident_movie_path(cfg, d)).filename().string()
           << " stage=forward source=" << d << '\n';
    }
    if (stages & stage_image) {
      for (const VariantImages& vi : result.variants) {
        for (const PipelineJob& job : result.jobs)
          mf << "file " << fs::path(image_base(cfg, vi.variant, job.label)).filename().string()
             << ".csv stage=image job=" << job.index << " variant=" << rtm_variant_name(vi.variant)
             << '\n';
        for (int s = 0; s < result.n_sras; ++s)
          mf << "file "
             << fs::path(image_base(cfg, vi.variant, "sum_sra" + std::to_string(s)))
                    .filename()
                    .string()
             << ".csv stage=image sra=" << s << " variant=" << rtm_variant_name(vi.variant)
             << '\n';
      }
    }
    for (const std::string& f : result.failures) mf << "status failed " << f << '\n';
    if (result.failures.empty()) mf << "status ok\n";
  }
  return result;
}

}  // namespace trim
