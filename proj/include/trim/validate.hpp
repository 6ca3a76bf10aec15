#ifndef TRIM_VALIDATE_HPP
#define TRIM_VALIDATE_HPP

#include <string>
#include <vector>

#include "trim/assembly.hpp"
#include "trim/scene.hpp"

namespace trim {

/// Quasi-1D normal-incidence reflection at a fluid/tissue interface measured
/// against the impedance formula R = (Zs - Zf) / (Zs + Zf).
struct ReflectionExperiment {
  double elements_per_wavelength = 10.0;
  double fluid_depth_wavelengths = 10.0;
  double solid_depth_wavelengths = 6.0;
  double source_height_wavelengths = 5.0;   // above the interface
  double probe_height_wavelengths = 2.5;
  double cfl = 0.15;
  double solver_tol = 1e-11;

  struct Result {
    double measured = 0.0;
    double oracle = 0.0;
    double incident_amplitude = 0.0;
    double reflected_amplitude = 0.0;
  };
  Result run() const;
};

/// Closed-domain march, state-pair time reversal, march back; reports the
/// relative L2 distance to the initial data.
struct ReversibilityExperiment {
  int n_steps = 500;
  int cells = 30;
  double cfl = 0.15;
  int degree = 2;
  double solver_tol = 1e-12;

  struct Result {
    double relative_error = 0.0;
  };
  Result run() const;
};

/// Discrete energy behavior: conservation drift in a closed domain and
/// per-step monotonicity with the absorbing forms active.
struct EnergyExperiment {
  int conservation_steps = 1000;
  int decay_steps = 400;
  int cells = 40;
  double cfl = 0.3;
  int degree = 1;
  double solver_tol = 1e-13;

  struct Result {
    double max_drift = 0.0;            // closed domain, relative to E(0)
    double worst_growth = 0.0;         // max over steps of E(n+1)/E(n) - 1
    double decay_fraction = 0.0;       // E(final)/E(source extinction)
    bool monotone = false;             // growth bounded by 1e-10
  };
  Result run() const;
};

/// Interface coupling structure: exact antisymmetry of the assembled blocks
/// against an independently assembled solid-row form, and the transmission
/// channels of a horizontal interface.
struct CouplingExperiment {
  int cells = 8;
  int degree = 2;

  struct Result {
    double antisymmetry_max = 0.0;     // max |C^T_indep - C^T|
    bool u1_columns_zero = false;
    bool u2_columns_cover_interface = false;
    double cform_interface_length_error = 0.0;
    int channels = 0;                  // independent nonzero transmission channels
  };
  Result run() const;
};

/// Acoustic plane-pulse convergence under simultaneous (h, dt) halving.
struct ConvergenceExperiment {
  int levels = 3;
  int base_cells_y = 24;
  double cfl = 0.15;
  int degree = 2;
  double t_end = 0.2;
  double solver_tol = 1e-12;

  struct Result {
    std::vector<double> errors;
    std::vector<double> orders;
    double min_order = 0.0;
  };
  Result run() const;
};

/// Runs the fast invariant suite, printing one pass/fail line per check.
/// Returns the number of failures.
int run_validation_suite(bool verbose = true);

}  // namespace trim

#endif
