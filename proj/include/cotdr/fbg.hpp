#pragma once

#include <cstdint>
#include <vector>

#include "cotdr/engine.hpp"

namespace cotdr {

// An array of Bragg gratings written into a short fiber. Each grating acts
// as a reflector whose return loss follows a Gaussian spectral profile
// around its own center wavelength.
struct FbgScenario {
  std::size_t num_gratings = 20;
  double spacing_m = 0.05;
  std::vector<double> center_wavelengths_m; // one per grating
  double fwhm_m = 60e-12;                   // spectral width of each grating
  double sweep_start_m = 0.0;
  double sweep_stop_m = 0.0;
  double sweep_step_m = 0.0;

  // Construction knobs with interrogator-bench defaults.
  double peak_return_loss_db = 40.0;
  double group_index = kSpeedOfLight / 2.0e8;
  double lead_in_m = 0.5;        // fiber before the first grating
  double backscatter_db_per_m = -120.0; // gratings dominate a short array
  std::uint64_t rng_seed = 1;
};

struct FbgSweepResult {
  std::vector<double> wavelengths_m;        // the sweep grid
  std::vector<std::size_t> grating_bins;    // trace bin of each grating
  std::vector<std::vector<double>> spectra; // [grating][wavelength], magnitude
  std::vector<double> fitted_centers_m;     // log-parabola vertex per grating
};

// Sweeps the probe wavelength across the grating spectra. At each sweep
// point the full coherent pipeline runs against a fiber whose reflector
// return losses follow the Gaussian profiles, and each grating's
// correlation magnitude is recorded. Centers come from a least-squares
// parabola on the log-spectrum (a Gaussian line is exactly parabolic
// there). Throws when two gratings land in the same delay bin, naming them.
FbgSweepResult fbg_sweep(const FbgScenario& scenario, const ProbeSpec& probe,
                         const DetectionConfig& detection);

} // namespace cotdr
