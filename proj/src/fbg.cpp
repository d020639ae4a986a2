#include "cotdr/fbg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cotdr/rng.hpp"

namespace cotdr {

namespace {

// 10 log10(2): return-loss increase at half the FWHM from the line center.
constexpr double kHalfDb = 3.0102999566398120;

// Gaussian line shape expressed in return-loss decibels. Far wings are
// capped so reflectivities merely underflow instead of producing inf.
double grating_return_loss_db(const FbgScenario& sc, double center_m,
                              double wavelength_m) {
  const double detune = 2.0 * (wavelength_m - center_m) / sc.fwhm_m;
  const double rl = sc.peak_return_loss_db + kHalfDb * detune * detune;
  return std::min(rl, sc.peak_return_loss_db + 120.0);
}

void validate(const FbgScenario& sc) {
  if (sc.num_gratings == 0) {
    throw std::invalid_argument("fbg_sweep: need at least one grating");
  }
  if (!(sc.spacing_m > 0.0)) {
    throw std::invalid_argument("fbg_sweep: spacing must be positive");
  }
  if (sc.center_wavelengths_m.size() != sc.num_gratings) {
    throw std::invalid_argument(
        "fbg_sweep: center_wavelengths size must equal num_gratings");
  }
  if (!(sc.fwhm_m > 0.0)) {
    throw std::invalid_argument("fbg_sweep: fwhm must be positive");
  }
  if (!(sc.sweep_step_m > 0.0)) {
    throw std::invalid_argument("fbg_sweep: sweep step must be positive");
  }
  if (!(sc.sweep_stop_m > sc.sweep_start_m)) {
    throw std::invalid_argument("fbg_sweep: sweep stop must exceed start");
  }
  if (!(sc.lead_in_m > 0.0)) {
    throw std::invalid_argument("fbg_sweep: lead-in must be positive");
  }
}

// Least-squares parabola vertex on the log-spectrum, using the points
// within 20 dB (power) of the strongest sample. x is taken in picometers
// around the strongest sample to keep the normal equations conditioned.
double fit_center(const std::vector<double>& wavelengths,
                  const std::vector<double>& mags, std::size_t grating) {
  const std::size_t peak =
      static_cast<std::size_t>(std::max_element(mags.begin(), mags.end()) -
                               mags.begin());
  const double floor = mags[peak] * 0.1;

  double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, sy = 0, sxy = 0, sxxy = 0;
  for (std::size_t j = 0; j < mags.size(); ++j) {
    if (!(mags[j] >= floor) || !(mags[j] > 0.0)) continue;
    const double x = (wavelengths[j] - wavelengths[peak]) / 1e-12;
    const double y = std::log(mags[j]);
    const double xx = x * x;
    s0 += 1.0;
    s1 += x;
    s2 += xx;
    s3 += xx * x;
    s4 += xx * xx;
    sy += y;
    sxy += x * y;
    sxxy += xx * y;
  }
  if (s0 < 3.0) {
    throw std::runtime_error("fbg_sweep: too few sweep points on grating " +
                             std::to_string(grating));
  }

  // Solve [s4 s3 s2; s3 s2 s1; s2 s1 s0] [a b c]' = [sxxy sxy sy]'.
  const double det = s4 * (s2 * s0 - s1 * s1) - s3 * (s3 * s0 - s1 * s2) +
                     s2 * (s3 * s1 - s2 * s2);
  if (det == 0.0) {
    throw std::runtime_error("fbg_sweep: degenerate spectrum fit on grating " +
                             std::to_string(grating));
  }
  const double a = (sxxy * (s2 * s0 - s1 * s1) - s3 * (sxy * s0 - sy * s1) +
                    s2 * (sxy * s1 - sy * s2)) /
                   det;
  const double b = (s4 * (sxy * s0 - sy * s1) - sxxy * (s3 * s0 - s1 * s2) +
                    s2 * (s3 * sy - s2 * sxy)) /
                   det;
  if (!(a < 0.0)) {
    throw std::runtime_error("fbg_sweep: no spectral peak on grating " +
                             std::to_string(grating));
  }
  return wavelengths[peak] + (-b / (2.0 * a)) * 1e-12;
}

} // namespace

FbgSweepResult fbg_sweep(const FbgScenario& scenario, const ProbeSpec& probe,
                         const DetectionConfig& detection) {
  validate(scenario);
  if (detection.mode != DetectionMode::Coherent) {
    throw std::invalid_argument(
        "fbg_sweep: grating interrogation requires coherent detection");
  }

  FiberSpec fiber;
  fiber.length_m = 2.0 * scenario.lead_in_m +
                   static_cast<double>(scenario.num_gratings - 1) *
                       scenario.spacing_m;
  fiber.group_index = scenario.group_index;
  fiber.backscatter_db_per_m = scenario.backscatter_db_per_m;
  fiber.rng_seed = scenario.rng_seed;
  fiber.reflectors.resize(scenario.num_gratings);
  for (std::size_t i = 0; i < scenario.num_gratings; ++i) {
    fiber.reflectors[i].position_m =
        scenario.lead_in_m + static_cast<double>(i) * scenario.spacing_m;
  }

  // Delay-bin occupancy decides whether the probe resolves the array.
  const double fs = probe.sample_rate_hz();
  FbgSweepResult result;
  result.grating_bins.resize(scenario.num_gratings);
  for (std::size_t i = 0; i < scenario.num_gratings; ++i) {
    const double tau = round_trip_delay(fiber, fiber.reflectors[i].position_m);
    result.grating_bins[i] = static_cast<std::size_t>(std::llround(tau * fs));
  }
  std::string merged;
  for (std::size_t i = 1; i < scenario.num_gratings; ++i) {
    if (result.grating_bins[i] == result.grating_bins[i - 1]) {
      if (!merged.empty()) merged += ", ";
      merged += std::to_string(i - 1) + "+" + std::to_string(i);
    }
  }
  if (!merged.empty()) {
    throw std::runtime_error("fbg_sweep: unresolved gratings (shared delay bin): " +
                             merged);
  }

  const auto n_steps = static_cast<std::size_t>(
      std::floor((scenario.sweep_stop_m - scenario.sweep_start_m) /
                     scenario.sweep_step_m +
                 1e-9));
  for (std::size_t j = 0; j <= n_steps; ++j) {
    result.wavelengths_m.push_back(scenario.sweep_start_m +
                                   static_cast<double>(j) *
                                       scenario.sweep_step_m);
  }

  result.spectra.assign(scenario.num_gratings,
                        std::vector<double>(result.wavelengths_m.size(), 0.0));

  for (std::size_t j = 0; j < result.wavelengths_m.size(); ++j) {
    const double wl = result.wavelengths_m[j];
    EngineConfig cfg;
    cfg.probe = probe;
    cfg.probe.wavelength_m = wl;
    cfg.fiber = fiber;
    for (std::size_t i = 0; i < scenario.num_gratings; ++i) {
      cfg.fiber.reflectors[i].return_loss_db =
          grating_return_loss_db(scenario, scenario.center_wavelengths_m[i], wl);
    }
    cfg.detection = detection;
    cfg.seed = mix_seed(scenario.rng_seed, 0xFB6A11ACu, j);

    FrameEngine engine(std::move(cfg));
    const CorrTrace trace = engine.run_frame(0);
    for (std::size_t i = 0; i < scenario.num_gratings; ++i) {
      result.spectra[i][j] = std::abs(trace.values[result.grating_bins[i]]);
    }
  }

  result.fitted_centers_m.resize(scenario.num_gratings);
  for (std::size_t i = 0; i < scenario.num_gratings; ++i) {
    result.fitted_centers_m[i] =
        fit_center(result.wavelengths_m, result.spectra[i], i);
  }
  return result;
}

} // namespace cotdr
