#include "cotdr/fibermodel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cotdr/rng.hpp"

namespace cotdr {

namespace {

double field_attenuation(const FiberSpec& spec, double z_m) {
  // Two-way power attenuation 10^(-2*alpha*z/10); one-way amplitude factor
  // per pass, squared over the round trip, is its square root.
  return std::pow(10.0, -spec.attenuation_db_per_km * (z_m / 1000.0) / 10.0);
}

void check_spec(const FiberSpec& spec) {
  if (spec.length_m <= 0.0) {
    throw std::invalid_argument("fiber length must be positive");
  }
  if (spec.group_index < 1.4 || spec.group_index > 1.6) {
    throw std::invalid_argument("group_index outside [1.4, 1.6]");
  }
  if (spec.backscatter_db_per_m >= 0.0) {
    throw std::invalid_argument("backscatter_coeff must be negative (dB/m)");
  }
  for (const Reflector& r : spec.reflectors) {
    if (r.return_loss_db <= 0.0) {
      throw std::invalid_argument("reflector return_loss must be positive");
    }
    if (r.position_m <= 0.0 || r.position_m >= spec.length_m) {
      throw std::invalid_argument("reflector position not strictly inside fiber");
    }
  }
}

void check_perturbation(const Perturbation& p, const FiberSpec& spec) {
  if (p.extent_m <= 0.0) {
    throw std::invalid_argument("perturbation extent must be positive");
  }
  const double lo = p.center_m - p.extent_m / 2.0;
  const double hi = p.center_m + p.extent_m / 2.0;
  if (lo < 0.0 || hi > spec.length_m) {
    throw std::invalid_argument("perturbed section extends outside the fiber");
  }
}

// Temperature offset of a perturbation at frame time t.
double delta_t_at(const Perturbation& p, double t_s) {
  switch (p.kind) {
    case Perturbation::Kind::TemperatureStep:
      return t_s >= p.step_time_s ? p.delta_t_kelvin : 0.0;
    case Perturbation::Kind::TemperatureSeries: {
      const TimeSeries& ts = p.temperature;
      if (ts.values.empty()) return 0.0;
      if (ts.dt_s <= 0.0) return ts.values.front();
      const double idx = std::floor((t_s - ts.t0_s) / ts.dt_s);
      const auto k = static_cast<std::ptrdiff_t>(idx);
      if (k < 0) return ts.values.front();
      if (k >= static_cast<std::ptrdiff_t>(ts.values.size())) return ts.values.back();
      return ts.values[static_cast<std::size_t>(k)];
    }
    case Perturbation::Kind::AcousticTone:
      return 0.0;
  }
  return 0.0;
}

// Lanczos-windowed sinc, support |x| < a. Exact 1 at x=0 and 0 at other
// integers, so taps that stay on the grid are moved without leakage.
double lanczos(double x, double a) {
  if (x == 0.0) return 1.0;
  if (std::abs(x) >= a) return 0.0;
  const double px = M_PI * x;
  return a * std::sin(px) * std::sin(px / a) / (px * px);
}

} // namespace

double round_trip_delay(const FiberSpec& spec, double position_m) {
  if (position_m < 0.0 || position_m > spec.length_m) {
    throw std::invalid_argument("position outside [0, length]");
  }
  return 2.0 * spec.group_index * position_m / kSpeedOfLight;
}

double thermal_delay_shift(const FiberSpec& spec, double section_km,
                           double delta_t_kelvin) {
  if (section_km < 0.0) {
    throw std::invalid_argument("section length must be non-negative");
  }
  return spec.thermal_coeff_ps_per_k_km * 1e-12 * section_km * delta_t_kelvin;
}

ImpulseResponse build_static_response(const FiberSpec& spec,
                                      double sample_rate_hz) {
  check_spec(spec);
  if (sample_rate_hz <= 0.0) {
    throw std::invalid_argument("sample_rate must be positive");
  }

  ImpulseResponse h;
  h.sample_period_s = 1.0 / sample_rate_hz;
  const double rtt_total = round_trip_delay(spec, spec.length_m);
  const auto n_bins = static_cast<std::size_t>(
      std::max(1.0, std::ceil(rtt_total / h.sample_period_s)));
  h.taps.assign(n_bins, cplx{0.0, 0.0});

  // Meters of fiber covered by one delay bin.
  const double bin_width_m =
      h.sample_period_s * kSpeedOfLight / (2.0 * spec.group_index);
  const double power_per_m = std::pow(10.0, spec.backscatter_db_per_m / 10.0);

  const auto bin_of = [&](double z_m) {
    const double tau = 2.0 * spec.group_index * z_m / kSpeedOfLight;
    auto k = static_cast<std::ptrdiff_t>(std::llround(tau / h.sample_period_s));
    k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(n_bins) - 1);
    return static_cast<std::size_t>(k);
  };

  Rng rng(mix_seed(spec.rng_seed, 0x5C47734C47700000ULL));
  if (spec.scatterer_spacing_m > 0.0) {
    // Poisson-like placement: exponential gaps with the configured mean.
    const double sigma = std::sqrt(power_per_m * spec.scatterer_spacing_m / 2.0);
    double z = spec.scatterer_spacing_m * -std::log(1.0 - rng.uniform());
    while (z < spec.length_m) {
      const double amp = rng.rayleigh(sigma) * field_attenuation(spec, z);
      const double phase = 2.0 * M_PI * rng.uniform();
      h.taps[bin_of(z)] += std::polar(amp, phase);
      z += spec.scatterer_spacing_m * -std::log(1.0 - rng.uniform());
    }
  } else {
    // One scatterer per delay bin, at the bin center.
    const double sigma = std::sqrt(power_per_m * bin_width_m / 2.0);
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double z = static_cast<double>(k) * bin_width_m;
      const double amp = rng.rayleigh(sigma) * field_attenuation(spec, z);
      const double phase = 2.0 * M_PI * rng.uniform();
      h.taps[k] += std::polar(amp, phase);
    }
  }

  for (const Reflector& r : spec.reflectors) {
    const double amp = std::pow(10.0, -r.return_loss_db / 20.0) *
                       field_attenuation(spec, r.position_m);
    h.taps[bin_of(r.position_m)] += cplx{amp, 0.0};
  }

  // Flag reflector pairs the sample period cannot separate.
  std::vector<double> delays;
  delays.reserve(spec.reflectors.size());
  for (const Reflector& r : spec.reflectors) {
    delays.push_back(round_trip_delay(spec, r.position_m));
  }
  std::sort(delays.begin(), delays.end());
  for (std::size_t i = 1; i < delays.size(); ++i) {
    if (delays[i] - delays[i - 1] < h.sample_period_s) h.merged_reflectors = true;
  }
  return h;
}

ImpulseResponse apply_perturbations(const ImpulseResponse& base,
                                    const FiberSpec& spec,
                                    const std::vector<Perturbation>& perturbations,
                                    double t_s, double wavelength_m) {
  if (t_s < 0.0) throw std::invalid_argument("frame time must be non-negative");
  if (wavelength_m <= 0.0) throw std::invalid_argument("wavelength must be positive");

  ImpulseResponse out = base;
  out.epoch_s = t_s;
  if (perturbations.empty()) return out;

  const std::size_t n = base.taps.size();
  const double bin_width_m =
      base.sample_period_s * kSpeedOfLight / (2.0 * spec.group_index);

  // Accumulate per-bin extra phase and round-trip delay shift from all
  // perturbations, then re-place taps in one pass.
  std::vector<double> phase(n, 0.0), dtau(n, 0.0);
  double min_affected_z = spec.length_m;
  for (const Perturbation& p : perturbations) {
    check_perturbation(p, spec);
    const double sec_start = p.center_m - p.extent_m / 2.0;
    min_affected_z = std::min(min_affected_z, sec_start);

    double delta_n = 0.0;
    double dtau_full = 0.0; // round-trip delay shift past the section
    if (p.kind == Perturbation::Kind::AcousticTone) {
      delta_n = p.index_amplitude * std::sin(2.0 * M_PI * p.frequency_hz * t_s);
    } else {
      const double dT = delta_t_at(p, t_s);
      delta_n = kDnDt * dT;
      dtau_full = 2.0 * spec.thermal_coeff_ps_per_k_km * 1e-12 *
                  (p.extent_m / 1000.0) * dT;
    }
    const double phi_one_way = 2.0 * M_PI * delta_n * p.extent_m / wavelength_m;
    if (phi_one_way == 0.0 && dtau_full == 0.0) continue;

    for (std::size_t k = 0; k < n; ++k) {
      const double z = static_cast<double>(k) * bin_width_m;
      if (z < sec_start) continue;
      // Share of the perturbed section behind this tap: the round trip
      // crosses that stretch twice.
      const double share = std::min(1.0, (z - sec_start) / p.extent_m);
      phase[k] += 2.0 * phi_one_way * share;
      dtau[k] += dtau_full * share;
    }
  }

  // Taps strictly before every perturbed section must stay bit-identical,
  // including shift spill-over from later taps.
  std::size_t first_writable = 0;
  while (first_writable < n &&
         static_cast<double>(first_writable) * bin_width_m < min_affected_z) {
    ++first_writable;
  }

  // First settle every bin's in-place value, then scatter the delay-shifted
  // taps; doing it in two passes keeps interpolation spill from being
  // overwritten regardless of shift direction.
  for (std::size_t k = first_writable; k < n; ++k) {
    if (dtau[k] != 0.0) {
      out.taps[k] = cplx{0.0, 0.0};
    } else if (phase[k] != 0.0) {
      out.taps[k] = base.taps[k] * std::polar(1.0, phase[k]);
    }
  }

  constexpr double kLanczosA = 4.0;
  for (std::size_t k = first_writable; k < n; ++k) {
    if (dtau[k] == 0.0) continue;
    const cplx shifted = base.taps[k] * std::polar(1.0, phase[k]);
    const double target = static_cast<double>(k) + dtau[k] / base.sample_period_s;
    const double nearest = std::round(target);
    if (std::abs(target - nearest) < 1e-9) {
      // Exact grid move: no interpolation leakage.
      const auto j = static_cast<std::ptrdiff_t>(nearest);
      if (j >= static_cast<std::ptrdiff_t>(first_writable) &&
          j < static_cast<std::ptrdiff_t>(n)) {
        out.taps[static_cast<std::size_t>(j)] += shifted;
      }
      continue;
    }
    const auto lo = static_cast<std::ptrdiff_t>(std::ceil(target - kLanczosA));
    const auto hi = static_cast<std::ptrdiff_t>(std::floor(target + kLanczosA));
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      if (j < static_cast<std::ptrdiff_t>(first_writable) ||
          j >= static_cast<std::ptrdiff_t>(n)) {
        continue;
      }
      out.taps[static_cast<std::size_t>(j)] +=
          shifted * lanczos(target - static_cast<double>(j), kLanczosA);
    }
  }
  return out;
}

TimeSeries thermal_lag(const TimeSeries& air_temp, double tau_s) {
  if (tau_s <= 0.0) throw std::invalid_argument("tau must be positive");
  if (air_temp.dt_s <= 0.0) {
    throw std::invalid_argument("air temperature series must be uniformly sampled");
  }
  if (air_temp.dt_s >= tau_s) {
    throw std::invalid_argument("unstable discretization: dt >= tau");
  }
  TimeSeries out;
  out.t0_s = air_temp.t0_s;
  out.dt_s = air_temp.dt_s;
  out.label = "fiber_temperature";
  out.values.resize(air_temp.values.size());
  if (out.values.empty()) return out;

  const double gamma = air_temp.dt_s / tau_s;
  out.values[0] = air_temp.values[0];
  for (std::size_t k = 0; k + 1 < out.values.size(); ++k) {
    out.values[k + 1] =
        out.values[k] + gamma * (air_temp.values[k] - out.values[k]);
  }
  return out;
}

} // namespace cotdr
