#include "cotdr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace cotdr {

namespace {

// Frame timing comes from the trace epochs; a series needs at least two
// frames to define its sample interval.
struct Timing {
  double t0;
  double dt;
};

Timing infer_timing(std::span<const CorrTrace> frames, const char* who) {
  if (frames.size() < 2) {
    throw std::invalid_argument(std::string(who) +
                                ": need at least two frames to form a series");
  }
  const double t0 = frames.front().epoch_s;
  const double dt = frames[1].epoch_s - t0;
  if (!(dt > 0.0)) {
    throw std::invalid_argument(std::string(who) +
                                ": frame epochs are not increasing");
  }
  return {t0, dt};
}

void check_bin(std::span<const CorrTrace> frames, std::size_t bin,
               const char* who) {
  for (const CorrTrace& f : frames) {
    if (bin >= f.values.size()) {
      throw std::invalid_argument(std::string(who) + ": bin out of range");
    }
  }
}

// Re-acquire a peak near its nominal bin and refine it. Returns false when
// no strict local maximum exists in the search window (peak dropout).
bool refine_near(const CorrTrace& trace, std::size_t nominal,
                 double& delay_out) {
  const std::size_t n = trace.values.size();
  if (n < 3) return false;
  const std::size_t lo = std::max<std::size_t>(nominal > 2 ? nominal - 2 : 1, 1);
  const std::size_t hi = std::min(nominal + 2, n - 2);
  if (lo > hi) return false;

  std::size_t best = lo;
  double best_pow = std::norm(trace.values[lo]);
  for (std::size_t k = lo + 1; k <= hi; ++k) {
    const double p = std::norm(trace.values[k]);
    if (p > best_pow) {
      best = k;
      best_pow = p;
    }
  }
  if (!(best_pow > std::norm(trace.values[best - 1]) &&
        best_pow > std::norm(trace.values[best + 1]))) {
    return false;
  }
  const SubsampleFit fit = subsample_fit(trace, best);
  if (fit.fallback) return false;
  delay_out = fit.refined_delay_s;
  return true;
}

} // namespace

TimeSeries rtt_series(std::span<const CorrTrace> frames, std::size_t input_bin,
                      std::size_t output_bin) {
  const Timing tm = infer_timing(frames, "rtt_series");
  check_bin(frames, input_bin, "rtt_series");
  check_bin(frames, output_bin, "rtt_series");

  TimeSeries out;
  out.t0_s = tm.t0;
  out.dt_s = tm.dt;
  out.label = "rtt_seconds";
  for (const CorrTrace& f : frames) {
    double d_in = 0.0, d_out = 0.0;
    if (refine_near(f, input_bin, d_in) && refine_near(f, output_bin, d_out)) {
      out.push_back(d_out - d_in);
    } else {
      out.push_back(0.0, false);
    }
  }
  return out;
}

TimeSeries amplitude_series(std::span<const CorrTrace> frames,
                            std::size_t bin) {
  const Timing tm = infer_timing(frames, "amplitude_series");
  check_bin(frames, bin, "amplitude_series");

  TimeSeries out;
  out.t0_s = tm.t0;
  out.dt_s = tm.dt;
  out.label = "power";
  for (const CorrTrace& f : frames) out.push_back(std::norm(f.values[bin]));
  return out;
}

TimeSeries phase_series(std::span<const CorrTrace> frames, std::size_t bin_a,
                        std::size_t bin_b) {
  const Timing tm = infer_timing(frames, "phase_series");
  check_bin(frames, bin_a, "phase_series");
  check_bin(frames, bin_b, "phase_series");

  TimeSeries wrapped;
  wrapped.t0_s = tm.t0;
  wrapped.dt_s = tm.dt;
  wrapped.label = "phase_radians";
  for (const CorrTrace& f : frames) {
    if (std::abs(f.values[bin_a]) == 0.0 || std::abs(f.values[bin_b]) == 0.0) {
      wrapped.push_back(0.0, false);
    } else {
      wrapped.push_back(diff_phase(f, bin_a, bin_b));
    }
  }
  return unwrap(wrapped);
}

TimeSeries unwrap(const TimeSeries& wrapped) {
  TimeSeries out = wrapped;
  bool have_prev = false;
  double prev_in = 0.0;  // last valid wrapped sample
  double prev_out = 0.0; // its unwrapped value
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!out.is_valid(k)) continue;
    if (have_prev) {
      out.values[k] = prev_out + wrap_pi(wrapped.values[k] - prev_in);
    }
    prev_in = wrapped.values[k];
    prev_out = out.values[k];
    have_prev = true;
  }
  return out;
}

ToneReport tone_detect(const TimeSeries& series, double f_min, double f_max) {
  const std::size_t n = series.size();
  if (!(f_min > 0.0) || !(f_max > f_min)) {
    throw std::invalid_argument("tone_detect: need 0 < f_min < f_max");
  }
  if (!(series.dt_s > 0.0)) {
    throw std::invalid_argument("tone_detect: series has no sample interval");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!series.is_valid(k)) {
      throw std::invalid_argument("tone_detect: series contains gaps");
    }
  }
  const double duration = static_cast<double>(n) * series.dt_s;
  if (duration < 2.0 / f_min) {
    throw std::invalid_argument(
        "tone_detect: series shorter than two periods of f_min");
  }

  // Least-squares linear detrend removes the slow drift the phase channel
  // always carries before the line search.
  std::vector<double> y(series.values.begin(), series.values.end());
  {
    const double nn = static_cast<double>(n);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double x = static_cast<double>(k);
      sx += x;
      sy += y[k];
      sxx += x * x;
      sxy += x * y[k];
    }
    const double denom = nn * sxx - sx * sx;
    const double slope = denom != 0.0 ? (nn * sxy - sx * sy) / denom : 0.0;
    const double intercept = (sy - slope * sx) / nn;
    for (std::size_t k = 0; k < n; ++k) {
      y[k] -= intercept + slope * static_cast<double>(k);
    }
  }

  // Periodogram bins live on the natural grid m / (n dt), m = 1 .. n/2.
  const std::size_t m_top = n / 2;
  std::size_t m_lo = static_cast<std::size_t>(std::ceil(f_min * duration));
  std::size_t m_hi = static_cast<std::size_t>(std::floor(f_max * duration));
  m_lo = std::max<std::size_t>(m_lo, 1);
  m_hi = std::min(m_hi, m_top);
  if (m_lo > m_hi) {
    throw std::invalid_argument("tone_detect: band contains no periodogram bin");
  }

  // Exact phases via integer arithmetic: exp(-2 pi i (k m mod n) / n).
  const auto dft_bin = [&](std::size_t m) {
    cplx acc{0.0, 0.0};
    std::size_t phase = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double ang =
          -2.0 * M_PI * static_cast<double>(phase) / static_cast<double>(n);
      acc += y[k] * cplx{std::cos(ang), std::sin(ang)};
      phase += m;
      if (phase >= n) phase -= n;
    }
    return acc;
  };

  std::vector<cplx> band(m_hi - m_lo + 1);
  for (std::size_t m = m_lo; m <= m_hi; ++m) band[m - m_lo] = dft_bin(m);

  std::size_t best = 0;
  for (std::size_t j = 1; j < band.size(); ++j) {
    if (std::abs(band[j]) > std::abs(band[best])) best = j;
  }
  const std::size_t m_star = m_lo + best;

  // 3-point parabolic refinement of both the line frequency and its height.
  // Neighbor bins may sit just outside the requested band.
  double freq = static_cast<double>(m_star) / duration;
  double height = std::abs(band[best]);
  if (m_star > 1 && m_star + 1 <= m_top) {
    const double ym = std::abs(best > 0 ? band[best - 1] : dft_bin(m_star - 1));
    const double y0 = height;
    const double yp = std::abs(best + 1 < band.size() ? band[best + 1]
                                                      : dft_bin(m_star + 1));
    const double denom = ym - 2.0 * y0 + yp;
    if (denom < 0.0) {
      double delta = 0.5 * (ym - yp) / denom;
      delta = std::clamp(delta, -0.5, 0.5);
      freq = (static_cast<double>(m_star) + delta) / duration;
      height = y0 - 0.125 * (ym - yp) * (ym - yp) / denom;
    }
  }

  ToneReport report;
  report.frequency_hz = freq;
  const bool nyquist = (n % 2 == 0) && m_star == m_top;
  report.amplitude =
      (nyquist ? 1.0 : 2.0) * height / static_cast<double>(n);

  // Band-passed reconstruction for the peak-to-peak excursion.
  double bp_min = 0.0, bp_max = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double v = 0.0;
    for (std::size_t m = m_lo; m <= m_hi; ++m) {
      const std::size_t phase = (k * m) % n;
      const double ang =
          2.0 * M_PI * static_cast<double>(phase) / static_cast<double>(n);
      const double scale =
          ((n % 2 == 0) && m == m_top) ? 1.0 : 2.0;
      v += scale *
           (band[m - m_lo] * cplx{std::cos(ang), std::sin(ang)}).real() /
           static_cast<double>(n);
    }
    if (k == 0) {
      bp_min = bp_max = v;
    } else {
      bp_min = std::min(bp_min, v);
      bp_max = std::max(bp_max, v);
    }
  }
  report.pp = bp_max - bp_min;
  return report;
}

TimeSeries temp_estimate(const TimeSeries& rtt, double fiber_km,
                         double thermal_coeff_ps_per_k_km) {
  if (!(fiber_km > 0.0)) {
    throw std::invalid_argument("temp_estimate: fiber_km must be positive");
  }
  if (!(thermal_coeff_ps_per_k_km > 0.0)) {
    throw std::invalid_argument("temp_estimate: thermal coefficient must be positive");
  }

  TimeSeries out = rtt;
  out.label = "delta_t_kelvin";
  double ref = 0.0;
  bool have_ref = false;
  const double scale = 2.0 * thermal_coeff_ps_per_k_km * 1e-12 * fiber_km;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!out.is_valid(k)) {
      out.values[k] = 0.0;
      continue;
    }
    if (!have_ref) {
      ref = rtt.values[k];
      have_ref = true;
    }
    out.values[k] = (rtt.values[k] - ref) / scale;
  }
  return out;
}

} // namespace cotdr
