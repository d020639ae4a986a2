#include "cotdr/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cotdr {

namespace {

inline cplx cmul(const cplx& a, const cplx& b) {
  return {a.real() * b.real() - a.imag() * b.imag(),
          a.real() * b.imag() + a.imag() * b.real()};
}

std::vector<double> prepared_reference(std::span<const double> reference,
                                       DetectionMode mode) {
  std::vector<double> ref(reference.begin(), reference.end());
  if (mode == DetectionMode::Direct) {
    double mean = 0.0;
    for (double r : ref) mean += r;
    mean /= static_cast<double>(ref.size());
    for (double& r : ref) r -= mean;
  }
  return ref;
}

void check_sizes(std::size_t frame_len, std::size_t ref_len) {
  if (ref_len == 0) throw std::invalid_argument("correlate: empty reference");
  if (ref_len > frame_len) {
    throw std::invalid_argument("correlate: reference longer than frame");
  }
}

} // namespace

double wrap_pi(double a) {
  a = std::remainder(a, 2.0 * M_PI); // lands in [-pi, pi]
  if (a <= -M_PI) a = M_PI;          // convention: half-open (-pi, pi]
  return a;
}

CorrTrace correlate_direct_sum(const RxFrame& frame,
                               std::span<const double> reference) {
  check_sizes(frame.samples.size(), reference.size());
  const std::vector<double> ref = prepared_reference(reference, frame.detection);

  CorrTrace trace;
  trace.sample_period_s = 1.0 / frame.sample_rate_hz;
  trace.epoch_s = frame.epoch_s;
  const std::size_t lags = frame.samples.size() - ref.size() + 1;
  trace.values.resize(lags);
  for (std::size_t k = 0; k < lags; ++k) {
    cplx acc{0.0, 0.0};
    for (std::size_t n = 0; n < ref.size(); ++n) {
      acc += frame.samples[n + k] * ref[n];
    }
    trace.values[k] = acc;
  }
  return trace;
}

MatchedFilter::MatchedFilter(std::span<const double> reference,
                             DetectionMode mode, std::size_t frame_len)
    : ref_len_(reference.size()), frame_len_(frame_len), mode_(mode) {
  check_sizes(frame_len, reference.size());
  const std::vector<double> ref = prepared_reference(reference, mode);
  fft_len_ = next_pow2(frame_len);
  ref_fft_conj_.assign(fft_len_, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < ref.size(); ++i) ref_fft_conj_[i] = ref[i];
  fft_pow2(ref_fft_conj_, false);
  for (auto& v : ref_fft_conj_) v = std::conj(v);
}

CorrTrace MatchedFilter::run(const RxFrame& frame) const {
  if (frame.samples.size() != frame_len_) {
    throw std::invalid_argument("MatchedFilter: unexpected frame length");
  }
  if (frame.detection != mode_) {
    throw std::invalid_argument("MatchedFilter: detection mode mismatch");
  }
  // Circular correlation at fft_len >= frame_len is exact for the linear
  // lags 0 .. frame_len - ref_len: the zero padding keeps the wrap silent.
  std::vector<cplx> work(fft_len_, cplx{0.0, 0.0});
  std::copy(frame.samples.begin(), frame.samples.end(), work.begin());
  fft_pow2(work, false);
  for (std::size_t i = 0; i < fft_len_; ++i) {
    work[i] = cmul(work[i], ref_fft_conj_[i]);
  }
  fft_pow2(work, true);

  CorrTrace trace;
  trace.sample_period_s = 1.0 / frame.sample_rate_hz;
  trace.epoch_s = frame.epoch_s;
  trace.values.assign(work.begin(),
                      work.begin() + static_cast<std::ptrdiff_t>(
                                         frame_len_ - ref_len_ + 1));
  return trace;
}

CorrTrace correlate(const RxFrame& frame, std::span<const double> reference) {
  MatchedFilter filter(reference, frame.detection, frame.samples.size());
  return filter.run(frame);
}

CorrTrace average(std::span<const CorrTrace> traces, AverageMode mode) {
  if (traces.empty()) throw std::invalid_argument("average: no traces");
  const std::size_t n = traces.front().values.size();
  CorrTrace out;
  out.sample_period_s = traces.front().sample_period_s;
  out.epoch_s = traces.front().epoch_s;
  out.num_averaged = 0;
  out.values.assign(n, cplx{0.0, 0.0});

  std::vector<double> power;
  if (mode == AverageMode::Power) power.assign(n, 0.0);

  for (const CorrTrace& t : traces) {
    if (t.values.size() != n) {
      throw std::invalid_argument("average: mismatched trace lengths");
    }
    if (t.sample_period_s != out.sample_period_s) {
      throw std::invalid_argument("average: mismatched sample periods");
    }
    const double w = static_cast<double>(t.num_averaged);
    if (mode == AverageMode::Complex) {
      for (std::size_t k = 0; k < n; ++k) out.values[k] += w * t.values[k];
    } else {
      for (std::size_t k = 0; k < n; ++k) power[k] += w * std::norm(t.values[k]);
    }
    out.num_averaged += t.num_averaged;
  }

  const double scale = 1.0 / static_cast<double>(out.num_averaged);
  if (mode == AverageMode::Complex) {
    for (auto& v : out.values) v *= scale;
  } else {
    // Power-averaged traces are stored as real magnitudes; the phase of a
    // cross-frame power average carries no information.
    for (std::size_t k = 0; k < n; ++k) {
      out.values[k] = cplx{std::sqrt(power[k] * scale), 0.0};
    }
  }
  return out;
}

Fingerprint fingerprint(const CorrTrace& trace, double group_index) {
  if (group_index < 1.4 || group_index > 1.6) {
    throw std::invalid_argument("group_index outside [1.4, 1.6]");
  }
  Fingerprint fp;
  fp.power.resize(trace.values.size());
  fp.distance_m.resize(trace.values.size());
  const double bin_m =
      trace.sample_period_s * kSpeedOfLight / (2.0 * group_index);
  for (std::size_t k = 0; k < trace.values.size(); ++k) {
    fp.power[k] = std::norm(trace.values[k]);
    fp.distance_m[k] = static_cast<double>(k) * bin_m;
  }
  return fp;
}

std::vector<Peak> find_peaks(const CorrTrace& trace, double threshold_db,
                             std::size_t median_window) {
  if (threshold_db <= 0.0) {
    throw std::invalid_argument("find_peaks: threshold must be positive dB");
  }
  if (median_window < 3) median_window = 3;
  const std::size_t n = trace.values.size();
  std::vector<Peak> peaks;
  if (n < 3) return peaks;

  std::vector<double> power(n);
  for (std::size_t k = 0; k < n; ++k) power[k] = std::norm(trace.values[k]);

  const double factor = std::pow(10.0, threshold_db / 10.0);
  const std::size_t half = median_window / 2;
  std::vector<double> window;
  window.reserve(median_window);

  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (!(power[k] > power[k - 1] && power[k] >= power[k + 1])) continue;

    const std::size_t lo = k > half ? k - half : 0;
    const std::size_t hi = std::min(n, k + half + 1);
    window.assign(power.begin() + static_cast<std::ptrdiff_t>(lo),
                  power.begin() + static_cast<std::ptrdiff_t>(hi));
    auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
    std::nth_element(window.begin(), mid, window.end());
    const double floor = *mid;
    if (power[k] < floor * factor) continue;

    Peak p;
    p.bin = k;
    p.magnitude = std::abs(trace.values[k]);
    p.phase_rad = p.magnitude > 0.0 ? wrap_pi(std::arg(trace.values[k])) : 0.0;
    const SubsampleFit fit = subsample_fit(trace, k);
    p.refined_delay_s = fit.refined_delay_s;
    p.fit_fallback = fit.fallback;
    peaks.push_back(p);
  }
  return peaks;
}

SubsampleFit subsample_fit(const CorrTrace& trace, std::size_t bin) {
  const std::size_t n = trace.values.size();
  if (bin >= n) throw std::invalid_argument("subsample_fit: bin out of range");

  SubsampleFit fit;
  fit.refined_delay_s = static_cast<double>(bin) * trace.sample_period_s;
  if (bin == 0 || bin + 1 >= n) {
    fit.fallback = true; // no neighbors on both sides
    return fit;
  }
  const double ym = std::abs(trace.values[bin - 1]);
  const double y0 = std::abs(trace.values[bin]);
  const double yp = std::abs(trace.values[bin + 1]);
  const double denom = ym - 2.0 * y0 + yp;
  if (!(denom < 0.0)) {
    fit.fallback = true; // flat or non-concave: vertex undefined
    return fit;
  }
  double delta = 0.5 * (ym - yp) / denom;
  delta = std::clamp(delta, -1.0, 1.0);
  fit.refined_delay_s =
      (static_cast<double>(bin) + delta) * trace.sample_period_s;
  return fit;
}

double phase_at(const CorrTrace& trace, std::size_t bin) {
  if (bin >= trace.values.size()) {
    throw std::invalid_argument("phase_at: bin out of range");
  }
  if (std::abs(trace.values[bin]) == 0.0) {
    throw std::domain_error("phase_at: undefined phase at zero magnitude");
  }
  return wrap_pi(std::arg(trace.values[bin]));
}

double diff_phase(const CorrTrace& trace, std::size_t bin_a, std::size_t bin_b) {
  if (bin_a >= trace.values.size() || bin_b >= trace.values.size()) {
    throw std::invalid_argument("diff_phase: bin out of range");
  }
  const cplx va = trace.values[bin_a];
  const cplx vb = trace.values[bin_b];
  if (std::abs(va) == 0.0 || std::abs(vb) == 0.0) {
    throw std::domain_error("diff_phase: undefined phase at zero magnitude");
  }
  return wrap_pi(std::arg(vb * std::conj(va)));
}

} // namespace cotdr
