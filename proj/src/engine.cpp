#include "cotdr/engine.hpp"

#include <cmath>
#include <utility>

#include "cotdr/rng.hpp"

namespace cotdr {

namespace {

std::size_t choose_frame_len(const ProbeSpec& probe, double fs,
                             std::size_t probe_len, std::size_t tap_count) {
  if (probe.frame_period_s > 0.0) {
    return static_cast<std::size_t>(std::llround(probe.frame_period_s * fs));
  }
  return probe_len + tap_count - 1; // minimal frame holding the convolution
}

} // namespace

FrameEngine::FrameEngine(EngineConfig cfg)
    : cfg_(std::move(cfg)),
      fs_(cfg_.probe.sample_rate_hz()),
      reference_(probe_waveform(cfg_.probe)),
      h0_(build_static_response(cfg_.fiber, fs_)),
      frame_len_(choose_frame_len(cfg_.probe, fs_, reference_.size(),
                                  h0_.taps.size())),
      propagator_(reference_, h0_.taps.size(), frame_len_),
      filter_(reference_, cfg_.detection.mode, frame_len_) {}

CorrTrace FrameEngine::run_frame(std::size_t index) {
  const double t = cfg_.frame_rate_hz > 0.0
                       ? static_cast<double>(index) / cfg_.frame_rate_hz
                       : 0.0;

  ImpulseResponse perturbed;
  const ImpulseResponse* h = &h0_;
  if (!cfg_.perturbations.empty()) {
    perturbed = apply_perturbations(h0_, cfg_.fiber, cfg_.perturbations, t,
                                    cfg_.probe.wavelength_m);
    h = &perturbed;
  }
  const std::vector<cplx> field = propagator_.run(*h);

  const int reps = std::max(1, cfg_.detection.num_averages);
  std::vector<CorrTrace> traces;
  traces.reserve(static_cast<std::size_t>(reps));
  for (int sub = 0; sub < reps; ++sub) {
    const std::uint64_t noise_seed =
        mix_seed(cfg_.seed, 0xC07D00F2u, index, static_cast<std::uint64_t>(sub));
    RxFrame rx;
    rx.sample_rate_hz = fs_;
    rx.epoch_s = t;
    rx.detection = cfg_.detection.mode;
    if (cfg_.detection.mode == DetectionMode::Direct) {
      const std::vector<double> current =
          detect_direct(field, cfg_.detection, noise_seed);
      const std::vector<double> quantized = adc(current, cfg_.detection);
      rx.samples.resize(quantized.size());
      for (std::size_t k = 0; k < quantized.size(); ++k) {
        rx.samples[k] = {quantized[k], 0.0};
      }
    } else {
      const std::vector<cplx> mixed =
          detect_coherent(field, fs_, cfg_.detection, noise_seed);
      rx.samples = adc(std::span<const cplx>(mixed), cfg_.detection);
    }
    CorrTrace trace = filter_.run(rx);
    trace.epoch_s = t;
    traces.push_back(std::move(trace));
  }

  if (traces.size() == 1) return std::move(traces.front());
  const AverageMode mode = cfg_.detection.mode == DetectionMode::Direct
                               ? AverageMode::Complex
                               : AverageMode::Power;
  CorrTrace avg = average(traces, mode);
  avg.epoch_s = t;
  return avg;
}

} // namespace cotdr
