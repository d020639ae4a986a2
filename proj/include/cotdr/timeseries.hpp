// Per-frame scalar observables (RTT, amplitude, phase) with frame timing.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cotdr {

struct TimeSeries {
  double t0_s = 0.0;
  double dt_s = 0.0;              // frame period
  std::vector<double> values;
  // Gap markers: 0 marks frames where the observable could not be extracted
  // (e.g. a peak dropout). Values at gap slots are kept finite (0.0) so the
  // "values finite" invariant holds. Empty mask means everything is valid.
  std::vector<std::uint8_t> valid;
  std::string label;

  double time_at(std::size_t k) const { return t0_s + static_cast<double>(k) * dt_s; }
  bool is_valid(std::size_t k) const { return valid.empty() || valid[k] != 0; }
  std::size_t size() const { return values.size(); }

  void push_back(double v, bool ok = true) {
    values.push_back(ok ? v : 0.0);
    if (!valid.empty() || !ok) {
      if (valid.empty()) valid.assign(values.size() - 1, 1);
      valid.push_back(ok ? 1 : 0);
    }
  }
};

} // namespace cotdr
