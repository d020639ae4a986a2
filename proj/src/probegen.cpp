#include "cotdr/probegen.hpp"

#include <stdexcept>
#include <string>

namespace cotdr {

namespace {

// Maximal-length feedback polynomials (Galois masks), indexed by register
// length. Same table GNU Radio ships for its GLFSR source.
constexpr std::uint64_t kPolyMask[] = {
    0x0,    0x0,    // degrees 0 and 1 unused
    0x3,    // x^2 + x + 1
    0x5,    // x^3 + x + 1
    0x9,    // x^4 + x + 1
    0x12,   // x^5 + x^2 + 1
    0x21,   // x^6 + x + 1
    0x41,   // x^7 + x + 1
    0x8E,   // x^8 + x^4 + x^3 + x^2 + 1
    0x108,  // x^9 + x^4 + 1
    0x204,  // x^10 + x^4 + 1
    0x402,  // x^11 + x^2 + 1
    0x829,  // x^12 + x^6 + x^4 + x + 1
    0x100D, // x^13 + x^4 + x^3 + x + 1
    0x2015, // x^14 + x^5 + x^3 + x + 1
    0x4001, // x^15 + x + 1
    0x8016, // x^16 + x^5 + x^3 + x^2 + 1
};

constexpr int kMinOrder = 2;
constexpr int kMaxOrder = 16;

} // namespace

std::vector<std::uint8_t> gen_prbs(int order,
                                   std::span<const std::uint8_t> seed) {
  if (order < kMinOrder || order > kMaxOrder) {
    throw std::invalid_argument("gen_prbs: order " + std::to_string(order) +
                                " outside supported range 2..16");
  }
  if (seed.size() != static_cast<std::size_t>(order)) {
    throw std::invalid_argument("gen_prbs: seed length must equal order");
  }
  std::uint64_t reg = 0;
  for (int i = 0; i < order; ++i) {
    if (seed[i] > 1) throw std::invalid_argument("gen_prbs: seed bits must be 0 or 1");
    reg |= static_cast<std::uint64_t>(seed[i]) << i;
  }
  if (reg == 0) throw std::invalid_argument("gen_prbs: degenerate LFSR seed");

  const std::uint64_t mask = kPolyMask[order];
  const std::size_t period = (std::size_t{1} << order) - 1;
  std::vector<std::uint8_t> out(period);
  for (std::size_t i = 0; i < period; ++i) {
    const std::uint8_t bit = static_cast<std::uint8_t>(reg & 1);
    out[i] = bit;
    reg >>= 1;
    if (bit) reg ^= mask;
  }
  return out;
}

std::vector<std::uint8_t> gen_prbs(int order) {
  if (order < kMinOrder || order > kMaxOrder) {
    throw std::invalid_argument("gen_prbs: order " + std::to_string(order) +
                                " outside supported range 2..16");
  }
  std::vector<std::uint8_t> seed(order, 1);
  return gen_prbs(order, seed);
}

std::vector<std::uint8_t> extend_prbs(std::span<const std::uint8_t> seq) {
  const std::size_t n = seq.size();
  if (n < 3 || ((n + 1) & n) != 0) {
    throw std::invalid_argument(
        "extend_prbs: input length must be 2^k - 1 for some k >= 2");
  }

  // Longest zero run, read circularly so a run split across the ends still
  // counts once. An m-sequence has a unique longest run (order - 1 zeros).
  std::size_t best_start = 0, best_len = 0;
  std::size_t i = 0;
  while (i < n) {
    if (seq[i] != 0) {
      ++i;
      continue;
    }
    std::size_t len = 0;
    while (len < n && seq[(i + len) % n] == 0) ++len;
    if (len == n) throw std::invalid_argument("extend_prbs: all-zero input");
    if (len > best_len) {
      best_len = len;
      best_start = i;
    }
    i += len; // skip past this run (its tail may wrap; the scan still ends)
  }
  if (best_len == 0) {
    throw std::invalid_argument("extend_prbs: sequence contains no zero run");
  }

  // One past the run. A run that wraps continues at the front, so the zero
  // goes right after its wrapped tail; a run ending at the last index gets
  // the zero appended.
  const std::size_t end = best_start + best_len;
  const std::size_t insert_at = (end > n) ? (end % n) : end;
  std::vector<std::uint8_t> out;
  out.reserve(n + 1);
  out.insert(out.end(), seq.begin(), seq.begin() + insert_at);
  out.push_back(0);
  out.insert(out.end(), seq.begin() + insert_at, seq.end());
  return out;
}

std::vector<double> modulate(std::span<const std::uint8_t> bits,
                             const ProbeSpec& spec) {
  if (bits.empty()) throw std::invalid_argument("modulate: empty bit sequence");
  if (spec.samples_per_bit < 1) {
    throw std::invalid_argument("modulate: samples_per_bit must be >= 1");
  }
  const std::size_t spb = static_cast<std::size_t>(spec.samples_per_bit);
  std::vector<double> wave;
  wave.reserve(bits.size() * spb);
  for (std::uint8_t b : bits) {
    if (b > 1) throw std::invalid_argument("modulate: bits must be 0 or 1");
    double level;
    if (spec.modulation == Modulation::Ook) {
      level = b ? 1.0 : 0.0;
    } else {
      level = b ? 1.0 : -1.0;
    }
    wave.insert(wave.end(), spb, level);
  }
  return wave;
}

std::vector<std::uint8_t> probe_bits(const ProbeSpec& spec) {
  std::vector<std::uint8_t> bits = gen_prbs(spec.prbs_order);
  if (spec.extended) bits = extend_prbs(bits);
  return bits;
}

std::vector<double> probe_waveform(const ProbeSpec& spec) {
  const std::vector<std::uint8_t> bits = probe_bits(spec);
  return modulate(bits, spec);
}

} // namespace cotdr
