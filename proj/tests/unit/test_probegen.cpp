#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "cotdr/probegen.hpp"

using namespace cotdr;

namespace {

// Longest zero run in circular reading: returns {start, length}.
std::pair<std::size_t, std::size_t> longest_zero_run(
    const std::vector<std::uint8_t>& s) {
  const std::size_t n = s.size();
  std::size_t best_start = 0, best_len = 0;
  for (std::size_t start = 0; start < n; ++start) {
    if (s[start] != 0) continue;
    if (s[(start + n - 1) % n] == 0) continue; // not the head of a run
    std::size_t len = 0;
    while (len < n && s[(start + len) % n] == 0) ++len;
    if (len > best_len) {
      best_len = len;
      best_start = start;
    }
  }
  return {best_start, best_len};
}

} // namespace

TEST_SUITE_BEGIN("probegen");

TEST_CASE("order 7 yields one 127-bit period") {
  const auto seq = gen_prbs(7);
  CHECK(seq.size() == 127);
}

TEST_CASE("order 2 worked by hand") {
  // Galois register, mask 0b11, seed bits [1,0] -> reg=01.
  // Steps: reg 01 -> emit 1, reg (0)^11 = 11
  //        reg 11 -> emit 1, reg (01)^11 = 10
  //        reg 10 -> emit 0, reg 01 (back to start)
  const std::vector<std::uint8_t> seed = {1, 0};
  const auto seq = gen_prbs(2, seed);
  CHECK(seq == std::vector<std::uint8_t>({1, 1, 0}));

  // Maximality: all cyclic shifts of the period differ.
  for (std::size_t shift = 1; shift < seq.size(); ++shift) {
    bool same = true;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (seq[i] != seq[(i + shift) % seq.size()]) same = false;
    }
    CHECK_FALSE(same);
  }
}

TEST_CASE("degenerate and invalid inputs are rejected") {
  const std::vector<std::uint8_t> zeros(7, 0);
  CHECK_THROWS_WITH_AS(gen_prbs(7, zeros) /* absorbing state */,
                       "gen_prbs: degenerate LFSR seed", std::invalid_argument);
  CHECK_THROWS_AS(gen_prbs(1), std::invalid_argument);
  CHECK_THROWS_AS(gen_prbs(17), std::invalid_argument);
  const std::vector<std::uint8_t> short_seed = {1, 0, 1};
  CHECK_THROWS_AS(gen_prbs(7, short_seed), std::invalid_argument);
}

TEST_CASE("balance holds for every supported order up to 10") {
  for (int order = 2; order <= 10; ++order) {
    const auto seq = gen_prbs(order);
    const std::size_t ones =
        static_cast<std::size_t>(std::count(seq.begin(), seq.end(), 1));
    const std::size_t half = std::size_t{1} << (order - 1);
    CHECK(ones == half);
    CHECK(seq.size() - ones == half - 1);
  }
}

TEST_CASE("bipolar circular autocorrelation is two-level") {
  // Direct integer sum; the defining property of a maximal-length sequence.
  for (int order = 3; order <= 10; ++order) {
    const auto seq = gen_prbs(order);
    const std::size_t n = seq.size();
    std::vector<int> bip(n);
    for (std::size_t i = 0; i < n; ++i) bip[i] = seq[i] ? 1 : -1;
    for (std::size_t lag : {std::size_t{0}, std::size_t{1}, n / 3, n - 1}) {
      long acc = 0;
      for (std::size_t i = 0; i < n; ++i) acc += bip[i] * bip[(i + lag) % n];
      if (lag == 0) {
        CHECK(acc == static_cast<long>(n));
      } else {
        CHECK(acc == -1);
      }
    }
  }
}

TEST_CASE("same order and seed reproduce the same sequence") {
  const std::vector<std::uint8_t> seed = {1, 0, 1, 1, 0, 0, 1};
  CHECK(gen_prbs(7, seed) == gen_prbs(7, seed));
}

TEST_CASE("extend_prbs grows 127 bits to 128 without touching ones") {
  const auto seq = gen_prbs(7);
  const auto ext = extend_prbs(seq);
  CHECK(ext.size() == 128);
  CHECK(std::count(ext.begin(), ext.end(), 1) ==
        std::count(seq.begin(), seq.end(), 1));
  // Now perfectly balanced.
  CHECK(std::count(ext.begin(), ext.end(), 0) == 64);
}

TEST_CASE("the zero lands right after the longest zero run") {
  for (int order : {5, 7, 8, 12}) {
    const auto seq = gen_prbs(order);
    const auto [start, len] = longest_zero_run(seq);
    CHECK(len == static_cast<std::size_t>(order - 1));

    const auto ext = extend_prbs(seq);
    const auto [estart, elen] = longest_zero_run(ext);
    CHECK(elen == static_cast<std::size_t>(order));
    // The extended run covers the original run's start position.
    bool covers = false;
    for (std::size_t k = 0; k < elen; ++k) {
      if ((estart + k) % ext.size() == start ||
          (estart + k) % ext.size() == (start + 1) % ext.size()) {
        covers = true;
      }
    }
    CHECK(covers);
  }
}

TEST_CASE("extend_prbs validates its input") {
  const std::vector<std::uint8_t> not_pow2(100, 1);
  CHECK_THROWS_AS(extend_prbs(not_pow2), std::invalid_argument);
}

TEST_CASE("modulation maps and replicates") {
  ProbeSpec spec;
  spec.samples_per_bit = 1;
  spec.modulation = Modulation::Bpsk;
  const std::vector<std::uint8_t> bits = {1, 0, 1};
  CHECK(modulate(bits, spec) == std::vector<double>({1.0, -1.0, 1.0}));

  spec.modulation = Modulation::Ook;
  spec.samples_per_bit = 5;
  const std::vector<std::uint8_t> one = {1};
  CHECK(modulate(one, spec) == std::vector<double>(5, 1.0));

  const std::vector<std::uint8_t> empty;
  CHECK_THROWS_AS(modulate(empty, spec), std::invalid_argument);
}

TEST_CASE("127-bit probe at 5 samples per bit spans 635 samples") {
  ProbeSpec spec;
  spec.prbs_order = 7;
  spec.extended = false;
  spec.bit_rate_hz = 10e9;
  spec.samples_per_bit = 5;
  CHECK(probe_waveform(spec).size() == 635);
  CHECK(spec.sample_rate_hz() == doctest::Approx(50e9));
}

TEST_SUITE_END();
