#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "cotdr/trace_archive.hpp"

using namespace cotdr;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const char* name) : path(std::string("/tmp/") + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

} // namespace

TEST_SUITE_BEGIN("trace_archive");

TEST_CASE("complex archive round-trips at float32 precision") {
  TraceArchive a;
  a.complex_frames = true;
  a.sample_rate_hz = 5e10;
  a.frame_len = 3;
  a.frames = {{{1.0, -2.0}, {0.125, 0.25}, {1e-7, 3.0}},
              {{-0.5, 0.0}, {7.25, -1.5}, {0.0, 0.0}}};

  TempFile tmp("cotd_roundtrip.bin");
  write_trace_archive(tmp.path, a);
  const TraceArchive b = read_trace_archive(tmp.path);

  CHECK(b.complex_frames);
  CHECK(b.sample_rate_hz == 5e10);
  CHECK(b.frame_len == 3);
  REQUIRE(b.frames.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(b.frames[i][k].real() ==
            TraceArchive::quantize(a.frames[i][k].real()));
      CHECK(b.frames[i][k].imag() ==
            TraceArchive::quantize(a.frames[i][k].imag()));
    }
  }
}

TEST_CASE("real archive stores one float per sample") {
  TraceArchive a;
  a.complex_frames = false;
  a.sample_rate_hz = 1.6e9;
  a.frame_len = 4;
  a.frames = {{{1.0, 0.0}, {2.0, 0.0}, {-3.0, 0.0}, {0.5, 0.0}}};

  TempFile tmp("cotd_real.bin");
  write_trace_archive(tmp.path, a);
  const std::string bytes = slurp(tmp.path);
  CHECK(bytes.size() == 23 + 4 * 4); // header + 4 float32

  const TraceArchive b = read_trace_archive(tmp.path);
  CHECK_FALSE(b.complex_frames);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(b.frames[0][k].real() == a.frames[0][k].real());
    CHECK(b.frames[0][k].imag() == 0.0);
  }
}

TEST_CASE("header bytes are pinned") {
  TraceArchive a;
  a.complex_frames = true;
  a.sample_rate_hz = 1.0; // f64 0x3FF0000000000000
  a.frame_len = 2;
  a.frames = {{{0.0, 0.0}, {0.0, 0.0}}};

  TempFile tmp("cotd_header.bin");
  write_trace_archive(tmp.path, a);
  const std::string bytes = slurp(tmp.path);
  REQUIRE(bytes.size() >= 23);

  const unsigned char expected[23] = {
      'C', 'O', 'T', 'D',                      // magic
      0x01, 0x00,                              // version 1, little-endian
      0x01,                                    // flags: complex
      0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xF0, 0x3F, // 1.0 as f64
      0x02, 0x00, 0x00, 0x00,                  // frame_len
      0x01, 0x00, 0x00, 0x00,                  // frame_count
  };
  for (std::size_t k = 0; k < 23; ++k) {
    CHECK(static_cast<unsigned char>(bytes[k]) == expected[k]);
  }
}

TEST_CASE("reader rejects malformed files") {
  TempFile tmp("cotd_bad.bin");

  {
    std::ofstream f(tmp.path, std::ios::binary);
    f << "NOPE";
  }
  CHECK_THROWS_WITH_AS(read_trace_archive(tmp.path),
                       "trace archive: not a COTD file", std::runtime_error);

  {
    std::ofstream f(tmp.path, std::ios::binary);
    f.write("COTD\x01\x00", 6); // header stops after the version field
  }
  CHECK_THROWS_WITH_AS(read_trace_archive(tmp.path),
                       "trace archive: truncated file", std::runtime_error);

  // Valid archive, then chop the payload short.
  TraceArchive a;
  a.complex_frames = false;
  a.sample_rate_hz = 1.0;
  a.frame_len = 8;
  a.frames = {std::vector<cplx>(8, cplx{1.0, 0.0})};
  write_trace_archive(tmp.path, a);
  const std::string full = slurp(tmp.path);
  {
    std::ofstream f(tmp.path, std::ios::binary);
    f.write(full.data(), static_cast<std::streamsize>(full.size() - 5));
  }
  CHECK_THROWS_WITH_AS(read_trace_archive(tmp.path),
                       "trace archive: truncated file", std::runtime_error);

  CHECK_THROWS_AS(read_trace_archive("/tmp/does_not_exist_cotd.bin"),
                  std::runtime_error);
}

TEST_CASE("writer validates frame shapes") {
  TraceArchive a;
  a.frame_len = 3;
  a.frames = {std::vector<cplx>(2, cplx{0.0, 0.0})};
  CHECK_THROWS_AS(write_trace_archive("/tmp/cotd_shape.bin", a),
                  std::invalid_argument);
}

TEST_SUITE_END();
