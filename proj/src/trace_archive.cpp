#include "cotdr/trace_archive.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cotdr {

namespace {

constexpr char kMagic[4] = {'C', 'O', 'T', 'D'};
constexpr std::uint16_t kVersion = 1;

void put_bytes(std::string& out, const void* p, std::size_t n) {
  out.append(static_cast<const char*>(p), n);
}

void put_u16(std::string& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
  put_bytes(out, b, 2);
}

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  put_bytes(out, b, 4);
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  put_bytes(out, b, 8);
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

class ByteReader {
public:
  explicit ByteReader(std::string data) : data_(std::move(data)) {}

  void take(void* dst, std::size_t n) {
    if (pos_ + n > data_.size()) {
      throw std::runtime_error("trace archive: truncated file");
    }
    std::memcpy(dst, data_.data() + pos_, n);
    pos_ += n;
  }

  std::uint16_t u16() {
    unsigned char b[2];
    take(b, 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }

  std::uint32_t u32() {
    unsigned char b[4];
    take(b, 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
  }

  double f64() {
    unsigned char b[8];
    take(b, 8);
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) bits = (bits << 8) | b[i];
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  bool exhausted() const { return pos_ == data_.size(); }

private:
  std::string data_;
  std::size_t pos_ = 0;
};

} // namespace

void write_trace_archive(const std::string& path, const TraceArchive& archive) {
  for (const auto& frame : archive.frames) {
    if (frame.size() != archive.frame_len) {
      throw std::invalid_argument("trace archive: frame length mismatch");
    }
  }

  std::string out;
  const std::size_t per_sample = archive.complex_frames ? 8 : 4;
  out.reserve(23 + archive.frames.size() * archive.frame_len * per_sample);

  put_bytes(out, kMagic, 4);
  put_u16(out, kVersion);
  out.push_back(archive.complex_frames ? 1 : 0);
  put_f64(out, archive.sample_rate_hz);
  put_u32(out, static_cast<std::uint32_t>(archive.frame_len));
  put_u32(out, static_cast<std::uint32_t>(archive.frames.size()));

  for (const auto& frame : archive.frames) {
    for (const cplx& v : frame) {
      put_f32(out, static_cast<float>(v.real()));
      if (archive.complex_frames) put_f32(out, static_cast<float>(v.imag()));
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("trace archive: cannot open " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("trace archive: write failed for " + path);
}

TraceArchive read_trace_archive(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("trace archive: cannot open " + path);
  std::string data((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  ByteReader r(std::move(data));

  char magic[4];
  r.take(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("trace archive: not a COTD file");
  }
  const std::uint16_t version = r.u16();
  if (version != kVersion) {
    throw std::runtime_error("trace archive: unsupported version " +
                             std::to_string(version));
  }
  unsigned char flags;
  r.take(&flags, 1);

  TraceArchive archive;
  archive.complex_frames = (flags & 1) != 0;
  archive.sample_rate_hz = r.f64();
  archive.frame_len = r.u32();
  const std::uint32_t frame_count = r.u32();

  archive.frames.resize(frame_count);
  for (auto& frame : archive.frames) {
    frame.resize(archive.frame_len);
    for (cplx& v : frame) {
      const double re = r.f32();
      const double im = archive.complex_frames ? r.f32() : 0.0;
      v = {re, im};
    }
  }
  if (!r.exhausted()) {
    throw std::runtime_error("trace archive: trailing bytes");
  }
  return archive;
}

} // namespace cotdr
