#include "cotdr/textio.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace cotdr {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

void write_timeseries_csv(const std::string& path, const TimeSeries& series) {
  std::ofstream out(path, std::ios::binary); // binary: no CRLF surprises
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "t_seconds,value,label\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (!series.is_valid(k)) continue;
    out << format_double(series.time_at(k)) << ','
        << format_double(series.values[k]) << ',' << series.label << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

TimeSeries read_timeseries_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "t_seconds,value,label") {
    throw std::runtime_error("bad CSV header in " + path);
  }
  TimeSeries series;
  std::vector<double> times;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw std::runtime_error("bad CSV row in " + path + ": " + line);
    }
    times.push_back(std::strtod(line.substr(0, c1).c_str(), nullptr));
    series.values.push_back(
        std::strtod(line.substr(c1 + 1, c2 - c1 - 1).c_str(), nullptr));
    series.label = line.substr(c2 + 1);
  }
  if (!times.empty()) {
    series.t0_s = times.front();
    series.dt_s = times.size() > 1
                      ? (times.back() - times.front()) /
                            static_cast<double>(times.size() - 1)
                      : 0.0;
  }
  return series;
}

} // namespace cotdr
