#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "cotdr/textio.hpp"

using namespace cotdr;

TEST_SUITE_BEGIN("textio");

TEST_CASE("format_double round-trips and stays short") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-3.0) == "-3");
  CHECK(format_double(0.0) == "0");
  for (double v : {1.0 / 3.0, 6.62607015e-34, 4.0014e-6, 1e300}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("time series CSV round trip") {
  TimeSeries ts;
  ts.t0_s = 0.5;
  ts.dt_s = 0.0005;
  ts.label = "rtt_seconds";
  for (int k = 0; k < 50; ++k) ts.values.push_back(4.0e-6 + 1e-12 * k);

  const std::string path = "test_textio_roundtrip.csv";
  write_timeseries_csv(path, ts);
  const TimeSeries back = read_timeseries_csv(path);
  std::remove(path.c_str());

  REQUIRE(back.values.size() == ts.values.size());
  CHECK(back.label == ts.label);
  CHECK(back.t0_s == doctest::Approx(ts.t0_s).epsilon(1e-12));
  CHECK(back.dt_s == doctest::Approx(ts.dt_s).epsilon(1e-9));
  for (std::size_t k = 0; k < ts.values.size(); ++k) {
    CHECK(back.values[k] == ts.values[k]); // exact: format_double round-trips
  }
}

TEST_CASE("gap rows are skipped on write") {
  TimeSeries ts;
  ts.dt_s = 1.0;
  ts.label = "x";
  ts.push_back(1.0);
  ts.push_back(0.0, false); // gap
  ts.push_back(3.0);

  const std::string path = "test_textio_gaps.csv";
  write_timeseries_csv(path, ts);
  std::ifstream in(path);
  std::string line;
  int rows = 0;
  std::getline(in, line); // header
  while (std::getline(in, line)) ++rows;
  in.close();
  std::remove(path.c_str());
  CHECK(rows == 2);
}

TEST_CASE("bad header is rejected") {
  const std::string path = "test_textio_bad.csv";
  {
    std::ofstream out(path);
    out << "time,val\n1,2\n";
  }
  CHECK_THROWS_AS(read_timeseries_csv(path), std::runtime_error);
  std::remove(path.c_str());
}

TEST_SUITE_END();
