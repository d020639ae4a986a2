// Deterministic text formatting and the CSV schema used for time series.

#pragma once

#include <string>

#include "cotdr/timeseries.hpp"

namespace cotdr {

// Shortest decimal string that round-trips to the same double. Keeps CSV and
// report output stable across runs without printing 17 digits everywhere.
std::string format_double(double v);

// Schema: header "t_seconds,value,label", one row per valid frame.
void write_timeseries_csv(const std::string& path, const TimeSeries& series);
TimeSeries read_timeseries_csv(const std::string& path);

} // namespace cotdr
