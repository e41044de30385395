// Copyright 2026 The comfortsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COMFORTSIM_CSV_HPP_
#define COMFORTSIM_CSV_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "comfortsim/timeseries.hpp"

namespace comfortsim {

// Expected channel in a CSV file. An empty unit accepts any unit.
struct ChannelSpec {
  std::string name;
  std::optional<std::string> unit;
};

// Raw numeric CSV: header cells plus a row-major body. Cells that fail to
// parse raise kMalformedInput; "nan"/"inf" cells parse to non-finite values
// and are left for the caller to judge.
struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd rows;
};

CsvTable read_csv_table(const std::filesystem::path& path);

// Splits "name[unit]" into its parts. A cell without brackets has an empty
// unit.
Channel parse_header_cell(const std::string& cell);

// Reads a TimeSeries CSV: first column `time_s`, remaining header cells
// `name[unit]`. dt is inferred from the time column and every step must
// match it within a relative tolerance of 1e-6. When `schema` is non-empty
// the returned series holds exactly those channels, in schema order.
TimeSeries load_timeseries(const std::filesystem::path& path,
                           const std::vector<ChannelSpec>& schema = {});

// Writes the TimeSeries CSV format with shortest round-trip number
// formatting and LF line endings, so identical inputs give identical bytes.
void write_timeseries(const std::filesystem::path& path, const TimeSeries& ts);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

}  // namespace comfortsim

#endif  // COMFORTSIM_CSV_HPP_
