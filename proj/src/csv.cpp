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

#include "comfortsim/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "comfortsim/error.hpp"

namespace comfortsim {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  while (true) {
    auto comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(pos)));
      break;
    }
    cells.push_back(trim(line.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return cells;
}

double parse_number(std::string_view cell, std::size_t row, std::size_t col) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = cell.data() + cell.size();
  if (!cell.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || cell.empty()) {
    throw Error(ErrorCode::kMalformedInput,
                "cannot parse '" + std::string(cell) + "' at data row " +
                    std::to_string(row) + ", column " + std::to_string(col));
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  if (value == 0.0) return "0";  // also folds -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) {
    throw Error(ErrorCode::kIoError, "number formatting failed");
  }
  return std::string(buf, ptr);
}

Channel parse_header_cell(const std::string& cell) {
  auto open = cell.find('[');
  if (open == std::string::npos || cell.back() != ']') {
    return {cell, ""};
  }
  return {std::string(trim(std::string_view(cell).substr(0, open))),
          cell.substr(open + 1, cell.size() - open - 2)};
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  }
  std::string line;
  CsvTable table;
  bool have_header = false;
  std::vector<std::vector<double>> body;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    std::string_view view = trim(line);
    if (!have_header) {
      // Strip a UTF-8 byte order mark.
      if (view.size() >= 3 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
      if (view.empty()) continue;
      for (auto c : split(view)) table.header.emplace_back(c);
      have_header = true;
      continue;
    }
    if (view.empty()) continue;
    auto cells = split(view);
    if (cells.size() != table.header.size()) {
      throw Error(ErrorCode::kMalformedInput,
                  "data row " + std::to_string(row) + " has " +
                      std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(table.header.size()));
    }
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      values[c] = parse_number(cells[c], row, c);
    }
    body.push_back(std::move(values));
    ++row;
  }
  if (!have_header || body.empty()) {
    throw Error(ErrorCode::kEmptyFile, "'" + path.string() + "' has no data rows");
  }
  table.rows.resize(static_cast<Eigen::Index>(body.size()),
                    static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t r = 0; r < body.size(); ++r) {
    for (std::size_t c = 0; c < body[r].size(); ++c) {
      table.rows(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = body[r][c];
    }
  }
  return table;
}

TimeSeries load_timeseries(const std::filesystem::path& path,
                           const std::vector<ChannelSpec>& schema) {
  CsvTable table = read_csv_table(path);
  if (table.header.empty() || table.header.front() != "time_s") {
    throw Error(ErrorCode::kMalformedInput,
                "first column of '" + path.string() + "' must be time_s");
  }
  const Eigen::Index n = table.rows.rows();
  std::vector<Channel> channels;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    channels.push_back(parse_header_cell(table.header[c]));
  }
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < table.rows.cols(); ++c) {
      if (!std::isfinite(table.rows(r, c))) {
        const std::string name =
            c == 0 ? std::string("time_s") : channels[static_cast<std::size_t>(c - 1)].name;
        throw Error(ErrorCode::kNonFiniteSample,
                    "channel '" + name + "' at data row " + std::to_string(r));
      }
    }
  }
  if (n < 2) {
    throw Error(ErrorCode::kNonUniformSampling,
                "cannot infer a time step from a single row in '" + path.string() + "'");
  }
  const auto time = table.rows.col(0);
  double dt = (time(n - 1) - time(0)) / static_cast<double>(n - 1);
  if (!(dt > 0.0)) {
    throw Error(ErrorCode::kNonUniformSampling, "time column is not increasing");
  }
  for (Eigen::Index r = 1; r < n; ++r) {
    const double step = time(r) - time(r - 1);
    if (std::abs(step - dt) > 1e-6 * dt) {
      throw Error(ErrorCode::kNonUniformSampling,
                  "step " + format_double(step) + " s at data row " +
                      std::to_string(r) + " differs from " + format_double(dt) + " s");
    }
  }
  // Snap to an integral sample rate so a written-then-read series keeps the
  // exact dt it was produced with.
  const double rate = 1.0 / dt;
  const double rounded = std::round(rate);
  if (rounded >= 1.0 && std::abs(rate - rounded) <= 1e-9 * rate) dt = 1.0 / rounded;

  Eigen::MatrixXd data = table.rows.rightCols(table.rows.cols() - 1);
  TimeSeries full(time(0), dt, channels, std::move(data));
  if (schema.empty()) return full;

  std::vector<std::string> names;
  for (const auto& spec : schema) {
    auto idx = full.find(spec.name);
    if (!idx) {
      throw Error(ErrorCode::kMissingChannel,
                  "'" + path.string() + "' lacks channel '" + spec.name + "'");
    }
    const auto& have = full.channels()[static_cast<std::size_t>(*idx)];
    if (spec.unit && !spec.unit->empty() && have.unit != *spec.unit) {
      throw Error(ErrorCode::kMissingChannel,
                  "channel '" + spec.name + "' has unit '" + have.unit +
                      "', expected '" + *spec.unit + "'");
    }
    names.push_back(spec.name);
  }
  return full.select(names);
}

void write_timeseries(const std::filesystem::path& path, const TimeSeries& ts) {
  std::ostringstream out;
  out << "time_s";
  for (const auto& ch : ts.channels()) {
    out << ',' << ch.name;
    if (!ch.unit.empty()) out << '[' << ch.unit << ']';
  }
  out << '\n';
  const auto& s = ts.samples();
  for (Eigen::Index r = 0; r < ts.size(); ++r) {
    out << format_double(ts.time_at(r));
    for (Eigen::Index c = 0; c < s.cols(); ++c) out << ',' << format_double(s(r, c));
    out << '\n';
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw Error(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
  }
  const std::string text = out.str();
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!file) {
    throw Error(ErrorCode::kIoError, "write failed for '" + path.string() + "'");
  }
}

}  // namespace comfortsim
