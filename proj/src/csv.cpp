// Copyright 2026 The FQI Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fqi/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "fqi/error.hpp"

namespace fqi::csv {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? current : trim(current));
      current.clear();
      was_quoted = false;
    } else {
      current += c;
    }
  }
  fields.push_back(was_quoted ? current : trim(current));
  return fields;
}

Table parse(std::istream& in, std::string source, bool has_header) {
  Table table;
  table.source = std::move(source);
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    auto fields = split_line(line);
    if (header_pending) {
      table.header = std::move(fields);
      header_pending = false;
      continue;
    }
    if (has_header && fields.size() != table.header.size()) {
      throw InputError(table.source + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(table.header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (header_pending) throw InputError(table.source + ": missing header row");
  return table;
}

Table read(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  return parse(in, path.string(), has_header);
}

std::size_t Table::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw InputError(source + ": missing column '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

bool Table::has_column(std::string_view name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

const std::string& Table::text(std::size_t row, std::size_t col) const {
  if (col >= rows.at(row).size()) {
    throw InputError(source + ":" + std::to_string(line_numbers.at(row)) + ": missing column " +
                     std::to_string(col + 1));
  }
  return rows[row][col];
}

double Table::number(std::size_t row, std::size_t col) const {
  const std::string& cell = text(row, col);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    throw InputError(source + ":" + std::to_string(line_numbers[row]) + ": column " +
                     std::to_string(col + 1) + ": '" + cell + "' is not a finite number");
  }
  return value;
}

}  // namespace fqi::csv
