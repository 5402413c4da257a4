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

#pragma once

// Minimal comma-separated table reader: optional double-quoted fields,
// blank lines and lines starting with '#' skipped.

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace fqi::csv {

struct Table {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  // Index of a header column; throws InputError when missing.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;

  // Cell as a finite double; errors name the source, line and column.
  double number(std::size_t row, std::size_t col) const;
  const std::string& text(std::size_t row, std::size_t col) const;
};

Table parse(std::istream& in, std::string source, bool has_header = true);
Table read(const std::filesystem::path& path, bool has_header = true);

std::vector<std::string> split_line(std::string_view line);

}  // namespace fqi::csv
