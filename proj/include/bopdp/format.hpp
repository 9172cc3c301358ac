/*
 * Copyright 2026 The bopdp Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Text output helpers shared by the CSV/JSON writers.

#ifndef BOPDP_FORMAT_HPP_
#define BOPDP_FORMAT_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace bopdp {

// Shortest round-trippable decimal rendering, '.' separator.
std::string FormatDouble(double v);

// Joins already-formatted cells with commas and terminates with LF.
std::string CsvLine(const std::vector<std::string>& cells);

// Splits one CSV record on commas. Quoted fields are not supported.
std::vector<std::string> SplitCsvLine(std::string_view line);

std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

// Lowercase hex SHA-256 of the given bytes.
std::string Sha256Hex(std::string_view bytes);

}  // namespace bopdp

#endif  // BOPDP_FORMAT_HPP_
