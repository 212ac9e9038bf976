/*
 * Copyright 2026 The cxrlabel Authors.
 *
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

#ifndef CXRLABEL_CSV_H_
#define CXRLABEL_CSV_H_

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace cxrlabel::csv {

using Row = std::vector<std::string>;

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
// newlines. Accepts LF or CRLF line endings. Blank lines are skipped.
std::vector<Row> Parse(std::istream& in);
std::vector<Row> ReadFile(const std::filesystem::path& path);

// Quotes a field only when it needs quoting.
std::string Escape(std::string_view field);
void WriteRow(std::ostream& out, const Row& row);

// Writes a file atomically enough for our purposes: the parent directory is
// created if missing and the file is truncated.
void WriteFile(const std::filesystem::path& path, const std::vector<Row>& rows);

}  // namespace cxrlabel::csv

#endif  // CXRLABEL_CSV_H_
