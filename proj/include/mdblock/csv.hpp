/*
 * Copyright 2026 The mdblock Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace mdblock {

struct CsvRecord {
  std::vector<std::string> fields;
  /// 1-based physical line on which the record starts.
  std::size_t line = 0;
};

/// RFC-4180 reader: comma separated, double-quote quoting with "" escapes,
/// quoted fields may span lines, CRLF or LF terminators. Blank lines are
/// skipped.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  /// Returns false at end of input. Throws ParseError on an unterminated
  /// quote or stray characters after a closing quote.
  bool next(CsvRecord& record);

 private:
  int get();
  int peek();

  std::istream& in_;
  std::size_t line_ = 1;
};

/// Writes one field, quoting it when it contains a comma, quote, CR or LF,
/// or has leading/trailing whitespace.
void write_csv_field(std::ostream& out, std::string_view field);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace mdblock
