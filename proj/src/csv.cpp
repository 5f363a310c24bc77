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

#include "mdblock/csv.hpp"

#include "mdblock/error.hpp"

namespace mdblock {

int CsvReader::get() {
  const int c = in_.get();
  if (c == '\n') ++line_;
  return c;
}

int CsvReader::peek() { return in_.peek(); }

bool CsvReader::next(CsvRecord& record) {
  record.fields.clear();
  // Skip blank lines.
  while (true) {
    const int c = peek();
    if (c == std::char_traits<char>::eof()) return false;
    if (c == '\r') {
      get();
      continue;
    }
    if (c == '\n') {
      get();
      continue;
    }
    break;
  }
  record.line = line_;
  std::string field;
  bool quoted = false;
  bool after_quote = false;
  while (true) {
    const int c = get();
    if (c == std::char_traits<char>::eof()) {
      if (quoted) {
        throw ParseError("line " + std::to_string(record.line) + ": unterminated quoted field");
      }
      record.fields.push_back(std::move(field));
      return true;
    }
    if (quoted) {
      if (c == '"') {
        if (peek() == '"') {
          get();
          field.push_back('"');
        } else {
          quoted = false;
          after_quote = true;
        }
      } else {
        field.push_back(static_cast<char>(c));
      }
      continue;
    }
    if (c == ',') {
      record.fields.push_back(std::move(field));
      field.clear();
      after_quote = false;
    } else if (c == '\n') {
      record.fields.push_back(std::move(field));
      return true;
    } else if (c == '\r') {
      if (peek() == '\n') continue;
      record.fields.push_back(std::move(field));
      return true;
    } else if (c == '"' && field.empty() && !after_quote) {
      quoted = true;
    } else if (after_quote) {
      throw ParseError("line " + std::to_string(line_) + ": unexpected character after closing quote");
    } else {
      field.push_back(static_cast<char>(c));
    }
  }
}

void write_csv_field(std::ostream& out, std::string_view field) {
  bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!field.empty() && (field.front() == ' ' || field.back() == ' ' || field.front() == '\t' ||
                         field.back() == '\t')) {
    needs_quotes = true;
  }
  if (!needs_quotes) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    write_csv_field(out, fields[i]);
  }
  out << '\n';
}

}  // namespace mdblock
