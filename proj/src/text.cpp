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

#include "mdblock/text.hpp"

#include <charconv>
#include <cmath>

namespace mdblock::text {
namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_punct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
         (c >= 123 && c <= 126);
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Strips one currency marker at the front of s.
std::string_view strip_currency(std::string_view s) {
  static constexpr std::string_view kSymbols[] = {"$", "\xE2\x82\xAC", "\xC2\xA3", "\xC2\xA5"};
  for (auto sym : kSymbols) {
    if (s.starts_with(sym)) return s.substr(sym.size());
  }
  return s;
}

// "1,299,000.5" -> "1299000.5"; anything else with a comma is rejected.
std::optional<std::string> strip_grouping(std::string_view s) {
  if (s.find(',') == std::string_view::npos) return std::string(s);
  const auto dot = s.find('.');
  const std::string_view int_part = s.substr(0, dot);
  std::size_t group_len = 0;
  bool seen_comma = false;
  std::size_t lead = 0;
  for (char c : int_part) {
    if (c == ',') {
      if (!seen_comma && (lead == 0 || lead > 3)) return std::nullopt;
      if (seen_comma && group_len != 3) return std::nullopt;
      seen_comma = true;
      group_len = 0;
    } else if (is_digit(c)) {
      if (seen_comma) {
        ++group_len;
      } else {
        ++lead;
      }
    } else {
      return std::nullopt;
    }
  }
  if (group_len != 3) return std::nullopt;
  std::string out;
  for (char c : s) {
    if (c != ',') out.push_back(c);
  }
  return out;
}

}  // namespace

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string fold(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  s = trim(strip_currency(s));
  if (s.empty() || !(is_digit(s.front()) || s.front() == '.')) return std::nullopt;
  const auto cleaned = strip_grouping(s);
  if (!cleaned) return std::nullopt;
  double value = 0.0;
  const char* first = cleaned->data();
  const char* last = first + cleaned->size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
  return negative ? -value : value;
}

std::string canonical_number(double v) {
  if (v == 0.0) v = 0.0;  // folds -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::string> tokenize(std::string_view s, bool fold_case) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_space(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else if (is_punct(c)) {
      continue;
    } else if (fold_case && c >= 'A' && c <= 'Z') {
      current.push_back(static_cast<char>(c - 'A' + 'a'));
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> char_ngrams(std::string_view s, std::size_t n) {
  std::vector<std::string> grams;
  if (s.size() < n) {
    grams.emplace_back(s);
    return grams;
  }
  grams.reserve(s.size() - n + 1);
  for (std::size_t i = 0; i + n <= s.size(); ++i) grams.emplace_back(s.substr(i, n));
  return grams;
}

std::uint64_t hash64(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

}  // namespace mdblock::text
