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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mdblock::text {

std::string_view trim(std::string_view s);

/// ASCII case folding; bytes >= 0x80 pass through untouched.
std::string fold(std::string_view s);

/// Parses a decimal after trimming whitespace and stripping one leading
/// currency symbol ($, EUR/GBP/YEN signs in UTF-8) and thousands separators.
/// Returns nullopt for anything that is not a finite number.
std::optional<double> parse_number(std::string_view s);

/// Shortest round-trippable rendering; equal doubles render identically.
std::string canonical_number(double v);

/// Case-folds (optionally), drops ASCII punctuation, splits on whitespace.
std::vector<std::string> tokenize(std::string_view s, bool fold_case = true);

/// Character 3-grams of s; strings shorter than 3 yield themselves.
std::vector<std::string> char_ngrams(std::string_view s, std::size_t n = 3);

std::uint64_t hash64(std::string_view s, std::uint64_t seed = 0);

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace mdblock::text
