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

#include "mdblock/minhash.hpp"

#include <algorithm>
#include <limits>

#include "mdblock/text.hpp"

namespace mdblock {

std::vector<std::uint64_t> shingles(std::string_view value, MeasureKind kind, bool fold_case) {
  std::vector<std::uint64_t> out;
  if (kind == MeasureKind::kEdit) {
    const std::string folded = fold_case ? text::fold(value) : std::string(value);
    for (const auto& g : text::char_ngrams(folded, 3)) out.push_back(text::hash64(g));
  } else {
    for (const auto& tok : text::tokenize(value, fold_case)) out.push_back(text::hash64(tok));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string equality_key(const AttrValue& v) {
  if (v.is_number()) return "#" + text::canonical_number(v.number_value());
  const auto trimmed = text::trim(v.str());
  if (const auto num = text::parse_number(trimmed)) return "#" + text::canonical_number(*num);
  return text::fold(trimmed);
}

MinHasher::MinHasher(std::size_t num_hashes, std::uint64_t seed) {
  seeds_.reserve(num_hashes);
  std::uint64_t x = seed;
  for (std::size_t i = 0; i < num_hashes; ++i) {
    x = text::mix64(x + i);
    seeds_.push_back(x);
  }
}

std::vector<std::uint64_t> MinHasher::signature(std::span<const std::uint64_t> shingles) const {
  std::vector<std::uint64_t> sig(seeds_.size(), std::numeric_limits<std::uint64_t>::max());
  for (std::size_t i = 0; i < seeds_.size(); ++i) {
    for (const auto h : shingles) sig[i] = std::min(sig[i], text::mix64(h ^ seeds_[i]));
  }
  return sig;
}

std::uint64_t band_key(std::span<const std::uint64_t> signature, std::size_t band, std::size_t rows) {
  std::uint64_t key = text::mix64(band + 0x51ed2701ULL);
  for (std::size_t r = 0; r < rows; ++r) key = text::mix64(key ^ signature[band * rows + r]);
  return key;
}

}  // namespace mdblock
