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
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mdblock/relation.hpp"
#include "mdblock/similarity.hpp"

namespace mdblock {

/// Hashed shingles of a value: tokens for token measures, character
/// 3-grams for edit. Sorted and duplicate-free.
std::vector<std::uint64_t> shingles(std::string_view value, MeasureKind kind, bool fold_case);

/// Key under which equal values collide: canonical number when the text
/// parses as one, otherwise the trimmed, case-folded text.
std::string equality_key(const AttrValue& v);

class MinHasher {
 public:
  MinHasher(std::size_t num_hashes, std::uint64_t seed);

  std::size_t size() const { return seeds_.size(); }
  /// Empty input gives an all-ones signature.
  std::vector<std::uint64_t> signature(std::span<const std::uint64_t> shingles) const;

 private:
  std::vector<std::uint64_t> seeds_;
};

std::uint64_t band_key(std::span<const std::uint64_t> signature, std::size_t band, std::size_t rows);

}  // namespace mdblock
