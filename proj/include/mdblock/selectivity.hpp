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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdblock/relation.hpp"
#include "mdblock/similarity.hpp"

namespace mdblock {

struct SelectivityProfile {
  std::size_t k = 0;
  std::vector<std::size_t> bucket_counts;
  double raw_evenness = 0.0;
  double sp = 0.0;
  std::optional<std::string> warning;
};

/// sqrt((1/k) * sum (b_i - n/k)^2) with n = sum b_i.
double raw_evenness(std::span<const std::size_t> counts);

/// Raw evenness when all n items fall in one of k buckets.
double max_raw_evenness(std::size_t n, std::size_t k);

/// Throws ConfigError when k < 2 or the relation is empty.
SelectivityProfile estimate_selectivity(const BoundPredicate& p, const Relation& relation,
                                        std::size_t k, std::uint64_t seed);

}  // namespace mdblock
