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

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mdblock/relation.hpp"
#include "mdblock/rules.hpp"
#include "mdblock/similarity.hpp"

namespace mdblock::testing {

inline std::string data_path(std::string_view name) { return std::string(MDBLOCK_DATA_DIR) + "/" + std::string(name); }

// The five-product table and its three rules.
inline const Relation& products() {
  static const Relation rel = [] {
    LoadOptions opts;
    opts.eid_attr = "eid";
    return load_relation(data_path("products.csv"), opts);
  }();
  return rel;
}

inline const RuleSet& product_rules() {
  static const RuleSet rs = load_ruleset(data_path("products_rules.json"), MeasureRegistry::defaults());
  return rs;
}

inline Predicate eq(std::string attr) {
  Predicate p;
  p.lhs_attr = attr;
  p.rhs_attr = std::move(attr);
  return p;
}

inline Predicate sim(std::string attr, std::string measure, double threshold) {
  Predicate p;
  p.lhs_attr = attr;
  p.rhs_attr = std::move(attr);
  p.op = Comparator::kSim;
  p.measure = std::move(measure);
  p.threshold = threshold;
  return p;
}

inline std::size_t position(const std::vector<Predicate>& universe, const Predicate& p) {
  return static_cast<std::size_t>(std::find(universe.begin(), universe.end(), p) - universe.begin());
}

// Plain dynamic-programming edit distance, kept apart from the library's.
inline std::size_t reference_levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
    }
  }
  return d[a.size()][b.size()];
}

}  // namespace mdblock::testing
