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
#include <ostream>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "mdblock/engine.hpp"
#include "mdblock/relation.hpp"
#include "mdblock/rules.hpp"

namespace mdblock {

/// Unordered pair key: smaller tid in the high half.
inline std::uint64_t pair_key(Tid a, Tid b) {
  const Tid lo = std::min(a, b);
  const Tid hi = std::max(a, b);
  return (static_cast<std::uint64_t>(lo) << 32) | hi;
}

struct GroundTruth {
  std::unordered_set<std::uint64_t> pairs;

  std::size_t size() const { return pairs.size(); }
  /// Throws ValidationError for self pairs or tids outside [0, n).
  void add(Tid a, Tid b, std::size_t n);
};

/// All pairs of tuples sharing an entity id (schema eid column, or the
/// named column when given).
GroundTruth ground_truth_from_eid(const Relation& relation, const std::optional<std::string>& column = std::nullopt);

/// Two-column CSV with a header. Cells are tids, or values of key_column
/// when given (which must then be unique per tuple).
GroundTruth load_ground_truth(const std::string& path, const Relation& relation,
                              const std::optional<std::string>& key_column = std::nullopt);

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double cssr = 0.0;
  std::size_t candidates = 0;
  std::size_t true_positives = 0;
  std::size_t ground_truth = 0;
};

/// Candidates are compared as unordered pairs; cssr = |candidates| / n^2.
MetricsReport compute_metrics(std::span<const CandidatePair> candidates, const GroundTruth& truth,
                              std::size_t universe_size);

void write_candidates_csv(std::ostream& out, std::span<const CandidatePair> pairs,
                          const std::vector<std::string>& rule_ids);

/// Reads back a file written by write_candidates_csv.
std::vector<CandidatePair> read_candidates_csv(std::istream& in, const std::vector<std::string>& rule_ids);

/// Nested loop over all pairs and rules with the generic predicate route.
/// Symmetric mode checks (t_i, t_j) for i < j only.
std::vector<CandidatePair> brute_force_candidates(const Relation& relation, const RuleSet& rs,
                                                  const MeasureRegistry& registry, bool symmetric,
                                                  std::span<const Tid> subset = {});

}  // namespace mdblock
