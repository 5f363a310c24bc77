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
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

// Benchmark and acceptance suites shared by the CLI and the acceptance
// runner. Each suite returns a results table plus a pass flag.
namespace mdblock::bench {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  void write_tsv(std::ostream& out) const;
};

struct Outcome {
  std::string suite;
  bool pass = false;
  std::string summary;
  Table table;
  double seconds = 0.0;
};

struct Options {
  std::string data_dir = "data";
  std::uint64_t seed = 0;
  /// Device counts for the scaling suite; the first is the baseline.
  std::vector<std::size_t> device_counts{1, 8};
  /// Also run inter-interval-only stealing in the stealing ablation.
  bool inter_only_stealing = false;
};

struct Suite {
  std::string_view name;
  std::string_view alias;  // short name accepted by find_suite
  std::string_view description;
  Outcome (*run)(const Options&);
};

/// Every suite, in a fixed order.
const std::vector<Suite>& suites();
/// By name or alias.
const Suite* find_suite(std::string_view name);

Outcome oracle_equivalence(const Options& options);
Outcome plan_invariance(const Options& options);
Outcome worked_examples(const Options& options);
Outcome predicate_reuse(const Options& options);
Outcome stealing_ablation(const Options& options);
Outcome ordering_ablation(const Options& options);
Outcome ordering_fidelity(const Options& options);
Outcome device_scaling(const Options& options);
Outcome async_pipeline(const Options& options);
Outcome dblp_acm(const Options& options);
Outcome plan_budget(const Options& options);

/// Normalized discounted cumulative gain of predicted against ideal, both
/// listing item ids best first; relevance of an item is n minus its ideal
/// position.
double ndcg(const std::vector<std::size_t>& predicted, const std::vector<std::size_t>& ideal);

}  // namespace mdblock::bench
