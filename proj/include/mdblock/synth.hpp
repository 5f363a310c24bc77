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
#include <vector>

#include "mdblock/relation.hpp"
#include "mdblock/rules.hpp"

// Seeded generators for tests and benchmarks. Every function is a pure
// function of its arguments.
namespace mdblock::synth {

struct Instance {
  Relation relation;
  RuleSet rules;
};

/// Noisy duplicates of a few hundred entities (name, brand, price, city,
/// desc) with 1..max_rules random rules mixing equality, edit, jaccard,
/// exact_token, constant and cross-attribute predicates. 50..max_tuples
/// tuples, about 5% missing cells.
Instance random_instance(std::uint64_t seed, std::size_t max_tuples = 500, std::size_t max_rules = 5);

/// One text column. Tuples of every interval owned by block 0 (under
/// interval_size / blocks and a window larger than the interval count)
/// among the first heavy_intervals such intervals carry long texts; all
/// other tuples carry two random alphanumerics. Rule: text edit >= 0.8.
Instance skewed_text_instance(std::size_t n, std::size_t interval_size, std::size_t blocks,
                              std::size_t heavy_intervals, std::uint64_t seed);

/// Each rule pairs a cheap, highly selective equality (near-unique code)
/// with an expensive, unselective edit over long near-identical texts.
Instance ordering_instance(std::size_t n, std::size_t rules, std::uint64_t seed);

/// Ten predicates of widely different cost over one relation, one rule each.
Instance cost_universe(std::uint64_t seed, std::size_t n = 400);

/// Blocks keyed by an exact group code of about group_size tuples, each
/// rule starting with equality on the code.
Instance grouped_instance(std::size_t n, std::size_t group_size, std::uint64_t seed);

/// num_rules rules of 2..4 predicates drawn from a pool of num_predicates
/// distinct predicates (all of which are used), over a relation of
/// short-text columns.
Instance wide_ruleset(std::size_t num_rules, std::size_t num_predicates, std::uint64_t seed,
                      std::size_t size = 64);

}  // namespace mdblock::synth
