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

#include "mdblock/cost_model.hpp"
#include "mdblock/relation.hpp"
#include "mdblock/rules.hpp"
#include "mdblock/selectivity.hpp"
#include "mdblock/similarity.hpp"

namespace mdblock {

struct OrderingEntry {
  std::size_t predicate = 0;  // index into the predicate universe
  double cost = 0.0;
  double sp = 0.0;
  double cost_effectiveness = 0.0;
};

struct PredicateOrdering {
  std::vector<OrderingEntry> entries;
  /// rank[p] = position of universe predicate p in entries.
  std::vector<std::size_t> rank;
};

/// Sorts by (1 - sp) / cost descending, then cost ascending, then universe
/// position. Costs must be positive.
PredicateOrdering order_predicates(std::span<const double> costs, std::span<const double> sps);

/// Wraps an arbitrary permutation of universe indices as an ordering.
PredicateOrdering ordering_from_sequence(std::span<const std::size_t> sequence,
                                         std::span<const double> costs, std::span<const double> sps);

struct TreeNode {
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  std::size_t parent = kNone;
  std::size_t predicate = kNone;  // predicate on the edge from parent
  std::vector<std::size_t> children;  // insertion order
  std::optional<std::size_t> rule;    // set on leaves
  double score = 0.0;                 // score of the edge from parent
  std::vector<std::size_t> cover;     // rules whose path uses that edge
};

struct ExecutionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::vector<Predicate> universe;
  std::vector<std::string> rule_ids;
  std::vector<std::size_t> leaf_of_rule;
  std::vector<double> wp;

  std::size_t leaf_count() const;
  /// Node ids from the root's child down to the rule's leaf.
  std::vector<std::size_t> path_of(std::size_t rule) const;
};

/// Rules are inserted in order, each with its predicates sorted by rank;
/// a prefix shared with an earlier rule reuses that rule's inner nodes and
/// every rule gets a leaf of its own.
ExecutionTree build_tree(const RuleSet& rs, std::span<const Predicate> universe,
                         const PredicateOrdering& ordering);

/// wp(rule) = product of its predicates' sp; edge score = max wp over cover.
ExecutionTree score_tree(ExecutionTree tree, std::span<const double> sps);
/// Same, with per-rule witness probabilities supplied directly.
ExecutionTree score_tree_with_wp(ExecutionTree tree, std::span<const double> wp);

/// Children of a node in visit order: descending score, ties by insertion.
std::vector<std::size_t> visit_order(const ExecutionTree& tree, std::size_t node);

enum class OpCode : std::uint8_t { kEval, kCheckpoint };

struct Instruction {
  OpCode op = OpCode::kEval;
  std::size_t slot = 0;       // kEval
  std::size_t fail_jump = 0;  // kEval: next instruction when the predicate fails
  std::size_t rule = 0;       // kCheckpoint: index into the rule set
};

struct ExecutionPath {
  std::vector<Instruction> code;
  /// One slot per distinct predicate; slot i evaluates universe[slot_predicate[i]].
  std::vector<BoundPredicate> slots;
  std::vector<std::size_t> slot_predicate;
  std::vector<std::string> rule_ids;

  std::size_t checkpoint_count() const;
  /// Rule indices in checkpoint order.
  std::vector<std::size_t> rule_order() const;
  bool has_asymmetric_slot() const;
};

ExecutionPath compile_path(const ExecutionTree& tree, const Schema& schema,
                           const MeasureRegistry& registry);

/// Path over the subtree below one root child. Shares the slot table of the
/// full path so one evaluator serves every branch.
ExecutionPath compile_branch(const ExecutionTree& tree, const ExecutionPath& full,
                             std::size_t root_child);

enum class OrderMode { kEpg, kRandom, kReversed };

std::string_view to_string(OrderMode mode);
std::optional<OrderMode> parse_order_mode(std::string_view name);

struct PlanOptions {
  std::size_t timing_samples = 500;  // per predicate
  CostModelOptions model;
  std::size_t cost_pairs = 10000;
  std::size_t buckets = 32;
  std::uint64_t seed = 42;
  OrderMode order = OrderMode::kEpg;
  /// Per-rule witness probabilities replacing the sp product.
  std::optional<std::vector<double>> wp_override;
};

struct Plan {
  std::vector<Predicate> universe;
  std::vector<double> costs;
  std::vector<SelectivityProfile> selectivity;
  PredicateOrdering ordering;
  ExecutionTree tree;
  ExecutionPath path;
  std::vector<std::string> warnings;
  double model_mse = 0.0;
  double sampling_seconds = 0.0;
  double training_seconds = 0.0;
  /// Cost inference plus selectivity.
  double estimation_seconds = 0.0;
  /// order + build + score + compile.
  double generation_seconds = 0.0;
};

/// The timed part of plan generation, from per-predicate cost and sp.
Plan plan_from_estimates(const RuleSet& rs, const Schema& schema, const MeasureRegistry& registry,
                         std::vector<double> costs, std::vector<double> sps,
                         OrderMode order = OrderMode::kEpg, std::uint64_t seed = 0,
                         std::optional<std::vector<double>> wp_override = std::nullopt);

/// Full pipeline: timing samples, cost model, selectivity, then ordering,
/// tree, scores and path.
Plan make_plan(const Relation& relation, const RuleSet& rs, const MeasureRegistry& registry,
               const PlanOptions& options = {});

/// Fraction of the listed pairs at which each rule is a witness.
std::vector<double> wp_from_pairs(const RuleSet& rs, const Relation& relation,
                                  const MeasureRegistry& registry,
                                  std::span<const std::pair<Tid, Tid>> pairs);

std::string plan_to_json(const Plan& plan);
std::string explain_text(const Plan& plan);

}  // namespace mdblock
