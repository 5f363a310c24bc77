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

#include "mdblock/plan.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "mdblock/error.hpp"
#include "mdblock/evaluator.hpp"

namespace mdblock {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t universe_index(std::span<const Predicate> universe, const Predicate& p) {
  for (std::size_t i = 0; i < universe.size(); ++i) {
    if (universe[i] == p) return i;
  }
  throw ConfigError("predicate " + to_string(p) + " is missing from the predicate universe");
}

}  // namespace

PredicateOrdering ordering_from_sequence(std::span<const std::size_t> sequence,
                                         std::span<const double> costs, std::span<const double> sps) {
  if (costs.size() != sps.size() || sequence.size() != costs.size()) {
    throw ConfigError("ordering needs one cost and one sp per predicate");
  }
  PredicateOrdering ord;
  ord.rank.assign(costs.size(), TreeNode::kNone);
  for (std::size_t pos = 0; pos < sequence.size(); ++pos) {
    const std::size_t i = sequence[pos];
    if (i >= costs.size() || ord.rank[i] != TreeNode::kNone) throw ConfigError("ordering is not a permutation");
    ord.rank[i] = pos;
    ord.entries.push_back({i, costs[i], sps[i], (1.0 - sps[i]) / costs[i]});
  }
  return ord;
}

PredicateOrdering order_predicates(std::span<const double> costs, std::span<const double> sps) {
  if (costs.size() != sps.size()) throw ConfigError("ordering needs one cost and one sp per predicate");
  for (double c : costs) {
    if (!(c > 0.0)) throw ConfigError("predicate costs must be positive");
  }
  std::vector<std::size_t> seq(costs.size());
  std::iota(seq.begin(), seq.end(), 0);
  auto ce = [&](std::size_t i) { return (1.0 - sps[i]) / costs[i]; };
  std::stable_sort(seq.begin(), seq.end(), [&](std::size_t a, std::size_t b) {
    const double ca = ce(a);
    const double cb = ce(b);
    if (ca != cb) return ca > cb;
    return costs[a] < costs[b];
  });
  return ordering_from_sequence(seq, costs, sps);
}

std::size_t ExecutionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.rule.has_value(); }));
}

std::vector<std::size_t> ExecutionTree::path_of(std::size_t rule) const {
  std::vector<std::size_t> out;
  for (std::size_t n = leaf_of_rule.at(rule); n != 0; n = nodes[n].parent) out.push_back(n);
  std::reverse(out.begin(), out.end());
  return out;
}

ExecutionTree build_tree(const RuleSet& rs, std::span<const Predicate> universe,
                         const PredicateOrdering& ordering) {
  if (ordering.rank.size() != universe.size()) throw ConfigError("ordering does not cover the universe");
  ExecutionTree tree;
  tree.universe.assign(universe.begin(), universe.end());
  tree.nodes.emplace_back();
  for (std::size_t r = 0; r < rs.rules.size(); ++r) {
    const auto& rule = rs.rules[r];
    tree.rule_ids.push_back(rule.id);
    std::vector<std::size_t> preds;
    for (const auto& p : rule.precondition) preds.push_back(universe_index(universe, p));
    std::stable_sort(preds.begin(), preds.end(), [&](std::size_t a, std::size_t b) {
      return ordering.rank[a] < ordering.rank[b];
    });
    std::size_t cur = 0;
    for (std::size_t k = 0; k < preds.size(); ++k) {
      const bool last = k + 1 == preds.size();
      std::size_t next = TreeNode::kNone;
      if (!last) {
        for (auto c : tree.nodes[cur].children) {
          if (tree.nodes[c].predicate == preds[k] && !tree.nodes[c].rule) {
            next = c;
            break;
          }
        }
      }
      if (next == TreeNode::kNone) {
        next = tree.nodes.size();
        TreeNode node;
        node.parent = cur;
        node.predicate = preds[k];
        if (last) node.rule = r;
        tree.nodes.push_back(std::move(node));
        tree.nodes[cur].children.push_back(next);
      }
      tree.nodes[next].cover.push_back(r);
      cur = next;
    }
    tree.leaf_of_rule.push_back(cur);
  }
  tree.wp.assign(rs.rules.size(), 0.0);
  return tree;
}

ExecutionTree score_tree_with_wp(ExecutionTree tree, std::span<const double> wp) {
  if (wp.size() != tree.rule_ids.size()) throw ConfigError("need one witness probability per rule");
  tree.wp.assign(wp.begin(), wp.end());
  for (std::size_t n = 1; n < tree.nodes.size(); ++n) {
    auto& node = tree.nodes[n];
    node.score = 0.0;
    for (auto r : node.cover) node.score = std::max(node.score, tree.wp[r]);
  }
  return tree;
}

ExecutionTree score_tree(ExecutionTree tree, std::span<const double> sps) {
  if (sps.size() != tree.universe.size()) throw ConfigError("need one sp per predicate");
  std::vector<double> wp(tree.rule_ids.size(), 1.0);
  for (std::size_t r = 0; r < wp.size(); ++r) {
    for (auto n : tree.path_of(r)) wp[r] *= sps[tree.nodes[n].predicate];
  }
  return score_tree_with_wp(std::move(tree), wp);
}

std::vector<std::size_t> visit_order(const ExecutionTree& tree, std::size_t node) {
  auto kids = tree.nodes.at(node).children;
  std::stable_sort(kids.begin(), kids.end(), [&](std::size_t a, std::size_t b) {
    return tree.nodes[a].score > tree.nodes[b].score;
  });
  return kids;
}

std::size_t ExecutionPath::checkpoint_count() const {
  return static_cast<std::size_t>(std::count_if(
      code.begin(), code.end(), [](const Instruction& i) { return i.op == OpCode::kCheckpoint; }));
}

std::vector<std::size_t> ExecutionPath::rule_order() const {
  std::vector<std::size_t> out;
  for (const auto& i : code) {
    if (i.op == OpCode::kCheckpoint) out.push_back(i.rule);
  }
  return out;
}

bool ExecutionPath::has_asymmetric_slot() const {
  for (const auto& i : code) {
    if (i.op == OpCode::kEval && slots[i.slot].asymmetric()) return true;
  }
  return false;
}

namespace {

void emit_subtree(const ExecutionTree& tree, std::size_t node, std::vector<Instruction>& code) {
  const std::size_t at = code.size();
  Instruction eval;
  eval.op = OpCode::kEval;
  eval.slot = tree.nodes[node].predicate;
  code.push_back(eval);
  if (const auto rule = tree.nodes[node].rule) {
    Instruction cp;
    cp.op = OpCode::kCheckpoint;
    cp.rule = *rule;
    code.push_back(cp);
  }
  for (auto c : visit_order(tree, node)) emit_subtree(tree, c, code);
  code[at].fail_jump = code.size();
}

}  // namespace

ExecutionPath compile_path(const ExecutionTree& tree, const Schema& schema,
                           const MeasureRegistry& registry) {
  ExecutionPath path;
  path.rule_ids = tree.rule_ids;
  for (std::size_t i = 0; i < tree.universe.size(); ++i) {
    path.slots.push_back(bind_predicate(tree.universe[i], schema, registry));
    path.slot_predicate.push_back(i);
  }
  for (auto c : visit_order(tree, 0)) emit_subtree(tree, c, path.code);
  return path;
}

ExecutionPath compile_branch(const ExecutionTree& tree, const ExecutionPath& full,
                             std::size_t root_child) {
  if (root_child >= tree.nodes.size() || tree.nodes[root_child].parent != 0) {
    throw ConfigError("branch root must be a child of the tree root");
  }
  ExecutionPath path;
  path.rule_ids = full.rule_ids;
  path.slots = full.slots;
  path.slot_predicate = full.slot_predicate;
  emit_subtree(tree, root_child, path.code);
  return path;
}

std::string_view to_string(OrderMode mode) {
  switch (mode) {
    case OrderMode::kEpg:
      return "epg";
    case OrderMode::kRandom:
      return "random";
    case OrderMode::kReversed:
      return "reversed";
  }
  return "epg";
}

std::optional<OrderMode> parse_order_mode(std::string_view name) {
  if (name == "epg") return OrderMode::kEpg;
  if (name == "random") return OrderMode::kRandom;
  if (name == "reversed") return OrderMode::kReversed;
  return std::nullopt;
}

Plan plan_from_estimates(const RuleSet& rs, const Schema& schema, const MeasureRegistry& registry,
                         std::vector<double> costs, std::vector<double> sps, OrderMode order,
                         std::uint64_t seed, std::optional<std::vector<double>> wp_override) {
  const auto start = Clock::now();
  Plan plan;
  plan.universe = predicate_universe(rs);
  if (costs.size() != plan.universe.size() || sps.size() != plan.universe.size()) {
    throw ConfigError("need one cost and one sp per distinct predicate");
  }
  plan.costs = std::move(costs);
  plan.ordering = order_predicates(plan.costs, sps);
  if (order != OrderMode::kEpg) {
    std::vector<std::size_t> seq;
    for (const auto& e : plan.ordering.entries) seq.push_back(e.predicate);
    if (order == OrderMode::kReversed) {
      std::reverse(seq.begin(), seq.end());
    } else {
      std::mt19937_64 rng(seed);
      std::shuffle(seq.begin(), seq.end(), rng);
    }
    plan.ordering = ordering_from_sequence(seq, plan.costs, sps);
  }
  auto tree = build_tree(rs, plan.universe, plan.ordering);
  plan.tree = wp_override ? score_tree_with_wp(std::move(tree), *wp_override)
                          : score_tree(std::move(tree), sps);
  plan.path = compile_path(plan.tree, schema, registry);
  plan.generation_seconds = seconds_since(start);
  return plan;
}

Plan make_plan(const Relation& relation, const RuleSet& rs, const MeasureRegistry& registry,
               const PlanOptions& options) {
  if (rs.rules.empty()) throw ValidationError("empty rule set");
  auto warnings = validate_ruleset(rs, relation.schema());
  const auto universe = predicate_universe(rs);
  std::vector<BoundPredicate> slots;
  for (const auto& p : universe) slots.push_back(bind_predicate(p, relation.schema(), registry));

  auto t0 = Clock::now();
  const Evaluator evaluator(relation, slots);
  const auto log = sample_timings(evaluator, options.timing_samples, options.seed);
  const double sampling = seconds_since(t0);

  t0 = Clock::now();
  const auto model = train_cost_model(log, evaluator, options.model);
  const double training = seconds_since(t0);

  t0 = Clock::now();
  const auto cost = estimate_costs(evaluator, model, options.cost_pairs, options.seed + 1);
  std::vector<SelectivityProfile> profiles;
  std::vector<double> sps;
  // The bucket histogram ignores thresholds, so predicates that differ only
  // in threshold share one pass over the relation.
  std::map<std::tuple<std::size_t, std::size_t, int, bool>, std::size_t> computed;
  for (const auto& b : slots) {
    const bool sim = b.predicate.op == Comparator::kSim;
    const int route = sim ? static_cast<int>(b.measure->kind) : -1;
    const auto key = std::make_tuple(b.lhs_index, b.rhs_index.value_or(b.lhs_index), route,
                                     sim ? b.measure->fold_case : true);
    const auto hit = b.predicate.is_const() ? computed.end() : computed.find(key);
    if (hit != computed.end() && !profiles[hit->second].warning) {
      profiles.push_back(profiles[hit->second]);
    } else {
      if (!b.predicate.is_const()) computed.emplace(key, profiles.size());
      profiles.push_back(estimate_selectivity(b, relation, options.buckets, options.seed + 2));
    }
    sps.push_back(profiles.back().sp);
    if (profiles.back().warning) warnings.push_back(*profiles.back().warning);
  }
  const double estimation = seconds_since(t0);

  auto plan = plan_from_estimates(rs, relation.schema(), registry, cost.normalized, sps, options.order,
                                  options.seed, options.wp_override);
  plan.selectivity = std::move(profiles);
  plan.warnings = std::move(warnings);
  plan.model_mse = model.training_mse();
  plan.sampling_seconds = sampling;
  plan.training_seconds = training;
  plan.estimation_seconds = estimation;
  return plan;
}

std::vector<double> wp_from_pairs(const RuleSet& rs, const Relation& relation,
                                  const MeasureRegistry& registry,
                                  std::span<const std::pair<Tid, Tid>> pairs) {
  std::vector<double> wp(rs.rules.size(), 0.0);
  if (pairs.empty()) return wp;
  for (std::size_t r = 0; r < rs.rules.size(); ++r) {
    std::vector<BoundPredicate> bound;
    for (const auto& p : rs.rules[r].precondition) {
      bound.push_back(bind_predicate(p, relation.schema(), registry));
    }
    std::size_t hits = 0;
    for (const auto& [t, s] : pairs) {
      if (t >= relation.size() || s >= relation.size()) throw ValidationError("labeled pair references an unknown tuple");
      if (std::all_of(bound.begin(), bound.end(),
                      [&](const BoundPredicate& b) { return eval_predicate(b, relation[t], relation[s]); })) {
        ++hits;
      }
    }
    wp[r] = static_cast<double>(hits) / static_cast<double>(pairs.size());
  }
  return wp;
}

std::string plan_to_json(const Plan& plan) {
  using nlohmann::json;
  json out;
  json ordering = json::array();
  for (const auto& e : plan.ordering.entries) {
    json j{{"predicate", to_string(plan.universe[e.predicate])},
           {"cost", e.cost},
           {"sp", e.sp},
           {"cost_effectiveness", e.cost_effectiveness}};
    ordering.push_back(std::move(j));
  }
  out["ordering"] = std::move(ordering);
  json nodes = json::array();
  for (std::size_t n = 0; n < plan.tree.nodes.size(); ++n) {
    const auto& node = plan.tree.nodes[n];
    json j{{"id", n}};
    if (n != 0) {
      j["parent"] = node.parent;
      j["predicate"] = to_string(plan.universe[node.predicate]);
      j["score"] = node.score;
      json cover = json::array();
      for (auto r : node.cover) cover.push_back(plan.tree.rule_ids[r]);
      j["cover"] = std::move(cover);
    }
    if (node.rule) j["rule"] = plan.tree.rule_ids[*node.rule];
    nodes.push_back(std::move(j));
  }
  out["nodes"] = std::move(nodes);
  json rules = json::array();
  for (std::size_t r = 0; r < plan.tree.rule_ids.size(); ++r) {
    rules.push_back({{"id", plan.tree.rule_ids[r]}, {"wp", plan.tree.wp[r]}});
  }
  out["rules"] = std::move(rules);
  json code = json::array();
  for (std::size_t i = 0; i < plan.path.code.size(); ++i) {
    const auto& ins = plan.path.code[i];
    if (ins.op == OpCode::kEval) {
      code.push_back({{"at", i},
                      {"op", "eval"},
                      {"slot", ins.slot},
                      {"predicate", to_string(plan.universe[plan.path.slot_predicate[ins.slot]])},
                      {"fail_jump", ins.fail_jump}});
    } else {
      code.push_back({{"at", i}, {"op", "checkpoint"}, {"rule", plan.path.rule_ids[ins.rule]}});
    }
  }
  out["path"] = std::move(code);
  out["warnings"] = plan.warnings;
  out["timings"] = {{"sampling_s", plan.sampling_seconds},
                    {"training_s", plan.training_seconds},
                    {"estimation_s", plan.estimation_seconds},
                    {"generation_s", plan.generation_seconds}};
  return out.dump(2);
}

std::string explain_text(const Plan& plan) {
  std::ostringstream os;
  os << std::setprecision(4);
  os << "predicate ordering (cost, sp, cost-effectiveness):\n";
  for (std::size_t i = 0; i < plan.ordering.entries.size(); ++i) {
    const auto& e = plan.ordering.entries[i];
    os << "  " << i + 1 << ". " << to_string(plan.universe[e.predicate]) << "  cost=" << e.cost
       << " sp=" << e.sp << " ce=" << e.cost_effectiveness << "\n";
  }
  os << "execution tree:\n";
  std::vector<std::pair<std::size_t, int>> stack;
  const auto roots = visit_order(plan.tree, 0);
  for (auto it = roots.rbegin(); it != roots.rend(); ++it) stack.emplace_back(*it, 1);
  os << "  N0\n";
  while (!stack.empty()) {
    const auto [n, depth] = stack.back();
    stack.pop_back();
    const auto& node = plan.tree.nodes[n];
    os << std::string(static_cast<std::size_t>(depth) * 2 + 2, ' ') << "-[" << to_string(plan.universe[node.predicate])
       << " | score " << node.score << "]-> N" << n;
    if (node.rule) os << "  (" << plan.tree.rule_ids[*node.rule] << ")";
    os << "\n";
    const auto kids = visit_order(plan.tree, n);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.emplace_back(*it, depth + 1);
  }
  os << "rules:\n";
  for (std::size_t r = 0; r < plan.tree.rule_ids.size(); ++r) {
    os << "  " << plan.tree.rule_ids[r] << "  wp=" << plan.tree.wp[r] << "\n";
  }
  os << "execution path:\n";
  for (std::size_t i = 0; i < plan.path.code.size(); ++i) {
    const auto& ins = plan.path.code[i];
    os << "  " << std::setw(3) << i << "  ";
    if (ins.op == OpCode::kEval) {
      os << "EVAL slot " << ins.slot << " "
         << to_string(plan.universe[plan.path.slot_predicate[ins.slot]]) << "  else -> " << ins.fail_jump << "\n";
    } else {
      os << "CHECKPOINT " << plan.path.rule_ids[ins.rule] << "\n";
    }
  }
  for (const auto& w : plan.warnings) os << "warning: " << w << "\n";
  return os.str();
}

}  // namespace mdblock
