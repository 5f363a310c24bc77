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

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <random>

#include "mdblock/plan.hpp"
#include "mdblock/synth.hpp"
#include "support/fixtures.hpp"

namespace mdblock {
namespace {

using testing::eq;
using testing::position;
using testing::product_rules;
using testing::products;
using testing::sim;

// Universe order of the product rules: color, price, sname, pname,
// description, saddress.
const std::vector<double> kCosts{0.1, 0.1, 0.1, 1.0, 0.9, 0.5};
const std::vector<double> kSps{1.0, 0.6, 0.4, 0.2, 0.2, 0.3};

Plan product_plan() {
  return plan_from_estimates(product_rules(), products().schema(), MeasureRegistry::defaults(), kCosts, kSps);
}

std::vector<std::string> checkpoint_ids(const ExecutionPath& path) {
  std::vector<std::string> out;
  for (auto r : path.rule_order()) out.push_back(path.rule_ids[r]);
  return out;
}

TEST(Ordering, CostEffectivenessValues) {
  const std::vector<double> costs{0.1, 1.0};
  const std::vector<double> sps{1.0, 0.2};
  const auto ord = order_predicates(costs, sps);
  ASSERT_EQ(ord.entries.size(), 2u);
  EXPECT_EQ(ord.entries[0].predicate, 1u);
  EXPECT_NEAR(ord.entries[0].cost_effectiveness, 0.8, 1e-12);
  EXPECT_EQ(ord.entries[1].cost_effectiveness, 0.0);
  EXPECT_EQ(ord.rank[1], 0u);
  EXPECT_EQ(ord.rank[0], 1u);
}

TEST(Ordering, TieBreaks) {
  const std::vector<double> costs{0.5, 0.2, 0.9};
  const std::vector<double> ones{1.0, 1.0, 1.0};
  const auto by_cost = order_predicates(costs, ones);
  EXPECT_EQ(by_cost.entries[0].predicate, 1u);
  EXPECT_EQ(by_cost.entries[1].predicate, 0u);
  EXPECT_EQ(by_cost.entries[2].predicate, 2u);

  const std::vector<double> same_cost{0.4, 0.4};
  const std::vector<double> same_sp{0.5, 0.5};
  const auto first = order_predicates(same_cost, same_sp);
  EXPECT_EQ(first.entries[0].predicate, 0u);
}

TEST(Ordering, SortedDescendingOnRandomInputs) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<double> c(1 + rng() % 20), s(c.size());
    for (auto& x : c) x = u(rng);
    for (auto& x : s) x = u(rng);
    const auto ord = order_predicates(c, s);
    for (std::size_t i = 1; i < ord.entries.size(); ++i) {
      EXPECT_GE(ord.entries[i - 1].cost_effectiveness, ord.entries[i].cost_effectiveness);
    }
    for (std::size_t i = 0; i < ord.entries.size(); ++i) EXPECT_EQ(ord.rank[ord.entries[i].predicate], i);
  }
}

TEST(Tree, ProductTreeSharesSnamePrefix) {
  const auto plan = product_plan();
  const auto& tree = plan.tree;
  EXPECT_EQ(tree.leaf_count(), 3u);
  const auto sname = position(plan.universe, eq("sname"));
  const auto root_children = tree.nodes[0].children;
  ASSERT_EQ(root_children.size(), 2u);
  const auto n1 = root_children[0];
  EXPECT_EQ(tree.nodes[n1].predicate, sname);
  // phi1 and phi2 both start at the sname node; phi2 branches off there.
  const auto p1 = tree.path_of(0);
  const auto p2 = tree.path_of(1);
  ASSERT_EQ(p1.size(), 4u);
  ASSERT_EQ(p2.size(), 2u);
  EXPECT_EQ(p1[0], n1);
  EXPECT_EQ(p2[0], n1);
  EXPECT_NE(p1[1], p2[1]);
  EXPECT_EQ(tree.nodes[p2[1]].predicate, position(plan.universe, sim("description", "jaccard", 0.5)));
  EXPECT_EQ(tree.nodes[p2[1]].rule, 1u);
}

TEST(Tree, WitnessProbabilitiesAndEdgeScores) {
  const auto plan = product_plan();
  const auto& tree = plan.tree;
  EXPECT_NEAR(tree.wp[0], 0.048, 1e-12);
  EXPECT_NEAR(tree.wp[1], 0.08, 1e-12);
  EXPECT_NEAR(tree.wp[2], 0.06, 1e-12);
  EXPECT_NEAR(tree.nodes[tree.nodes[0].children[0]].score, 0.08, 1e-12);
}

TEST(Path, DepthFirstCheckpointOrder) {
  const auto plan = product_plan();
  EXPECT_EQ(checkpoint_ids(plan.path), (std::vector<std::string>{"phi2", "phi1", "phi3"}));
  EXPECT_EQ(plan.path.checkpoint_count(), 3u);
}

TEST(Path, SharedPredicateUsesOneSlot) {
  const auto plan = product_plan();
  const auto desc = position(plan.universe, sim("description", "jaccard", 0.5));
  std::size_t uses = 0;
  for (const auto& ins : plan.path.code) {
    if (ins.op == OpCode::kEval && plan.path.slot_predicate[ins.slot] == desc) ++uses;
  }
  EXPECT_EQ(uses, 2u);
  EXPECT_EQ(plan.path.slots.size(), 6u);
}

TEST(Path, ChainOfThree) {
  RuleSet rs;
  rs.rules.push_back({"only", {eq("color"), eq("sname"), eq("pname")}});
  const auto plan = plan_from_estimates(rs, products().schema(), MeasureRegistry::defaults(), {0.1, 0.2, 0.3},
                                        {0.5, 0.5, 0.5});
  const auto& code = plan.path.code;
  ASSERT_EQ(code.size(), 4u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(code[i].op, OpCode::kEval);
    EXPECT_EQ(code[i].fail_jump, 4u);
  }
  EXPECT_EQ(code[3].op, OpCode::kCheckpoint);
  for (auto n : plan.tree.path_of(0)) {
    if (n != 0) EXPECT_NEAR(plan.tree.nodes[n].score, 0.125, 1e-12);
  }
}

TEST(Tree, IdenticalPreconditionsShareAllButLeaf) {
  RuleSet rs;
  rs.rules.push_back({"a", {eq("color"), eq("sname")}});
  rs.rules.push_back({"b", {eq("sname"), eq("color")}});
  const auto plan = plan_from_estimates(rs, products().schema(), MeasureRegistry::defaults(), {0.1, 0.2}, {0.5, 0.5});
  const auto pa = plan.tree.path_of(0);
  const auto pb = plan.tree.path_of(1);
  ASSERT_EQ(pa.size(), 2u);
  ASSERT_EQ(pb.size(), 2u);
  EXPECT_EQ(pa[0], pb[0]);
  EXPECT_NE(pa[1], pb[1]);
  EXPECT_EQ(plan.tree.nodes[pa[1]].predicate, plan.tree.nodes[pb[1]].predicate);
  EXPECT_EQ(plan.tree.leaf_count(), 2u);
}

// Structural invariants on random rule sets and orderings.
TEST(Tree, RandomStructuralInvariants) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto inst = synth::random_instance(seed, 60, 8);
    const auto universe = predicate_universe(inst.rules);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    std::vector<double> costs(universe.size()), sps(universe.size());
    for (auto& c : costs) c = u(rng);
    for (auto& s : sps) s = u(rng);
    const auto order = static_cast<OrderMode>(seed % 3);
    const auto plan =
        plan_from_estimates(inst.rules, inst.relation.schema(), MeasureRegistry::defaults(), costs, sps, order, seed);
    const auto& tree = plan.tree;
    ASSERT_EQ(tree.leaf_count(), inst.rules.size());
    for (std::size_t r = 0; r < inst.rules.size(); ++r) {
      const auto path = tree.path_of(r);
      std::vector<std::size_t> got, want;
      for (auto n : path) got.push_back(tree.nodes[n].predicate);
      for (const auto& p : inst.rules.rules[r].precondition) want.push_back(position(universe, p));
      std::sort(got.begin(), got.end());
      std::sort(want.begin(), want.end());
      EXPECT_EQ(got, want);
      // Predicates along the path follow the ordering.
      for (std::size_t i = 1; i < path.size(); ++i) {
        EXPECT_LT(plan.ordering.rank[tree.nodes[path[i - 1]].predicate], plan.ordering.rank[tree.nodes[path[i]].predicate]);
      }
      double wp = 1.0;
      for (const auto& p : inst.rules.rules[r].precondition) wp *= sps[position(universe, p)];
      EXPECT_NEAR(tree.wp[r], wp, 1e-12);
    }
    for (std::size_t n = 1; n < tree.nodes.size(); ++n) {
      double best = 0.0;
      for (auto r : tree.nodes[n].cover) best = std::max(best, tree.wp[r]);
      EXPECT_DOUBLE_EQ(tree.nodes[n].score, best);
      const auto kids = visit_order(tree, n);
      for (std::size_t i = 1; i < kids.size(); ++i) EXPECT_GE(tree.nodes[kids[i - 1]].score, tree.nodes[kids[i]].score);
    }
    // Every rule checkpointed once; instruction order is the DFS order.
    auto order_ids = plan.path.rule_order();
    std::sort(order_ids.begin(), order_ids.end());
    std::vector<std::size_t> all(inst.rules.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    EXPECT_EQ(order_ids, all);
    for (std::size_t i = 0; i < plan.path.code.size(); ++i) {
      const auto& ins = plan.path.code[i];
      if (ins.op == OpCode::kEval) {
        EXPECT_GT(ins.fail_jump, i);
        EXPECT_LE(ins.fail_jump, plan.path.code.size());
      }
    }
  }
}

// Measured timings differ run to run; everything downstream of them is a
// pure function of the estimates.
TEST(Plan, DeterministicAndJsonExports) {
  const auto a = make_plan(products(), product_rules(), MeasureRegistry::defaults());
  std::vector<double> sps;
  for (const auto& s : a.selectivity) sps.push_back(s.sp);
  for (int i = 0; i < 3; ++i) {
    const auto b = plan_from_estimates(product_rules(), products().schema(), MeasureRegistry::defaults(), a.costs, sps);
    EXPECT_EQ(checkpoint_ids(a.path), checkpoint_ids(b.path));
    ASSERT_EQ(a.path.code.size(), b.path.code.size());
    for (std::size_t k = 0; k < a.path.code.size(); ++k) {
      EXPECT_EQ(a.path.code[k].op, b.path.code[k].op);
      EXPECT_EQ(a.path.code[k].slot, b.path.code[k].slot);
      EXPECT_EQ(a.path.code[k].fail_jump, b.path.code[k].fail_jump);
    }
  }
  const auto again = make_plan(products(), product_rules(), MeasureRegistry::defaults());
  for (std::size_t i = 0; i < a.selectivity.size(); ++i) EXPECT_EQ(a.selectivity[i].sp, again.selectivity[i].sp);
  EXPECT_EQ(plan_to_json(a).empty(), false);
  EXPECT_NE(explain_text(a).find("phi1"), std::string::npos);
  for (double c : a.costs) {
    EXPECT_GT(c, 0.0);
    EXPECT_LE(c, 1.0);
  }
  EXPECT_DOUBLE_EQ(*std::max_element(a.costs.begin(), a.costs.end()), 1.0);
}

TEST(Plan, GenerationTimeGrowsWithRules) {
  const auto small = synth::wide_ruleset(1, 3, 1);
  const auto large = synth::wide_ruleset(50, 100, 1);
  auto time_of = [](const synth::Instance& inst) {
    const auto universe = predicate_universe(inst.rules);
    std::vector<double> c(universe.size(), 0.5), s(universe.size(), 0.5);
    double best = 1e9;
    for (int i = 0; i < 5; ++i) {
      const auto plan = plan_from_estimates(inst.rules, inst.relation.schema(), MeasureRegistry::defaults(), c, s);
      best = std::min(best, plan.generation_seconds);
    }
    return best;
  };
  EXPECT_EQ(predicate_universe(large.rules).size(), 100u);
  EXPECT_LT(time_of(small), time_of(large));
  EXPECT_LT(time_of(large), 1.0);
}

}  // namespace
}  // namespace mdblock
