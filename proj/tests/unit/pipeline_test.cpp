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

#include <set>

#include "mdblock/error.hpp"
#include "mdblock/metrics.hpp"
#include "mdblock/pipeline.hpp"
#include "mdblock/synth.hpp"
#include "support/fixtures.hpp"

namespace mdblock {
namespace {

std::set<std::uint64_t> unordered(const std::vector<CandidatePair>& pairs) {
  std::set<std::uint64_t> out;
  for (const auto& p : pairs) out.insert(pair_key(p.t, p.s));
  return out;
}

Plan quick_plan(const Relation& rel, const RuleSet& rs) {
  PlanOptions o;
  o.timing_samples = 30;
  o.cost_pairs = 300;
  o.model.epochs = 30;
  return make_plan(rel, rs, MeasureRegistry::defaults(), o);
}

EngineConfig engine_config() {
  EngineConfig cfg;
  cfg.num_blocks = 2;
  cfg.interval_size = 32;
  cfg.inline_below = 64;
  return cfg;
}

TEST(Pipeline, ProductTableCandidates) {
  const auto plan = quick_plan(testing::products(), testing::product_rules());
  for (bool async : {true, false}) {
    PipelineConfig cfg;
    cfg.async = async;
    const auto res = pipeline_run(testing::products(), plan, cfg, engine_config(), make_devices(2));
    const std::set<std::uint64_t> want{pair_key(0, 3), pair_key(0, 4), pair_key(3, 4), pair_key(1, 2)};
    EXPECT_EQ(unordered(res.candidates.pairs), want);
    for (const auto& p : res.candidates.pairs) EXPECT_LT(p.t, p.s);
  }
}

TEST(Pipeline, AsyncAndSyncAgree) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto inst = synth::random_instance(seed, 300);
    const auto plan = quick_plan(inst.relation, inst.rules);
    PipelineConfig cfg;
    cfg.partition.max_partition_size = 24;
    cfg.seed = seed;
    cfg.async = true;
    const auto a = pipeline_run(inst.relation, plan, cfg, engine_config(), make_devices(3, 2));
    cfg.async = false;
    const auto b = pipeline_run(inst.relation, plan, cfg, engine_config(), make_devices(3, 2));
    EXPECT_EQ(a.candidates.pairs, b.candidates.pairs) << "seed " << seed;
    EXPECT_EQ(a.tasks, b.tasks);
  }
}

// Exact-keyed and universal root edges lose nothing, so the pipeline equals
// the oracle; MinHash roots may only drop pairs, never invent them.
TEST(Pipeline, MatchesOracleOrIsSubset) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = synth::random_instance(seed, 250);
    const auto plan = quick_plan(inst.relation, inst.rules);
    PipelineConfig cfg;
    cfg.partition.max_partition_size = 20 + seed;
    const auto res = pipeline_run(inst.relation, plan, cfg, engine_config(), make_devices(2, 3));
    const auto got = unordered(res.candidates.pairs);
    const auto want =
        unordered(brute_force_candidates(inst.relation, inst.rules, MeasureRegistry::defaults(), true));
    bool lossy = false;
    for (const auto& p : derive_partitioners(plan.tree, plan.path)) lossy |= p.kind == KeyKind::kMinHash;
    if (lossy) {
      for (auto k : got) EXPECT_TRUE(want.count(k));
    } else {
      EXPECT_EQ(got, want) << "seed " << seed;
    }
    for (std::size_t i = 1; i < res.candidates.pairs.size(); ++i) {
      EXPECT_LT(res.candidates.pairs[i - 1], res.candidates.pairs[i]);
    }
  }
}

TEST(Pipeline, PullsNeverRemoveCandidates) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = synth::random_instance(seed + 50, 250);
    const auto plan = quick_plan(inst.relation, inst.rules);
    PipelineConfig cfg;
    cfg.partition.max_partition_size = 16;
    const auto with = unordered(pipeline_run(inst.relation, plan, cfg, engine_config(), make_devices(2)).candidates.pairs);
    cfg.pull = false;
    const auto res = pipeline_run(inst.relation, plan, cfg, engine_config(), make_devices(2));
    EXPECT_EQ(res.pulls, 0u);
    for (auto k : unordered(res.candidates.pairs)) EXPECT_TRUE(with.count(k));
  }
}

TEST(Pipeline, CrossBranchDuplicatesCollapse) {
  // Both rules fire on the same pair but start from different root edges.
  const auto rs = parse_ruleset(R"([{"id":"by_name","when":[{"t_attr":"pname","op":"eq"}]},
                                    {"id":"by_store","when":[{"t_attr":"sname","op":"eq"}]}])");
  const auto plan = quick_plan(testing::products(), rs);
  ASSERT_EQ(derive_partitioners(plan.tree, plan.path).size(), 2u);
  const auto res = pipeline_run(testing::products(), plan, PipelineConfig{}, engine_config(), make_devices(2));
  // (t2,t3) and (t4,t5) match both rules.
  EXPECT_EQ(res.candidates.pairs.size(), unordered(res.candidates.pairs).size());
  const std::set<std::uint64_t> want{pair_key(1, 2), pair_key(3, 4), pair_key(0, 3), pair_key(0, 4)};
  EXPECT_EQ(unordered(res.candidates.pairs), want);
}

TEST(Pipeline, StageErrorsNameTheStage) {
  const auto plan = quick_plan(testing::products(), testing::product_rules());
  try {
    pipeline_run(testing::products(), plan, PipelineConfig{}, engine_config(), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("schedule"), std::string::npos) << e.what();
  }
  PipelineConfig bad;
  bad.partition_queue = 0;
  EXPECT_THROW(pipeline_run(testing::products(), plan, bad, engine_config(), make_devices(1)), Error);
}

}  // namespace
}  // namespace mdblock
