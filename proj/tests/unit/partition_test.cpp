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
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "mdblock/engine.hpp"
#include "mdblock/error.hpp"
#include "mdblock/metrics.hpp"
#include "mdblock/minhash.hpp"
#include "mdblock/partition.hpp"
#include "mdblock/synth.hpp"
#include "support/fixtures.hpp"

namespace mdblock {
namespace {

using testing::eq;
using testing::product_rules;
using testing::products;

const std::vector<double> kCosts{0.1, 0.1, 0.1, 1.0, 0.9, 0.5};
const std::vector<double> kSps{1.0, 0.6, 0.4, 0.2, 0.2, 0.3};

Plan product_plan() {
  return plan_from_estimates(product_rules(), products().schema(), MeasureRegistry::defaults(), kCosts, kSps);
}

Plan plan_for(const RuleSet& rs, const Relation& rel) {
  const auto n = predicate_universe(rs).size();
  return plan_from_estimates(rs, rel.schema(), MeasureRegistry::defaults(), std::vector<double>(n, 0.5),
                             std::vector<double>(n, 0.5));
}

std::set<std::set<Tid>> groups_of(const PartitionSet& ps) {
  std::set<std::set<Tid>> out;
  for (const auto& p : ps.partitions) out.insert(std::set<Tid>(p.tuple_refs.begin(), p.tuple_refs.end()));
  return out;
}

TEST(Partitioners, OnePerRootEdge) {
  const auto plan = product_plan();
  const auto parts = derive_partitioners(plan.tree, plan.path);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].predicate.predicate, eq("sname"));
  EXPECT_EQ(parts[0].kind, KeyKind::kExact);
  EXPECT_EQ(parts[0].branch_id, 0u);
  EXPECT_EQ(parts[1].kind, KeyKind::kMinHash);

  RuleSet chain;
  chain.rules.push_back({"a", {eq("color"), eq("sname")}});
  EXPECT_EQ(derive_partitioners(plan_for(chain, products()).tree, plan_for(chain, products()).path).size(), 1u);
  chain.rules.push_back({"b", {eq("color"), eq("pname")}});
  const auto two = plan_for(chain, products());
  // Equal estimates order by first appearance, so color leads both rules.
  EXPECT_EQ(derive_partitioners(two.tree, two.path).size(), 1u);
}

TEST(Partitioners, ConstantsAndCrossAttributesAreUniversal) {
  const auto rs = parse_ruleset(R"([{"id":"c","when":[{"t_attr":"color","op":"eq","const":"Gray"}]},
    {"id":"x","when":[{"t_attr":"pname","op":"sim","s_attr":"description","measure":"jaccard","threshold":0.2}]}])");
  const auto plan = plan_for(rs, products());
  for (const auto& p : derive_partitioners(plan.tree, plan.path)) EXPECT_EQ(p.kind, KeyKind::kUniversal);
}

TEST(Partitioning, SnameGroups) {
  const auto plan = product_plan();
  const auto parts = derive_partitioners(plan.tree, plan.path);
  const auto ps = partition_branch(products(), parts[0], {});
  const std::set<std::set<Tid>> want{{0, 3, 4}, {1, 2}};
  EXPECT_EQ(groups_of(ps), want);
  for (const auto& p : ps.partitions) EXPECT_EQ(p.branch_id, 0u);
  EXPECT_TRUE(ps.pulls.empty());
}

TEST(Partitioning, DistinctKeysGiveSingletons) {
  RuleSet rs;
  rs.rules.push_back({"a", {eq("pno")}});
  const auto plan = plan_for(rs, products());
  const auto ps = partition_branch(products(), derive_partitioners(plan.tree, plan.path)[0], {});
  EXPECT_EQ(ps.partitions.size(), 5u);
}

TEST(Partitioning, MissingKeysGetOwnGroups) {
  RuleSet rs;
  rs.rules.push_back({"a", {eq("price")}});
  const auto plan = plan_for(rs, products());
  const auto ps = partition_branch(products(), derive_partitioners(plan.tree, plan.path)[0], {});
  // t1, t4, t5 share 909; t2 is missing; t3 is 849.
  EXPECT_EQ(groups_of(ps), (std::set<std::set<Tid>>{{0, 3, 4}, {1}, {2}}));
}

TEST(Partitioning, OncePerBranchAndSplitting) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const auto inst = synth::random_instance(seed, 300);
    const auto plan = plan_for(inst.rules, inst.relation);
    const auto parts = derive_partitioners(plan.tree, plan.path);
    PartitionOptions opts;
    opts.max_partition_size = 1 + seed % 20;
    opts.seed = seed;
    const auto ps = partition_relation(inst.relation, parts, opts);
    std::map<std::size_t, std::vector<Tid>> per_branch;
    for (const auto& p : ps.partitions) {
      ASSERT_TRUE(p.branch_id);
      EXPECT_LE(p.tuple_refs.size(), opts.max_partition_size);
      EXPECT_FALSE(p.tuple_refs.empty());
      auto& v = per_branch[*p.branch_id];
      v.insert(v.end(), p.tuple_refs.begin(), p.tuple_refs.end());
    }
    EXPECT_EQ(per_branch.size(), parts.size());
    for (auto& [b, tids] : per_branch) {
      std::sort(tids.begin(), tids.end());
      ASSERT_EQ(tids.size(), inst.relation.size());
      for (Tid i = 0; i < tids.size(); ++i) EXPECT_EQ(tids[i], i);
    }
    for (const auto& pull : ps.pulls) {
      EXPECT_LT(pull.a, pull.b);
      EXPECT_EQ(ps.partitions[pull.a].branch_id, ps.partitions[pull.b].branch_id);
    }
  }
}

// Pairs satisfying a branch's rules all meet inside a partition or a pull.
TEST(Partitioning, ExactBranchesLoseNoPairs) {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const auto inst = synth::random_instance(seed, 200);
    const auto plan = plan_for(inst.rules, inst.relation);
    const auto parts = derive_partitioners(plan.tree, plan.path);
    PartitionOptions opts;
    opts.max_partition_size = 16;
    const auto ps = partition_relation(inst.relation, parts, opts);
    for (const auto& part : parts) {
      if (part.kind == KeyKind::kMinHash) continue;
      std::set<std::uint64_t> covered;
      for (std::size_t i = 0; i < ps.partitions.size(); ++i) {
        const auto& p = ps.partitions[i];
        if (p.branch_id != part.branch_id) continue;
        for (auto a : p.tuple_refs)
          for (auto b : p.tuple_refs)
            if (a != b) covered.insert(pair_key(a, b));
      }
      for (const auto& pull : ps.pulls) {
        if (ps.partitions[pull.a].branch_id != part.branch_id) continue;
        for (auto a : ps.partitions[pull.a].tuple_refs)
          for (auto b : ps.partitions[pull.b].tuple_refs) covered.insert(pair_key(a, b));
      }
      for (Tid t = 0; t < inst.relation.size(); ++t) {
        for (Tid s = 0; s < inst.relation.size(); ++s) {
          if (t != s && eval_predicate(part.predicate, inst.relation[t], inst.relation[s])) {
            EXPECT_TRUE(covered.count(pair_key(t, s))) << to_string(part.predicate.predicate);
          }
        }
      }
    }
  }
}

TEST(Partitioning, PullRecoversPairSplitByBanding) {
  // Find two similar names whose band-0 keys differ.
  std::vector<std::string> names{"MacBook Air 13 inch", "MacBook Air 13 incj"};
  for (int i = 0; i < 200; ++i) names.push_back("Gadget " + std::to_string(i * 7919) + " deluxe edition");
  std::vector<TupleRecord> tuples;
  for (Tid i = 0; i < names.size(); ++i) tuples.push_back({i, std::nullopt, {AttrValue::text(names[i])}});
  const Relation rel(Schema({{"name", AttrKind::kShortText}}), std::move(tuples));
  RuleSet rs;
  rs.rules.push_back({"n", {testing::sim("name", "edit", 0.9)}});
  const auto plan = plan_for(rs, rel);
  const auto part = derive_partitioners(plan.tree, plan.path)[0];
  ASSERT_EQ(part.kind, KeyKind::kMinHash);
  bool found = false;
  for (std::uint64_t seed = 0; seed < 64 && !found; ++seed) {
    PartitionOptions opts;
    opts.seed = seed;
    const auto ps = partition_branch(rel, part, opts);
    std::size_t pa = 0, pb = 0;
    for (std::size_t i = 0; i < ps.partitions.size(); ++i) {
      const auto& refs = ps.partitions[i].tuple_refs;
      if (std::count(refs.begin(), refs.end(), 0u)) pa = i;
      if (std::count(refs.begin(), refs.end(), 1u)) pb = i;
    }
    if (pa == pb) continue;
    const PartitionPull want{std::min(pa, pb), std::max(pa, pb)};
    if (std::find(ps.pulls.begin(), ps.pulls.end(), want) == ps.pulls.end()) continue;
    found = true;
    Evaluator ev(rel, plan.path.slots);
    EngineConfig cfg;
    cfg.num_blocks = 1;
    Engine engine(cfg);
    const auto res = engine.cross_partition_pull(ps.partitions[pa], ps.partitions[pb], plan.path, ev);
    ASSERT_EQ(res.pairs.size(), 1u);
    EXPECT_EQ(pair_key(res.pairs[0].t, res.pairs[0].s), pair_key(0, 1));
  }
  EXPECT_TRUE(found);
}

TEST(MinHash, SignaturesAndKeys) {
  MinHasher mh(32, 5);
  const auto a = shingles("the quick brown fox", MeasureKind::kJaccard, true);
  const auto b = shingles("The Quick, Brown Fox", MeasureKind::kJaccard, true);
  EXPECT_EQ(mh.signature(a), mh.signature(b));
  EXPECT_EQ(equality_key(AttrValue::text(" Gray ")), equality_key(AttrValue::text("gray")));
  EXPECT_EQ(equality_key(AttrValue::number(909, "$909")), equality_key(AttrValue::text("909.0")));
  const auto sig = mh.signature(a);
  EXPECT_EQ(band_key(sig, 0, 4), band_key(mh.signature(b), 0, 4));
}

TEST(Scheduler, SingleDeviceTakesAll) {
  const auto parts = split_fixed(products(), 5);
  const auto r = schedule(parts, make_devices(1, 10), 1);
  EXPECT_EQ(r.device_of, std::vector<std::size_t>(5, 0));
  EXPECT_TRUE(r.fallback_partitions.empty());
}

TEST(Scheduler, FullDeviceReroutesClockwise) {
  const auto devices = make_devices(4, 2);
  ChblScheduler sched(devices, 3);
  const std::uint64_t key = 12345;
  std::vector<std::size_t> loads(4, 0);
  bool fallback = false;
  const auto first = sched.pick(key, loads, &fallback);
  EXPECT_FALSE(fallback);
  loads[first] = 2;
  const auto second = sched.pick(key, loads, &fallback);
  EXPECT_NE(second, first);
  EXPECT_FALSE(fallback);
  // The next device clockwise from the full one.
  const double pf = sched.device_position(first);
  double best = 2.0;
  std::size_t want = first;
  for (std::size_t d = 0; d < 4; ++d) {
    if (d == first) continue;
    double gap = sched.device_position(d) - pf;
    if (gap < 0) gap += 1.0;
    if (gap < best) best = gap, want = d;
  }
  const double pk = circle_position(key, 3);
  double key_to_first = pf - pk;
  if (key_to_first < 0) key_to_first += 1.0;
  bool first_is_nearest = true;
  for (std::size_t d = 0; d < 4; ++d) {
    double gap = sched.device_position(d) - pk;
    if (gap < 0) gap += 1.0;
    if (gap < key_to_first) first_is_nearest = false;
  }
  EXPECT_TRUE(first_is_nearest);
  EXPECT_EQ(second, want);

  std::fill(loads.begin(), loads.end(), 2);
  loads[2] = 1;
  EXPECT_EQ(sched.pick(key, loads, &fallback), 2u);
  std::fill(loads.begin(), loads.end(), 3);
  loads[1] = 2;
  loads[3] = 2;
  EXPECT_EQ(sched.pick(key, loads, &fallback), 1u);
  EXPECT_TRUE(fallback);
}

TEST(Scheduler, DeterministicAndBounded) {
  const auto inst = synth::grouped_instance(2000, 20, 1);
  const auto parts = split_fixed(inst.relation, 60);
  const auto devices = make_devices(4, 10);
  const auto a = schedule(parts, devices, 9);
  const auto b = schedule(parts, devices, 9);
  EXPECT_EQ(a.device_of, b.device_of);
  std::vector<std::size_t> load(4, 0);
  for (auto d : a.device_of) ++load[d];
  for (auto l : load) EXPECT_LE(l, 20u);
  EXPECT_EQ(a.fallback_partitions.size(), 20u);
}

TEST(Devices, ConfigFile) {
  const auto path = std::filesystem::temp_directory_path() / "mdblock_devices_test.json";
  {
    std::ofstream out(path);
    out << R"({"devices":[{"id":0,"capacity":2,"blocks":1,"lanes":8},{"id":1,"capacity":3}]})";
  }
  const auto devs = load_devices(path.string());
  ASSERT_EQ(devs.size(), 2u);
  EXPECT_EQ(devs[0].capacity, 2u);
  EXPECT_EQ(devs[0].lanes, 8u);
  EXPECT_EQ(devs[1].capacity, 3u);
  {
    std::ofstream out(path);
    out << R"({"count":3,"capacity":5})";
  }
  EXPECT_EQ(load_devices(path.string()).size(), 3u);
  {
    std::ofstream out(path);
    out << R"({"count":0})";
  }
  EXPECT_THROW(load_devices(path.string()), Error);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace mdblock
