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

#include "mdblock/evaluator.hpp"
#include "mdblock/rules.hpp"
#include "mdblock/synth.hpp"
#include "support/fixtures.hpp"

namespace mdblock {
namespace {

std::vector<BoundPredicate> bind_all(const RuleSet& rs, const Schema& schema, const MeasureRegistry& reg) {
  std::vector<BoundPredicate> out;
  for (const auto& p : predicate_universe(rs)) out.push_back(bind_predicate(p, schema, reg));
  return out;
}

void expect_agrees(const Relation& rel, const RuleSet& rs, const MeasureRegistry& reg) {
  const auto slots = bind_all(rs, rel.schema(), reg);
  const Evaluator ev(rel, slots);
  for (Tid t = 0; t < rel.size(); ++t) {
    for (Tid s = 0; s < rel.size(); ++s) {
      for (std::size_t k = 0; k < slots.size(); ++k) {
        ASSERT_EQ(ev.eval(k, t, s), eval_predicate(slots[k], rel[t], rel[s]))
            << to_string(slots[k].predicate) << " at (" << t << "," << s << ")";
      }
    }
  }
}

TEST(Evaluator, AgreesWithGenericRouteOnProducts) {
  expect_agrees(testing::products(), testing::product_rules(), MeasureRegistry::defaults());
}

TEST(Evaluator, AgreesWithGenericRouteOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto inst = synth::random_instance(seed, 80, 6);
    expect_agrees(inst.relation, inst.rules, MeasureRegistry::defaults());
  }
}

TEST(Evaluator, CaseSensitiveMeasuresAgree) {
  MeasureRegistry reg;
  reg.set_fold_case("edit", false);
  reg.set_fold_case("jaccard", false);
  for (std::uint64_t seed = 30; seed < 40; ++seed) {
    const auto inst = synth::random_instance(seed, 60, 6);
    expect_agrees(inst.relation, inst.rules, reg);
  }
}

TEST(Evaluator, CustomMeasureTakesGenericRoute) {
  MeasureRegistry reg;
  Measure longer;
  longer.symmetric = false;
  longer.scorer = [](const AttrValue& a, const AttrValue& b) { return a.str().size() >= b.str().size() ? 1.0 : 0.0; };
  reg.add("longer", longer);
  RuleSet rs;
  rs.rules.push_back({"x", {testing::sim("pname", "longer", 1.0)}});
  expect_agrees(testing::products(), rs, reg);
}

}  // namespace
}  // namespace mdblock
