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

#include <cmath>
#include <random>

#include "mdblock/cost_model.hpp"
#include "mdblock/error.hpp"
#include "support/fixtures.hpp"

namespace mdblock {
namespace {

Relation lengths_relation(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<TupleRecord> tuples;
  for (Tid i = 0; i < n; ++i) {
    const std::size_t len = 5 + rng() % 200;
    tuples.push_back({i, std::nullopt, {AttrValue::text(std::string(len, 'a' + static_cast<char>(rng() % 26)))}});
  }
  return Relation(Schema({{"v", AttrKind::kShortText}}), std::move(tuples));
}

std::vector<BoundPredicate> edit_slot(const Relation& rel) {
  return {bind_predicate(testing::sim("v", "edit", 0.5), rel.schema(), MeasureRegistry::defaults())};
}

TEST(Timing, SamplesEveryPredicate) {
  const auto& rel = testing::products();
  std::vector<BoundPredicate> slots;
  for (const auto& p : predicate_universe(testing::product_rules())) {
    slots.push_back(bind_predicate(p, rel.schema(), MeasureRegistry::defaults()));
  }
  const Evaluator ev(rel, slots);
  const auto log = sample_timings(ev, 7, 1);
  EXPECT_EQ(log.samples.size(), 7 * slots.size());
  for (const auto& s : log.samples) EXPECT_GE(s.seconds, 0.0);
  EXPECT_THROW(sample_timings(ev, 0, 1), ConfigError);
}

TEST(Timing, TextJaccardSlowerThanCategoricalEquality) {
  std::mt19937_64 rng(2);
  std::vector<TupleRecord> tuples;
  for (Tid i = 0; i < 200; ++i) {
    std::string desc;
    for (int w = 0; w < 40; ++w) desc += "w" + std::to_string(rng() % 500) + " ";
    tuples.push_back({i, std::nullopt, {AttrValue::text(rng() % 2 ? "Gray" : "Black"), AttrValue::text(desc)}});
  }
  const Relation rel(Schema({{"color", AttrKind::kCategorical}, {"desc", AttrKind::kLongText}}), std::move(tuples));
  const Evaluator ev(rel, {bind_predicate(testing::eq("color"), rel.schema(), MeasureRegistry::defaults()),
                           bind_predicate(testing::sim("desc", "jaccard", 0.5), rel.schema(), MeasureRegistry::defaults())});
  const auto log = sample_timings(ev, 2000, 3);
  double sum[2] = {0, 0}, sq[2] = {0, 0};
  for (const auto& s : log.samples) {
    sum[s.slot] += s.seconds;
    sq[s.slot] += s.seconds * s.seconds;
  }
  EXPECT_GT(sum[1], sum[0]);
  const double mean = sum[0] / 2000;
  const double cv = std::sqrt(std::max(0.0, sq[0] / 2000 - mean * mean)) / mean;
  EXPECT_LT(cv, 1.0);
}

TEST(CostModel, LearnsLengthProportionalCost) {
  const auto rel = lengths_relation(300, 4);
  const Evaluator ev(rel, edit_slot(rel));
  std::mt19937_64 rng(5);
  auto truth = [&](Tid t, Tid s) { return 2e-6 * static_cast<double>(rel.value(t, 0).str().size() + rel.value(s, 0).str().size()); };
  TimingLog log;
  for (int i = 0; i < 2000; ++i) {
    const Tid t = rng() % 300, s = rng() % 300;
    log.samples.push_back({0, t, s, truth(t, s)});
  }
  CostModelOptions opts;
  opts.epochs = 300;
  const auto model = train_cost_model(log, ev, opts);
  EXPECT_EQ(model.layer_sizes().front(), kCostFeatureCount);
  EXPECT_EQ(model.layer_sizes().size(), 5u);
  double err = 0;
  const int held_out = 500;
  for (int i = 0; i < held_out; ++i) {
    const Tid t = rng() % 300, s = rng() % 300;
    err += std::abs(model.predict(ev.slot(0), rel, t, s) - truth(t, s)) / truth(t, s);
  }
  EXPECT_LE(err / held_out, 0.2);
}

TEST(CostModel, SingleSampleMemorized) {
  const auto rel = lengths_relation(10, 6);
  const Evaluator ev(rel, edit_slot(rel));
  TimingLog log;
  log.samples.push_back({0, 1, 2, 3.5e-6});
  const auto model = train_cost_model(log, ev);
  EXPECT_NEAR(model.predict(ev.slot(0), rel, 1, 2), 3.5e-6, 0.35e-6);
}

TEST(CostModel, DeterministicAndNonNegative) {
  const auto rel = lengths_relation(50, 7);
  const Evaluator ev(rel, edit_slot(rel));
  const auto log = sample_timings(ev, 100, 8);
  const auto a = train_cost_model(log, ev);
  const auto b = train_cost_model(log, ev);
  EXPECT_EQ(a.parameters(), b.parameters());
  for (Tid t = 0; t < 50; ++t) EXPECT_GE(a.predict(ev.slot(0), rel, t, (t * 7) % 50), 0.0);
}

TEST(CostModel, DegenerateLogStillTrains) {
  const auto rel = lengths_relation(3, 9);
  const Evaluator ev(rel, edit_slot(rel));
  TimingLog log;
  for (int i = 0; i < 20; ++i) log.samples.push_back({0, 1, 1, i % 2 ? 1e-6 : 3e-6});
  const auto model = train_cost_model(log, ev);
  EXPECT_TRUE(std::isfinite(model.training_mse()));
  EXPECT_GT(model.training_mse(), 0.0);
  EXPECT_THROW(train_cost_model(TimingLog{}, ev), ConfigError);
}

TEST(CostEstimate, NormalizationAnchors) {
  const std::vector<double> raw{0.2, 2.0, 1.0};
  EXPECT_EQ(normalize_by_max(raw), (std::vector<double>{0.1, 1.0, 0.5}));
  EXPECT_EQ(normalize_by_max(std::vector<double>{5.0}), std::vector<double>{1.0});
  EXPECT_EQ(normalize_by_max(std::vector<double>{0.0, 0.0}), (std::vector<double>{1.0, 1.0}));
  const auto lifted = normalize_by_max(std::vector<double>{0.0, 4.0});
  EXPECT_GT(lifted[0], 0.0);

  const auto rel = lengths_relation(40, 10);
  const Evaluator ev(rel, edit_slot(rel));
  const auto model = train_cost_model(sample_timings(ev, 50, 1), ev);
  const auto est = estimate_costs(ev, model, 100, 2);
  ASSERT_EQ(est.normalized.size(), 1u);
  EXPECT_DOUBLE_EQ(est.normalized[0], 1.0);
}

}  // namespace
}  // namespace mdblock
