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

#include "mdblock/bench.hpp"

namespace mdblock::bench {
namespace {

TEST(Ndcg, PerfectOrderScoresOne) { EXPECT_DOUBLE_EQ(ndcg({3, 1, 0, 2}, {3, 1, 0, 2}), 1.0); }

TEST(Ndcg, ReversedThreeItems) {
  // Relevances 3, 2, 1 presented as 1, 2, 3.
  const double dcg = 1.0 / std::log2(2.0) + 2.0 / std::log2(3.0) + 3.0 / std::log2(4.0);
  const double idcg = 3.0 / std::log2(2.0) + 2.0 / std::log2(3.0) + 1.0 / std::log2(4.0);
  EXPECT_NEAR(ndcg({2, 1, 0}, {0, 1, 2}), dcg / idcg, 1e-12);
}

TEST(Ndcg, SwappingTheTailCostsLessThanSwappingTheHead) {
  const std::vector<std::size_t> ideal{0, 1, 2, 3, 4};
  EXPECT_GT(ndcg({0, 1, 2, 4, 3}, ideal), ndcg({1, 0, 2, 3, 4}, ideal));
}

TEST(Suites, ElevenSuitesFoundByNameAndAlias) {
  EXPECT_EQ(suites().size(), 11u);
  for (const auto& s : suites()) {
    EXPECT_EQ(find_suite(s.name), &s);
    EXPECT_EQ(find_suite(s.alias), &s);
  }
  EXPECT_EQ(find_suite("nope"), nullptr);
}

}  // namespace
}  // namespace mdblock::bench
