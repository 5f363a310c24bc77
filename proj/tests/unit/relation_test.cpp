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
#include <numeric>
#include <random>
#include <sstream>

#include "mdblock/error.hpp"
#include "mdblock/relation.hpp"
#include "support/fixtures.hpp"

namespace mdblock {
namespace {

using testing::products;

Relation from_text(const std::string& csv, const LoadOptions& opts = {}) {
  std::istringstream in(csv);
  return read_relation(in, opts);
}

TEST(Relation, ProductTableLoads) {
  const auto& rel = products();
  ASSERT_EQ(rel.size(), 5u);
  const auto saddress = *rel.schema().index_of("saddress");
  EXPECT_TRUE(rel.value(3, saddress).is_missing());
  EXPECT_TRUE(rel.value(1, *rel.schema().index_of("price")).is_missing());
  EXPECT_TRUE(rel.value(4, *rel.schema().index_of("description")).is_missing());
  EXPECT_EQ(rel.schema().at(*rel.schema().index_of("price")).kind, AttrKind::kNumeric);
  EXPECT_EQ(rel.schema().at(*rel.schema().index_of("description")).kind, AttrKind::kLongText);
  EXPECT_EQ(rel.schema().at(*rel.schema().index_of("pname")).kind, AttrKind::kShortText);
  EXPECT_EQ(rel[0].eid, "e1");
  EXPECT_EQ(rel[2].eid, "e2");
}

TEST(Relation, HeaderOnlyGivesEmptyRelation) {
  const auto rel = from_text("a,b\n");
  EXPECT_EQ(rel.size(), 0u);
  EXPECT_EQ(rel.schema().arity(), 2u);
}

TEST(Relation, MixedColumnStaysText) {
  const auto rel = from_text("v\n1\n2\nx\n");
  EXPECT_EQ(rel.schema().at(0).kind, AttrKind::kShortText);
  const auto num = from_text("v\n1\n2\n-\n");
  EXPECT_EQ(num.schema().at(0).kind, AttrKind::kNumeric);
}

TEST(Relation, CategoricalOnlyThroughHints) {
  LoadOptions opts;
  opts.kind_hints["v"] = AttrKind::kCategorical;
  EXPECT_EQ(from_text("v\nred\n", opts).schema().at(0).kind, AttrKind::kCategorical);
}

TEST(Relation, RaggedRowNamesLine) {
  try {
    from_text("a,b\n1,2\n3\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Relation, DuplicateHeaderIsSchemaError) { EXPECT_THROW(from_text("a,a\n1,2\n"), SchemaError); }

TEST(Relation, MissingDistinctFromEmptyText) {
  LoadOptions opts;
  opts.missing_markers = {"NA"};
  const auto rel = from_text("a,b\nNA,\n", opts);
  EXPECT_TRUE(rel.value(0, 0).is_missing());
  EXPECT_TRUE(rel.value(0, 1).is_text());
  EXPECT_EQ(rel.value(0, 1).str(), "");
}

TEST(Relation, RoundTripKeepsCellsByteExact) {
  std::ostringstream out;
  write_relation_csv(products(), out);
  std::istringstream in(out.str());
  LoadOptions opts;
  opts.eid_attr = "eid";
  const auto again = read_relation(in, opts);
  ASSERT_EQ(again.size(), products().size());
  for (Tid t = 0; t < again.size(); ++t) {
    for (std::size_t a = 0; a < again.schema().arity(); ++a) {
      const auto& x = products().value(t, a);
      const auto& y = again.value(t, a);
      EXPECT_EQ(x.is_missing(), y.is_missing());
      if (!x.is_missing()) EXPECT_EQ(x.str(), y.str());
    }
  }
}

TEST(Relation, SplitFixedSizes) {
  auto sizes = [](const std::vector<DataPartition>& ps) {
    std::vector<std::size_t> out;
    for (const auto& p : ps) out.push_back(p.tuple_refs.size());
    return out;
  };
  EXPECT_EQ(sizes(split_fixed(products(), 1)), std::vector<std::size_t>{5});
  EXPECT_EQ(sizes(split_fixed(products(), 2)), (std::vector<std::size_t>{3, 2}));
  EXPECT_EQ(sizes(split_fixed(products(), 9)), std::vector<std::size_t>(5, 1));

  std::vector<TupleRecord> tuples;
  for (Tid i = 0; i < 2304; ++i) tuples.push_back({i, std::nullopt, {AttrValue::number(i)}});
  const Relation big(Schema({{"x", AttrKind::kNumeric}}), std::move(tuples));
  EXPECT_EQ(sizes(split_fixed(big, 9)), std::vector<std::size_t>(9, 256));

  EXPECT_THROW(split_fixed(Relation(), 2), ConfigError);
  EXPECT_THROW(split_fixed(products(), 0), ConfigError);
}

TEST(Relation, SplitFixedCoversEveryTupleOnce) {
  std::mt19937_64 rng(3);
  for (int iter = 0; iter < 50; ++iter) {
    std::vector<TupleRecord> tuples;
    const Tid n = 1 + rng() % 300;
    for (Tid i = 0; i < n; ++i) tuples.push_back({i, std::nullopt, {AttrValue::text("v")}});
    const Relation rel(Schema({{"x", AttrKind::kShortText}}), std::move(tuples));
    const auto parts = split_fixed(rel, 1 + rng() % 40);
    std::vector<Tid> all;
    std::size_t lo = n, hi = 0;
    for (const auto& p : parts) {
      EXPECT_FALSE(p.tuple_refs.empty());
      EXPECT_FALSE(p.branch_id.has_value());
      lo = std::min(lo, p.tuple_refs.size());
      hi = std::max(hi, p.tuple_refs.size());
      all.insert(all.end(), p.tuple_refs.begin(), p.tuple_refs.end());
    }
    EXPECT_LE(hi - lo, 1u);
    std::sort(all.begin(), all.end());
    std::vector<Tid> want(n);
    std::iota(want.begin(), want.end(), 0);
    EXPECT_EQ(all, want);
  }
}

TEST(Relation, NonDenseTidsRejected) {
  std::vector<TupleRecord> tuples{{1, std::nullopt, {AttrValue::text("a")}}};
  EXPECT_THROW(Relation(Schema({{"x", AttrKind::kShortText}}), std::move(tuples)), SchemaError);
  EXPECT_THROW(AttrValue::number(std::numeric_limits<double>::infinity()), ConfigError);
}

}  // namespace
}  // namespace mdblock
