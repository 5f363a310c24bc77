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

#include "mdblock/selectivity.hpp"

#include <algorithm>
#include <cmath>

#include "mdblock/error.hpp"
#include "mdblock/minhash.hpp"
#include "mdblock/text.hpp"

namespace mdblock {

double raw_evenness(std::span<const std::size_t> counts) {
  if (counts.empty()) return 0.0;
  double n = 0.0;
  for (auto c : counts) n += static_cast<double>(c);
  const double k = static_cast<double>(counts.size());
  const double mean = n / k;
  double sum = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - mean;
    sum += d * d;
  }
  return std::sqrt(sum / k);
}

double max_raw_evenness(std::size_t n, std::size_t k) {
  if (k == 0) return 0.0;
  return static_cast<double>(n) * std::sqrt(static_cast<double>(k - 1)) / static_cast<double>(k);
}

namespace {

void finish(SelectivityProfile& prof) {
  std::size_t n = 0;
  for (auto c : prof.bucket_counts) n += c;
  prof.raw_evenness = raw_evenness(prof.bucket_counts);
  const double top = max_raw_evenness(n, prof.bucket_counts.size());
  prof.sp = top > 0.0 ? std::clamp(prof.raw_evenness / top, 0.0, 1.0) : 0.0;
}

}  // namespace

SelectivityProfile estimate_selectivity(const BoundPredicate& p, const Relation& relation,
                                        std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("selectivity needs at least 2 buckets");
  if (relation.empty()) throw ConfigError("selectivity of an empty relation");
  SelectivityProfile prof;
  prof.k = k;

  // Constant predicates split tuples into satisfying / not satisfying; the
  // satisfying fraction is the estimate.
  if (p.predicate.is_const()) {
    prof.bucket_counts.assign(2, 0);
    for (const auto& t : relation.tuples()) ++prof.bucket_counts[eval_predicate(p, t, t) ? 0 : 1];
    prof.raw_evenness = raw_evenness(prof.bucket_counts);
    prof.sp = static_cast<double>(prof.bucket_counts[0]) / static_cast<double>(relation.size());
    if (prof.bucket_counts[0] == 0) prof.warning = "no tuple satisfies " + to_string(p.predicate);
    return prof;
  }

  prof.bucket_counts.assign(k, 0);
  std::vector<std::size_t> attrs{p.lhs_index};
  if (p.rhs_index && *p.rhs_index != p.lhs_index) attrs.push_back(*p.rhs_index);

  const MinHasher hasher(1, seed);
  const bool sim = p.predicate.op == Comparator::kSim;
  const MeasureKind kind = sim ? p.measure->kind : MeasureKind::kCustom;
  const bool fold = sim ? p.measure->fold_case : true;
  std::size_t present = 0;
  for (const auto attr : attrs) {
    for (const auto& t : relation.tuples()) {
      const auto& v = t.values[attr];
      std::uint64_t h = 0;
      if (v.is_missing()) {
        // Missing never satisfies a predicate; spread it so it cannot look
        // like a popular value.
        h = text::mix64(seed ^ text::mix64(t.tid) ^ (static_cast<std::uint64_t>(attr) << 40));
      } else if (!sim || kind == MeasureKind::kCustom) {
        h = text::hash64(equality_key(v), seed);
        ++present;
      } else {
        const auto sh = shingles(v.str(), kind, fold);
        h = text::mix64(hasher.signature(sh)[0]);
        ++present;
      }
      ++prof.bucket_counts[h % k];
    }
  }
  if (present == 0) {
    prof.warning = "attribute entirely missing for " + to_string(p.predicate) + "; it can never hold";
    prof.raw_evenness = raw_evenness(prof.bucket_counts);
    prof.sp = 0.0;
    return prof;
  }
  finish(prof);
  return prof;
}

}  // namespace mdblock
