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

#include "mdblock/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "mdblock/error.hpp"
#include "mdblock/text.hpp"

namespace mdblock {

namespace {

std::vector<std::string> token_set(std::string_view s, bool fold_case) {
  auto tokens = text::tokenize(s, fold_case);
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

std::size_t sorted_intersection(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace

Measure builtin_measure(MeasureKind kind, bool fold_case) {
  Measure m;
  m.kind = kind;
  m.fold_case = fold_case;
  m.symmetric = true;
  switch (kind) {
    case MeasureKind::kEdit:
      m.scorer = [fold_case](const AttrValue& a, const AttrValue& b) {
        return edit_score(a.str(), b.str(), fold_case);
      };
      break;
    case MeasureKind::kJaccard:
      m.scorer = [fold_case](const AttrValue& a, const AttrValue& b) {
        return jaccard_score(a.str(), b.str(), fold_case);
      };
      break;
    case MeasureKind::kExactToken:
      m.scorer = [fold_case](const AttrValue& a, const AttrValue& b) {
        return exact_token_score(a.str(), b.str(), fold_case);
      };
      break;
    case MeasureKind::kCustom:
      throw ConfigError("custom measures need an explicit scorer");
  }
  return m;
}

MeasureRegistry::MeasureRegistry() {
  entries_.emplace("edit", builtin_measure(MeasureKind::kEdit));
  entries_.emplace("jaccard", builtin_measure(MeasureKind::kJaccard));
  entries_.emplace("exact_token", builtin_measure(MeasureKind::kExactToken));
}

const MeasureRegistry& MeasureRegistry::defaults() {
  static const MeasureRegistry kDefaults;
  return kDefaults;
}

void MeasureRegistry::add(std::string id, Measure measure) {
  if (!measure.scorer) throw ConfigError("measure '" + id + "' has no scorer");
  if (entries_.contains(id)) throw ConfigError("measure '" + id + "' is already registered");
  entries_.emplace(std::move(id), std::move(measure));
}

void MeasureRegistry::set_fold_case(std::string_view id, bool fold_case) {
  auto it = entries_.find(id);
  if (it == entries_.end()) throw ConfigError("unregistered measure '" + std::string(id) + "'");
  if (it->second.kind == MeasureKind::kCustom) {
    throw ConfigError("case folding of custom measure '" + std::string(id) + "' is fixed by its scorer");
  }
  it->second = builtin_measure(it->second.kind, fold_case);
}

const Measure* MeasureRegistry::find(std::string_view id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

const Measure& MeasureRegistry::at(std::string_view id) const {
  const auto* m = find(id);
  if (!m) throw ConfigError("unregistered measure '" + std::string(id) + "'");
  return *m;
}

bool eval_equality(const AttrValue& a, const AttrValue& b) {
  if (a.is_missing() || b.is_missing()) return false;
  if (a.is_number() && b.is_number()) return a.number_value() == b.number_value();
  if (a.is_number() || b.is_number()) {
    const auto& num = a.is_number() ? a : b;
    const auto& other = a.is_number() ? b : a;
    const auto parsed = text::parse_number(other.str());
    return parsed && *parsed == num.number_value();
  }
  return text::trim(a.str()) == text::trim(b.str());
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double edit_score(std::string_view a, std::string_view b, bool fold_case) {
  std::string fa;
  std::string fb;
  if (fold_case) {
    fa = text::fold(a);
    fb = text::fold(b);
    a = fa;
    b = fb;
  }
  const std::size_t m = std::max(a.size(), b.size());
  if (m == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(m);
}

double jaccard_score(std::string_view a, std::string_view b, bool fold_case) {
  const auto ta = token_set(a, fold_case);
  const auto tb = token_set(b, fold_case);
  if (ta.empty() && tb.empty()) return 0.0;
  const auto inter = sorted_intersection(ta, tb);
  return static_cast<double>(inter) / static_cast<double>(ta.size() + tb.size() - inter);
}

double exact_token_score(std::string_view a, std::string_view b, bool fold_case) {
  const auto ta = token_set(a, fold_case);
  if (ta.empty()) return 0.0;
  return ta == token_set(b, fold_case) ? 1.0 : 0.0;
}

std::optional<std::size_t> max_edit_distance(std::size_t max_len, double threshold) {
  if (max_len == 0) return threshold <= 1.0 ? std::optional<std::size_t>(0) : std::nullopt;
  const double m = static_cast<double>(max_len);
  auto ok = [&](std::size_t d) { return 1.0 - static_cast<double>(d) / m >= threshold; };
  auto d = static_cast<std::size_t>(std::clamp(std::floor((1.0 - threshold) * m), 0.0, m));
  while (d < max_len && ok(d + 1)) ++d;
  while (d > 0 && !ok(d)) --d;
  if (!ok(d)) return std::nullopt;
  return d;
}

bool edit_at_least(std::string_view a, std::string_view b, double threshold) {
  const std::size_t m = std::max(a.size(), b.size());
  const auto limit = max_edit_distance(m, threshold);
  if (!limit) return false;
  const std::size_t k = *limit;
  if (a.size() < b.size()) std::swap(a, b);
  const std::size_t la = a.size();
  const std::size_t lb = b.size();
  if (la - lb > k) return false;
  if (k >= la) return true;  // distance never exceeds the longer length

  // Band of width 2k+1 around the diagonal; cells outside hold k+1.
  const std::size_t big = k + 1;
  std::vector<std::size_t> prev(lb + 1, big);
  std::vector<std::size_t> cur(lb + 1, big);
  for (std::size_t j = 0; j <= std::min(lb, k); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= la; ++i) {
    const std::size_t lo = i > k ? i - k : 0;
    const std::size_t hi = std::min(lb, i + k);
    if (lo > lb) return false;
    std::fill(cur.begin(), cur.end(), big);
    std::size_t row_min = big;
    if (lo == 0) {
      cur[0] = i <= k ? i : big;
      row_min = cur[0];
    }
    for (std::size_t j = std::max<std::size_t>(lo, 1); j <= hi; ++j) {
      std::size_t v = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      v = std::min(v, prev[j] + 1);
      v = std::min(v, cur[j - 1] + 1);
      cur[j] = std::min(v, big);
      row_min = std::min(row_min, cur[j]);
    }
    if (row_min > k) return false;
    std::swap(prev, cur);
  }
  return prev[lb] <= k;
}

bool BoundPredicate::asymmetric() const {
  if (predicate.is_const() || predicate.cross_attribute()) return true;
  return measure != nullptr && !measure->symmetric;
}

BoundPredicate bind_predicate(const Predicate& p, const Schema& schema,
                              const MeasureRegistry& registry) {
  BoundPredicate b;
  b.predicate = p;
  const auto lhs = schema.index_of(p.lhs_attr);
  if (!lhs) throw ValidationError("unknown attribute: '" + p.lhs_attr + "'");
  b.lhs_index = *lhs;
  if (p.rhs_attr) {
    const auto rhs = schema.index_of(*p.rhs_attr);
    if (!rhs) throw ValidationError("unknown attribute: '" + *p.rhs_attr + "'");
    b.rhs_index = *rhs;
  }
  if (p.op == Comparator::kSim) b.measure = &registry.at(p.measure);
  return b;
}

bool eval_predicate(const BoundPredicate& p, const TupleRecord& t, const TupleRecord& s) {
  const auto& a = p.lhs(t);
  const auto& b = p.rhs(s);
  if (a.is_missing() || b.is_missing()) return false;
  if (p.predicate.op == Comparator::kEq) return eval_equality(a, b);
  return p.measure->scorer(a, b) >= p.predicate.threshold;
}

bool eval_predicate(const Predicate& p, const Schema& schema, const TupleRecord& t,
                    const TupleRecord& s, const MeasureRegistry& registry) {
  return eval_predicate(bind_predicate(p, schema, registry), t, s);
}

}  // namespace mdblock
