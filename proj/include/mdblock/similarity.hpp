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

#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "mdblock/relation.hpp"
#include "mdblock/rules.hpp"

namespace mdblock {

enum class MeasureKind { kEdit, kJaccard, kExactToken, kCustom };

struct Measure {
  using Scorer = std::function<double(const AttrValue&, const AttrValue&)>;

  MeasureKind kind = MeasureKind::kCustom;
  Scorer scorer;
  bool symmetric = true;
  bool fold_case = true;
};

Measure builtin_measure(MeasureKind kind, bool fold_case = true);

class MeasureRegistry {
 public:
  /// Starts with "edit", "jaccard" and "exact_token".
  MeasureRegistry();

  static const MeasureRegistry& defaults();

  /// Throws ConfigError if the id is taken or the scorer is empty.
  void add(std::string id, Measure measure);
  /// Rebuilds a built-in with a different case-folding flag.
  void set_fold_case(std::string_view id, bool fold_case);

  bool contains(std::string_view id) const { return find(id) != nullptr; }
  const Measure* find(std::string_view id) const;
  /// Throws ConfigError for an unregistered id.
  const Measure& at(std::string_view id) const;

 private:
  std::map<std::string, Measure, std::less<>> entries_;
};

bool eval_equality(const AttrValue& a, const AttrValue& b);

std::size_t levenshtein(std::string_view a, std::string_view b);

double edit_score(std::string_view a, std::string_view b, bool fold_case = true);
double jaccard_score(std::string_view a, std::string_view b, bool fold_case = true);
double exact_token_score(std::string_view a, std::string_view b, bool fold_case = true);

/// Largest edit distance d with 1 - d/max_len >= threshold, computed with the
/// same floating-point expression edit_score uses.
std::optional<std::size_t> max_edit_distance(std::size_t max_len, double threshold);

/// Same decision as edit_score(a, b, false) >= threshold, on already folded
/// input, with a banded early-exit distance computation.
bool edit_at_least(std::string_view a, std::string_view b, double threshold);

/// A predicate resolved against a schema and registry.
struct BoundPredicate {
  Predicate predicate;
  std::size_t lhs_index = 0;
  std::optional<std::size_t> rhs_index;
  const Measure* measure = nullptr;  // null for equality

  /// True when p(t, s) and p(s, t) can differ.
  bool asymmetric() const;
  const AttrValue& lhs(const TupleRecord& t) const { return t.values[lhs_index]; }
  const AttrValue& rhs(const TupleRecord& s) const {
    return rhs_index ? s.values[*rhs_index] : predicate.constant;
  }
};

/// Throws ValidationError for unknown attributes and ConfigError for an
/// unregistered measure.
BoundPredicate bind_predicate(const Predicate& p, const Schema& schema,
                              const MeasureRegistry& registry);

bool eval_predicate(const BoundPredicate& p, const TupleRecord& t, const TupleRecord& s);
bool eval_predicate(const Predicate& p, const Schema& schema, const TupleRecord& t,
                    const TupleRecord& s, const MeasureRegistry& registry);

}  // namespace mdblock
