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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mdblock/relation.hpp"

namespace mdblock {

class MeasureRegistry;

enum class Comparator { kEq, kSim };

// t.A = c, t.A = s.B or t.A ~ s.B. A predicate with no rhs_attr compares
// against the constant.
struct Predicate {
  std::string lhs_attr;
  std::optional<std::string> rhs_attr;
  AttrValue constant;
  Comparator op = Comparator::kEq;
  std::string measure;  // empty for kEq
  double threshold = 0.0;

  bool is_const() const { return !rhs_attr.has_value(); }
  bool cross_attribute() const { return rhs_attr && *rhs_attr != lhs_attr; }
  bool operator==(const Predicate&) const = default;
};

std::string to_string(const Predicate& p);

struct MDRule {
  std::string id;
  std::vector<Predicate> precondition;
};

struct RuleSet {
  std::vector<MDRule> rules;

  std::size_t size() const { return rules.size(); }
  std::optional<std::size_t> index_of(std::string_view id) const;
};

/// Parses the JSON rule document described in docs/rule_format.md.
/// Throws ParseError for malformed input and ValidationError for
/// semantic problems (unknown measure, bad threshold, empty rule set...).
RuleSet parse_ruleset(std::string_view document);
RuleSet parse_ruleset(std::string_view document, const MeasureRegistry& registry);
RuleSet load_ruleset(const std::string& path, const MeasureRegistry& registry);

std::string serialize_ruleset(const RuleSet& rs);

/// Throws ValidationError naming every attribute missing from the schema;
/// returns non-fatal warnings otherwise.
std::vector<std::string> validate_ruleset(const RuleSet& rs, const Schema& schema);

/// Distinct predicates in order of first appearance.
std::vector<Predicate> predicate_universe(const RuleSet& rs);

}  // namespace mdblock
