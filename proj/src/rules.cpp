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

#include "mdblock/rules.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mdblock/error.hpp"
#include "mdblock/similarity.hpp"
#include "mdblock/text.hpp"

namespace mdblock {

using nlohmann::json;

std::string to_string(const Predicate& p) {
  std::string out = "t." + p.lhs_attr;
  if (p.op == Comparator::kEq) {
    out += " = ";
  } else {
    std::ostringstream th;
    th << p.threshold;
    out += " ~" + p.measure + ">=" + th.str() + " ";
  }
  if (p.rhs_attr) {
    out += "s." + *p.rhs_attr;
  } else if (p.constant.is_number()) {
    out += std::string(p.constant.str());
  } else {
    out += "\"" + std::string(p.constant.str()) + "\"";
  }
  return out;
}

std::optional<std::size_t> RuleSet::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (rules[i].id == id) return i;
  }
  return std::nullopt;
}

namespace {

const std::set<std::string, std::less<>> kPredicateKeys{"t_attr", "op",      "s_attr",
                                                        "const",  "measure", "threshold"};

Predicate parse_predicate(const json& j, const std::string& rule_id,
                          const MeasureRegistry& registry) {
  const std::string where = "rule '" + rule_id + "': ";
  if (!j.is_object()) throw ValidationError(where + "predicate must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!kPredicateKeys.contains(key)) throw ValidationError(where + "unknown field '" + key + "'");
  }
  Predicate p;
  if (!j.contains("t_attr") || !j["t_attr"].is_string()) {
    throw ValidationError(where + "predicate needs a string 't_attr'");
  }
  p.lhs_attr = j["t_attr"].get<std::string>();

  if (!j.contains("op") || !j["op"].is_string()) throw ValidationError(where + "predicate needs 'op'");
  const auto op = j["op"].get<std::string>();
  if (op == "eq") {
    p.op = Comparator::kEq;
  } else if (op == "sim") {
    p.op = Comparator::kSim;
  } else {
    throw ValidationError(where + "unknown op '" + op + "'");
  }

  const bool has_attr = j.contains("s_attr");
  const bool has_const = j.contains("const");
  if (has_attr && has_const) throw ValidationError(where + "'s_attr' and 'const' are exclusive");
  if (has_const) {
    const auto& c = j["const"];
    if (c.is_string()) {
      p.constant = AttrValue::text(c.get<std::string>());
    } else if (c.is_number()) {
      p.constant = AttrValue::number(c.get<double>());
    } else {
      throw ValidationError(where + "'const' must be a string or a number");
    }
  } else if (has_attr) {
    if (!j["s_attr"].is_string()) throw ValidationError(where + "'s_attr' must be a string");
    p.rhs_attr = j["s_attr"].get<std::string>();
  } else {
    p.rhs_attr = p.lhs_attr;
  }

  if (p.op == Comparator::kEq) {
    if (j.contains("measure") || j.contains("threshold")) {
      throw ValidationError(where + "'measure' and 'threshold' only apply to op 'sim'");
    }
    return p;
  }
  if (!j.contains("measure") || !j["measure"].is_string()) {
    throw ValidationError(where + "op 'sim' needs a 'measure'");
  }
  p.measure = j["measure"].get<std::string>();
  if (!registry.contains(p.measure)) throw ValidationError(where + "unknown measure '" + p.measure + "'");
  if (!j.contains("threshold") || !j["threshold"].is_number()) {
    throw ValidationError(where + "op 'sim' needs a numeric 'threshold'");
  }
  p.threshold = j["threshold"].get<double>();
  if (!(p.threshold > 0.0 && p.threshold <= 1.0)) {
    throw ValidationError(where + "threshold out of range (0, 1]");
  }
  return p;
}

}  // namespace

RuleSet parse_ruleset(std::string_view document) {
  return parse_ruleset(document, MeasureRegistry::defaults());
}

RuleSet parse_ruleset(std::string_view document, const MeasureRegistry& registry) {
  if (text::trim(document).empty()) throw ValidationError("empty rule set");
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("rule document: ") + e.what());
  }
  const json* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("rules")) throw ValidationError("rule document object needs a 'rules' list");
    list = &doc["rules"];
  }
  if (!list->is_array()) throw ValidationError("rule document must be a list of rules");
  if (list->empty()) throw ValidationError("empty rule set");

  RuleSet rs;
  std::set<std::string, std::less<>> ids;
  for (const auto& jr : *list) {
    if (!jr.is_object() || !jr.contains("id") || !jr["id"].is_string()) {
      throw ValidationError("every rule needs a string 'id'");
    }
    MDRule rule;
    rule.id = jr["id"].get<std::string>();
    if (!ids.insert(rule.id).second) throw ValidationError("duplicate rule id '" + rule.id + "'");
    for (const auto& [key, _] : jr.items()) {
      if (key != "id" && key != "when") {
        throw ValidationError("rule '" + rule.id + "': unknown field '" + key + "'");
      }
    }
    if (!jr.contains("when") || !jr["when"].is_array() || jr["when"].empty()) {
      throw ValidationError("rule '" + rule.id + "': empty precondition");
    }
    for (const auto& jp : jr["when"]) {
      auto p = parse_predicate(jp, rule.id, registry);
      for (const auto& q : rule.precondition) {
        if (q == p) throw ValidationError("rule '" + rule.id + "': duplicate predicate " + to_string(p));
      }
      rule.precondition.push_back(std::move(p));
    }
    rs.rules.push_back(std::move(rule));
  }
  return rs;
}

RuleSet load_ruleset(const std::string& path, const MeasureRegistry& registry) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open rule file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_ruleset(buf.str(), registry);
}

std::string serialize_ruleset(const RuleSet& rs) {
  json out = json::array();
  for (const auto& r : rs.rules) {
    json when = json::array();
    for (const auto& p : r.precondition) {
      json jp;
      jp["t_attr"] = p.lhs_attr;
      jp["op"] = p.op == Comparator::kEq ? "eq" : "sim";
      if (p.rhs_attr) {
        jp["s_attr"] = *p.rhs_attr;
      } else if (p.constant.is_number()) {
        jp["const"] = p.constant.number_value();
      } else {
        jp["const"] = std::string(p.constant.str());
      }
      if (p.op == Comparator::kSim) {
        jp["measure"] = p.measure;
        jp["threshold"] = p.threshold;
      }
      when.push_back(std::move(jp));
    }
    out.push_back({{"id", r.id}, {"when", std::move(when)}});
  }
  return out.dump(2);
}

std::vector<std::string> validate_ruleset(const RuleSet& rs, const Schema& schema) {
  std::vector<std::string> offenders;
  std::vector<std::string> warnings;
  auto check = [&](const std::string& rule_id, const std::string& attr, const Predicate& p) {
    const auto idx = schema.index_of(attr);
    if (!idx) {
      offenders.push_back("'" + attr + "' (rule '" + rule_id + "')");
      return;
    }
    if (p.op == Comparator::kSim && schema.at(*idx).kind == AttrKind::kNumeric) {
      warnings.push_back("rule '" + rule_id + "': similarity predicate on numeric attribute '" +
                         attr + "'");
    }
  };
  if (rs.rules.empty()) throw ValidationError("empty rule set");
  for (const auto& r : rs.rules) {
    for (const auto& p : r.precondition) {
      check(r.id, p.lhs_attr, p);
      if (p.rhs_attr && *p.rhs_attr != p.lhs_attr) check(r.id, *p.rhs_attr, p);
    }
  }
  if (!offenders.empty()) {
    std::string msg = "unknown attribute";
    msg += offenders.size() > 1 ? "s: " : ": ";
    for (std::size_t i = 0; i < offenders.size(); ++i) msg += (i ? ", " : "") + offenders[i];
    throw ValidationError(msg);
  }
  return warnings;
}

std::vector<Predicate> predicate_universe(const RuleSet& rs) {
  std::vector<Predicate> out;
  for (const auto& r : rs.rules) {
    for (const auto& p : r.precondition) {
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
  }
  return out;
}

}  // namespace mdblock
