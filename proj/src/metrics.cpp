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

#include "mdblock/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <unordered_map>

#include "mdblock/csv.hpp"
#include "mdblock/error.hpp"
#include "mdblock/similarity.hpp"
#include "mdblock/text.hpp"

namespace mdblock {

void GroundTruth::add(Tid a, Tid b, std::size_t n) {
  if (a >= n || b >= n) throw ValidationError("ground-truth pair references unknown tuple");
  if (a == b) throw ValidationError("ground-truth pair pairs a tuple with itself");
  pairs.insert(pair_key(a, b));
}

GroundTruth ground_truth_from_eid(const Relation& relation, const std::optional<std::string>& column) {
  std::optional<std::size_t> attr;
  if (column) {
    attr = relation.schema().index_of(*column);
    if (!attr) throw ValidationError("ground-truth column '" + *column + "' is not in the schema");
  }
  std::map<std::string, std::vector<Tid>> groups;
  for (const auto& t : relation.tuples()) {
    std::optional<std::string> eid;
    if (attr) {
      if (!t.values[*attr].is_missing()) eid = std::string(text::trim(t.values[*attr].str()));
    } else {
      eid = t.eid;
    }
    if (eid) groups[*eid].push_back(t.tid);
  }
  if (!attr && !relation.schema().eid_attr()) throw ValidationError("relation has no entity-id column");
  GroundTruth gt;
  for (const auto& [_, tids] : groups) {
    for (std::size_t i = 0; i < tids.size(); ++i) {
      for (std::size_t j = i + 1; j < tids.size(); ++j) gt.add(tids[i], tids[j], relation.size());
    }
  }
  return gt;
}

GroundTruth load_ground_truth(const std::string& path, const Relation& relation,
                              const std::optional<std::string>& key_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open ground truth '" + path + "'");
  std::unordered_map<std::string, Tid> lookup;
  if (key_column) {
    const auto attr = relation.schema().index_of(*key_column);
    if (!attr) throw ValidationError("ground-truth key column '" + *key_column + "' is not in the schema");
    for (const auto& t : relation.tuples()) {
      if (t.values[*attr].is_missing()) continue;
      const std::string key(text::trim(t.values[*attr].str()));
      if (!lookup.emplace(key, t.tid).second) {
        throw ValidationError("ground-truth key '" + key + "' is not unique in column '" + *key_column + "'");
      }
    }
  }
  auto resolve = [&](const std::string& cell, std::size_t line) -> Tid {
    const std::string key(text::trim(cell));
    if (key_column) {
      auto it = lookup.find(key);
      if (it == lookup.end()) throw ValidationError("line " + std::to_string(line) + ": unknown key '" + key + "'");
      return it->second;
    }
    const auto v = text::parse_number(key);
    if (!v || *v < 0 || *v != static_cast<double>(static_cast<Tid>(*v))) {
      throw ParseError("line " + std::to_string(line) + ": '" + key + "' is not a tuple id");
    }
    return static_cast<Tid>(*v);
  };
  CsvReader reader(in);
  CsvRecord rec;
  if (!reader.next(rec)) throw ParseError("ground truth '" + path + "' has no header");
  GroundTruth gt;
  while (reader.next(rec)) {
    if (rec.fields.size() < 2) throw ParseError("line " + std::to_string(rec.line) + ": expected two columns");
    gt.add(resolve(rec.fields[0], rec.line), resolve(rec.fields[1], rec.line), relation.size());
  }
  return gt;
}

MetricsReport compute_metrics(std::span<const CandidatePair> candidates, const GroundTruth& truth,
                              std::size_t universe_size) {
  std::unordered_set<std::uint64_t> ca;
  ca.reserve(candidates.size());
  for (const auto& p : candidates) {
    if (p.t != p.s) ca.insert(pair_key(p.t, p.s));
  }
  MetricsReport r;
  r.candidates = ca.size();
  r.ground_truth = truth.size();
  for (auto k : ca) r.true_positives += truth.pairs.contains(k);
  if (ca.empty()) {
    r.precision = truth.pairs.empty() ? 1.0 : 0.0;
  } else {
    r.precision = static_cast<double>(r.true_positives) / static_cast<double>(ca.size());
  }
  r.recall = truth.pairs.empty() ? 1.0
                                 : static_cast<double>(r.true_positives) / static_cast<double>(truth.size());
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  const double n = static_cast<double>(universe_size);
  r.cssr = universe_size ? static_cast<double>(ca.size()) / (n * n) : 0.0;
  return r;
}

void write_candidates_csv(std::ostream& out, std::span<const CandidatePair> pairs,
                          const std::vector<std::string>& rule_ids) {
  write_csv_row(out, {"t_tid", "s_tid", "witness_rule_id"});
  for (const auto& p : pairs) {
    write_csv_row(out, {std::to_string(p.t), std::to_string(p.s), rule_ids.at(p.rule)});
  }
}

std::vector<CandidatePair> read_candidates_csv(std::istream& in, const std::vector<std::string>& rule_ids) {
  CsvReader reader(in);
  CsvRecord rec;
  if (!reader.next(rec)) throw ParseError("candidate file has no header");
  std::vector<CandidatePair> out;
  while (reader.next(rec)) {
    if (rec.fields.size() != 3) throw ParseError("line " + std::to_string(rec.line) + ": expected 3 fields");
    const auto t = text::parse_number(rec.fields[0]);
    const auto s = text::parse_number(rec.fields[1]);
    const auto it = std::find(rule_ids.begin(), rule_ids.end(), rec.fields[2]);
    if (!t || !s || it == rule_ids.end()) throw ParseError("line " + std::to_string(rec.line) + ": bad candidate row");
    out.push_back({static_cast<Tid>(*t), static_cast<Tid>(*s), static_cast<std::uint32_t>(it - rule_ids.begin())});
  }
  return out;
}

std::vector<CandidatePair> brute_force_candidates(const Relation& relation, const RuleSet& rs,
                                                  const MeasureRegistry& registry, bool symmetric,
                                                  std::span<const Tid> subset) {
  std::vector<std::vector<BoundPredicate>> rules;
  for (const auto& r : rs.rules) {
    std::vector<BoundPredicate> bound;
    for (const auto& p : r.precondition) bound.push_back(bind_predicate(p, relation.schema(), registry));
    rules.push_back(std::move(bound));
  }
  std::vector<Tid> all;
  if (subset.empty()) {
    all.resize(relation.size());
    for (Tid t = 0; t < relation.size(); ++t) all[t] = t;
    subset = all;
  }
  auto witness = [&](Tid t, Tid s) -> std::optional<std::uint32_t> {
    for (std::size_t r = 0; r < rules.size(); ++r) {
      bool ok = true;
      for (const auto& b : rules[r]) {
        if (!eval_predicate(b, relation[t], relation[s])) {
          ok = false;
          break;
        }
      }
      if (ok) return static_cast<std::uint32_t>(r);
    }
    return std::nullopt;
  };
  std::vector<CandidatePair> out;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    for (std::size_t j = 0; j < subset.size(); ++j) {
      if (i == j) continue;
      Tid t = subset[i];
      Tid s = subset[j];
      if (symmetric) {
        if (t > s) continue;
      }
      if (const auto r = witness(t, s)) out.push_back({t, s, *r});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace mdblock
