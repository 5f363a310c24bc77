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

#include "mdblock/synth.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <string_view>
#include <utility>

namespace mdblock::synth {
namespace {

using Rng = std::mt19937_64;

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::string make_word(Rng& rng, std::size_t syllables) {
  static constexpr const char* kSyl[] = {"ka", "lo", "mi", "ne", "ru", "sa", "ti", "vo", "ze", "pa",
                                         "qu", "ber", "don", "fle", "gri", "hax", "jor", "mun"};
  std::string w;
  for (std::size_t i = 0; i < syllables; ++i) w += kSyl[uniform(rng, 0, std::size(kSyl) - 1)];
  return w;
}

std::vector<std::string> make_vocab(Rng& rng, std::size_t size) {
  std::vector<std::string> words;
  while (words.size() < size) {
    auto w = make_word(rng, uniform(rng, 2, 3));
    if (std::find(words.begin(), words.end(), w) == words.end()) words.push_back(std::move(w));
  }
  return words;
}

std::string pick_words(Rng& rng, const std::vector<std::string>& vocab, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    if (i) out += ' ';
    out += vocab[uniform(rng, 0, vocab.size() - 1)];
  }
  return out;
}

std::string typo(Rng& rng, std::string s) {
  if (s.empty()) return s;
  const auto pos = uniform(rng, 0, s.size() - 1);
  switch (uniform(rng, 0, 2)) {
    case 0:
      s.erase(pos, 1);
      break;
    case 1:
      s.insert(pos, 1, static_cast<char>('a' + uniform(rng, 0, 25)));
      break;
    default:
      s[pos] = static_cast<char>('a' + uniform(rng, 0, 25));
  }
  return s;
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

// Drops or replaces a few tokens.
std::string perturb_tokens(Rng& rng, const std::string& s, const std::vector<std::string>& vocab) {
  auto words = split_words(s);
  const auto edits = uniform(rng, 0, 3);
  for (std::size_t e = 0; e < edits && !words.empty(); ++e) {
    const auto pos = uniform(rng, 0, words.size() - 1);
    if (chance(rng, 0.5) && words.size() > 1) {
      words.erase(words.begin() + static_cast<std::ptrdiff_t>(pos));
    } else {
      words[pos] = vocab[uniform(rng, 0, vocab.size() - 1)];
    }
  }
  return join_words(words);
}

Predicate eq(std::string attr) {
  Predicate p;
  p.lhs_attr = attr;
  p.rhs_attr = std::move(attr);
  p.op = Comparator::kEq;
  return p;
}

Predicate sim(std::string lhs, std::string rhs, std::string measure, double threshold) {
  Predicate p;
  p.lhs_attr = std::move(lhs);
  p.rhs_attr = std::move(rhs);
  p.op = Comparator::kSim;
  p.measure = std::move(measure);
  p.threshold = threshold;
  return p;
}

Predicate sim(const std::string& attr, std::string measure, double threshold) {
  return sim(attr, attr, std::move(measure), threshold);
}

Predicate constant(std::string attr, AttrValue value) {
  Predicate p;
  p.lhs_attr = std::move(attr);
  p.constant = std::move(value);
  p.op = Comparator::kEq;
  return p;
}

AttrValue text_or_missing(Rng& rng, std::string s, double p_missing) {
  if (chance(rng, p_missing)) return AttrValue::missing();
  return AttrValue::text(std::move(s));
}

std::string rule_id(std::size_t i) { return "r" + std::to_string(i + 1); }

}  // namespace

Instance random_instance(std::uint64_t seed, std::size_t max_tuples, std::size_t max_rules) {
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + 1);
  const auto words = make_vocab(rng, 120);
  const auto brands = make_vocab(rng, 8);
  const auto cities = make_vocab(rng, 12);

  const std::size_t n = uniform(rng, std::min<std::size_t>(50, max_tuples), std::max<std::size_t>(max_tuples, 2));
  const std::size_t entities = std::max<std::size_t>(1, n / uniform(rng, 2, 5));

  struct Base {
    std::string name, brand, city, desc;
    double price;
  };
  std::vector<Base> bases;
  for (std::size_t e = 0; e < entities; ++e) {
    bases.push_back({pick_words(rng, words, uniform(rng, 1, 3)), brands[uniform(rng, 0, brands.size() - 1)],
                     cities[uniform(rng, 0, cities.size() - 1)], pick_words(rng, words, uniform(rng, 6, 16)),
                     static_cast<double>(uniform(rng, 10, 60))});
  }

  Schema schema({{"eid", AttrKind::kCategorical},
                 {"name", AttrKind::kShortText},
                 {"brand", AttrKind::kCategorical},
                 {"price", AttrKind::kNumeric},
                 {"city", AttrKind::kShortText},
                 {"desc", AttrKind::kLongText}},
                "eid");
  std::vector<TupleRecord> tuples;
  constexpr double kMissing = 0.05;
  for (std::size_t i = 0; i < n; ++i) {
    const auto e = uniform(rng, 0, entities - 1);
    const auto& b = bases[e];
    TupleRecord t;
    t.tid = static_cast<Tid>(i);
    t.eid = "e" + std::to_string(e);
    t.values.push_back(AttrValue::text(*t.eid));
    t.values.push_back(text_or_missing(rng, chance(rng, 0.3) ? typo(rng, b.name) : b.name, kMissing));
    t.values.push_back(text_or_missing(
        rng, chance(rng, 0.9) ? b.brand : brands[uniform(rng, 0, brands.size() - 1)], kMissing));
    if (chance(rng, kMissing)) {
      t.values.push_back(AttrValue::missing());
    } else {
      const double price = chance(rng, 0.8) ? b.price : b.price + static_cast<double>(uniform(rng, 1, 3));
      t.values.push_back(AttrValue::number(price));
    }
    t.values.push_back(text_or_missing(
        rng, chance(rng, 0.1) ? (chance(rng, 0.5) ? typo(rng, b.city) : b.city + " " + b.brand) : b.city,
        kMissing));
    t.values.push_back(text_or_missing(rng, perturb_tokens(rng, b.desc, words), kMissing));
    tuples.push_back(std::move(t));
  }
  Relation relation(std::move(schema), std::move(tuples));

  static constexpr double kEdit[] = {0.6, 0.7, 0.8, 0.9};
  static constexpr double kJac[] = {0.3, 0.4, 0.5, 0.6, 0.7};
  auto draw = [&]() -> Predicate {
    switch (uniform(rng, 0, 11)) {
      case 0:
        return eq("name");
      case 1:
        return sim("name", "edit", kEdit[uniform(rng, 0, 3)]);
      case 2:
        return sim("name", "jaccard", kJac[uniform(rng, 0, 4)]);
      case 3:
        return eq("brand");
      case 4:
        return eq("price");
      case 5:
        return sim("desc", "jaccard", kJac[uniform(rng, 0, 4)]);
      case 6:
        return sim("desc", "exact_token", kJac[uniform(rng, 0, 4)]);
      case 7:
        return eq("city");
      case 8:
        return constant("brand", AttrValue::text(brands[uniform(rng, 0, brands.size() - 1)]));
      case 9:
        return sim("city", "name", "jaccard", 0.3);
      case 10:
        return sim("city", "edit", kEdit[uniform(rng, 0, 3)]);
      default:
        return constant("price", AttrValue::number(bases[uniform(rng, 0, entities - 1)].price));
    }
  };

  RuleSet rs;
  const std::size_t n_rules = uniform(rng, 1, std::max<std::size_t>(max_rules, 1));
  for (std::size_t r = 0; r < n_rules; ++r) {
    MDRule rule;
    rule.id = rule_id(r);
    const std::size_t len = uniform(rng, 1, 3);
    while (rule.precondition.size() < len) {
      auto p = draw();
      if (std::find(rule.precondition.begin(), rule.precondition.end(), p) == rule.precondition.end()) {
        rule.precondition.push_back(std::move(p));
      }
    }
    rs.rules.push_back(std::move(rule));
  }
  return {std::move(relation), std::move(rs)};
}

Instance skewed_text_instance(std::size_t n, std::size_t interval_size, std::size_t blocks,
                              std::size_t heavy_intervals, std::uint64_t seed) {
  Rng rng(seed + 0x51);
  const auto words = make_vocab(rng, 40);
  const std::string base = pick_words(rng, words, 24);
  Schema schema({{"text", AttrKind::kLongText}});
  std::vector<TupleRecord> tuples;
  tuples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t interval = i / interval_size;
    const bool heavy = interval % blocks == 0 && interval / blocks < heavy_intervals;
    std::string text;
    if (heavy) {
      text = base;
      for (int k = 0; k < 3; ++k) text = typo(rng, std::move(text));
    } else {
      static constexpr std::string_view kSymbols = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
      text = {kSymbols[uniform(rng, 0, kSymbols.size() - 1)], kSymbols[uniform(rng, 0, kSymbols.size() - 1)]};
    }
    tuples.push_back({static_cast<Tid>(i), std::nullopt, {AttrValue::text(std::move(text))}});
  }
  RuleSet rs;
  rs.rules.push_back({"long_text", {sim("text", "edit", 0.8)}});
  return {Relation(std::move(schema), std::move(tuples)), std::move(rs)};
}

Instance ordering_instance(std::size_t n, std::size_t rules, std::uint64_t seed) {
  Rng rng(seed + 0x77);
  const auto words = make_vocab(rng, 60);
  std::vector<Attribute> attrs;
  for (std::size_t r = 0; r < rules; ++r) {
    attrs.push_back({"code" + std::to_string(r), AttrKind::kShortText});
    attrs.push_back({"body" + std::to_string(r), AttrKind::kLongText});
  }
  std::vector<std::string> bodies;
  for (std::size_t r = 0; r < rules; ++r) bodies.push_back(pick_words(rng, words, 12));

  std::vector<TupleRecord> tuples;
  for (std::size_t i = 0; i < n; ++i) {
    TupleRecord t;
    t.tid = static_cast<Tid>(i);
    for (std::size_t r = 0; r < rules; ++r) {
      // About two tuples per code.
      t.values.push_back(AttrValue::text("c" + std::to_string(uniform(rng, 0, n / 2))));
      std::string body = bodies[r];
      for (int k = 0; k < 2; ++k) body = typo(rng, std::move(body));
      t.values.push_back(AttrValue::text(std::move(body)));
    }
    tuples.push_back(std::move(t));
  }
  RuleSet rs;
  for (std::size_t r = 0; r < rules; ++r) {
    const auto suffix = std::to_string(r);
    rs.rules.push_back({rule_id(r), {sim("body" + suffix, "edit", 0.7), eq("code" + suffix)}});
  }
  return {Relation(Schema(std::move(attrs)), std::move(tuples)), std::move(rs)};
}

Instance cost_universe(std::uint64_t seed, std::size_t n) {
  Rng rng(seed * 7919 + 3);
  const auto words = make_vocab(rng, 200);
  // Lengths vary per seed so every universe ranks differently.
  const std::size_t short_len = uniform(rng, 4, 12);
  const std::size_t mid_len = uniform(rng, 30, 60);
  const std::size_t long_len = uniform(rng, 120, 260);
  const std::size_t few_tokens = uniform(rng, 2, 5);
  const std::size_t some_tokens = uniform(rng, 15, 30);
  const std::size_t many_tokens = uniform(rng, 80, 160);

  Schema schema({{"num", AttrKind::kNumeric},
                 {"cat", AttrKind::kCategorical},
                 {"s_short", AttrKind::kShortText},
                 {"s_mid", AttrKind::kShortText},
                 {"s_long", AttrKind::kLongText},
                 {"t_few", AttrKind::kShortText},
                 {"t_some", AttrKind::kLongText},
                 {"t_many", AttrKind::kLongText}});
  auto chars = [&](std::size_t len) {
    std::string s;
    while (s.size() < len) s += words[uniform(rng, 0, 19)];
    s.resize(len);
    return s;
  };
  std::vector<TupleRecord> tuples;
  for (std::size_t i = 0; i < n; ++i) {
    TupleRecord t;
    t.tid = static_cast<Tid>(i);
    t.values = {AttrValue::number(static_cast<double>(uniform(rng, 0, 50))),
                AttrValue::text("k" + std::to_string(uniform(rng, 0, 9))),
                AttrValue::text(chars(short_len)),
                AttrValue::text(chars(mid_len)),
                AttrValue::text(chars(long_len)),
                AttrValue::text(pick_words(rng, words, few_tokens)),
                AttrValue::text(pick_words(rng, words, some_tokens)),
                AttrValue::text(pick_words(rng, words, many_tokens))};
    tuples.push_back(std::move(t));
  }
  const std::vector<Predicate> preds{eq("num"),
                                     eq("cat"),
                                     sim("s_short", "edit", 0.5),
                                     sim("s_mid", "edit", 0.5),
                                     sim("s_long", "edit", 0.5),
                                     sim("t_few", "jaccard", 0.5),
                                     sim("t_some", "jaccard", 0.5),
                                     sim("t_many", "jaccard", 0.5),
                                     sim("t_many", "exact_token", 0.5),
                                     eq("s_long")};
  RuleSet rs;
  for (std::size_t i = 0; i < preds.size(); ++i) rs.rules.push_back({rule_id(i), {preds[i]}});
  return {Relation(std::move(schema), std::move(tuples)), std::move(rs)};
}

Instance grouped_instance(std::size_t n, std::size_t group_size, std::uint64_t seed) {
  Rng rng(seed + 0x33);
  const auto words = make_vocab(rng, 150);
  const std::size_t groups = std::max<std::size_t>(1, n / std::max<std::size_t>(group_size, 1));
  std::vector<std::string> names;
  std::vector<std::string> descs;
  for (std::size_t g = 0; g < groups; ++g) {
    names.push_back(pick_words(rng, words, 3));
    descs.push_back(pick_words(rng, words, 12));
  }
  Schema schema({{"group", AttrKind::kCategorical},
                 {"name", AttrKind::kShortText},
                 {"desc", AttrKind::kLongText}});
  std::vector<TupleRecord> tuples;
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = uniform(rng, 0, groups - 1);
    TupleRecord t;
    t.tid = static_cast<Tid>(i);
    t.values = {AttrValue::text("g" + std::to_string(g)),
                AttrValue::text(chance(rng, 0.5) ? typo(rng, names[g]) : pick_words(rng, words, 3)),
                AttrValue::text(perturb_tokens(rng, descs[g], words))};
    tuples.push_back(std::move(t));
  }
  RuleSet rs;
  rs.rules.push_back({"name", {eq("group"), sim("name", "edit", 0.8)}});
  rs.rules.push_back({"desc", {eq("group"), sim("desc", "jaccard", 0.6)}});
  return {Relation(std::move(schema), std::move(tuples)), std::move(rs)};
}

Instance wide_ruleset(std::size_t num_rules, std::size_t num_predicates, std::uint64_t seed, std::size_t size) {
  Rng rng(seed + 0x99);
  const auto words = make_vocab(rng, 50);
  constexpr std::size_t kAttrs = 20;
  std::vector<Attribute> attrs;
  for (std::size_t a = 0; a < kAttrs; ++a) attrs.push_back({"a" + std::to_string(a), AttrKind::kShortText});
  std::vector<TupleRecord> tuples;
  for (std::size_t i = 0; i < size; ++i) {
    TupleRecord t;
    t.tid = static_cast<Tid>(i);
    for (std::size_t a = 0; a < kAttrs; ++a) t.values.push_back(AttrValue::text(pick_words(rng, words, 2)));
    tuples.push_back(std::move(t));
  }

  std::vector<Predicate> pool;
  static constexpr const char* kMeasures[] = {"edit", "jaccard", "exact_token"};
  for (std::size_t i = 0; pool.size() < num_predicates; ++i) {
    const auto attr = "a" + std::to_string(i % kAttrs);
    const auto variant = i / kAttrs;
    if (variant == 0) {
      pool.push_back(eq(attr));
    } else {
      pool.push_back(sim(attr, kMeasures[variant % 3], 0.3 + 0.1 * static_cast<double>(variant % 7)));
    }
  }
  std::shuffle(pool.begin(), pool.end(), rng);

  RuleSet rs;
  std::size_t next = 0;  // guarantees every pool entry is used
  for (std::size_t r = 0; r < num_rules; ++r) {
    MDRule rule;
    rule.id = rule_id(r);
    const auto len = uniform(rng, 2, 4);
    while (rule.precondition.size() < len) {
      const Predicate& p = next < pool.size() ? pool[next++] : pool[uniform(rng, 0, pool.size() - 1)];
      if (std::find(rule.precondition.begin(), rule.precondition.end(), p) == rule.precondition.end()) {
        rule.precondition.push_back(p);
      }
    }
    rs.rules.push_back(std::move(rule));
  }
  return {Relation(Schema(std::move(attrs)), std::move(tuples)), std::move(rs)};
}

}  // namespace mdblock::synth
