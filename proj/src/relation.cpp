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

#include "mdblock/relation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "mdblock/csv.hpp"
#include "mdblock/error.hpp"
#include "mdblock/text.hpp"

namespace mdblock {

std::string_view to_string(AttrKind kind) {
  switch (kind) {
    case AttrKind::kCategorical:
      return "categorical";
    case AttrKind::kNumeric:
      return "numeric";
    case AttrKind::kShortText:
      return "short_text";
    case AttrKind::kLongText:
      return "long_text";
  }
  return "unknown";
}

std::optional<AttrKind> parse_attr_kind(std::string_view name) {
  if (name == "categorical") return AttrKind::kCategorical;
  if (name == "numeric") return AttrKind::kNumeric;
  if (name == "short_text") return AttrKind::kShortText;
  if (name == "long_text") return AttrKind::kLongText;
  return std::nullopt;
}

Schema::Schema(std::vector<Attribute> attributes, std::optional<std::string> eid_attr)
    : attributes_(std::move(attributes)), eid_attr_(std::move(eid_attr)) {
  std::set<std::string_view> seen;
  for (const auto& a : attributes_) {
    if (!seen.insert(a.name).second) throw SchemaError("duplicate attribute name '" + a.name + "'");
  }
  if (eid_attr_) {
    eid_index_ = index_of(*eid_attr_);
    if (!eid_index_) throw SchemaError("entity-id attribute '" + *eid_attr_ + "' is not in the schema");
  }
}

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == name) return i;
  }
  return std::nullopt;
}

AttrValue AttrValue::text(std::string value) {
  AttrValue v;
  v.v_ = std::move(value);
  return v;
}

AttrValue AttrValue::number(double value, std::string raw) {
  if (!std::isfinite(value)) throw ConfigError("numeric attribute values must be finite");
  AttrValue v;
  v.v_ = Number{value, std::move(raw)};
  return v;
}

AttrValue AttrValue::number(double value) { return number(value, text::canonical_number(value)); }

std::string_view AttrValue::str() const {
  if (const auto* s = std::get_if<std::string>(&v_)) return *s;
  if (const auto* n = std::get_if<Number>(&v_)) return n->raw;
  return {};
}

Relation::Relation(Schema schema, std::vector<TupleRecord> tuples)
    : schema_(std::move(schema)), tuples_(std::move(tuples)) {
  for (std::size_t i = 0; i < tuples_.size(); ++i) {
    if (tuples_[i].tid != i) throw SchemaError("tuple ids must be dense and ordered");
    if (tuples_[i].values.size() != schema_.arity()) {
      throw SchemaError("tuple " + std::to_string(i) + " has " +
                        std::to_string(tuples_[i].values.size()) + " values, schema has " +
                        std::to_string(schema_.arity()));
    }
  }
}

namespace {

AttrKind infer_kind(const std::vector<CsvRecord>& rows, std::size_t col,
                    const std::vector<std::vector<bool>>& missing) {
  std::size_t present = 0;
  bool all_numeric = true;
  std::vector<std::size_t> token_counts;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (missing[r][col]) continue;
    ++present;
    const auto& cell = rows[r].fields[col];
    if (all_numeric && !text::parse_number(cell)) all_numeric = false;
    token_counts.push_back(text::tokenize(cell).size());
  }
  if (present == 0) return AttrKind::kShortText;
  if (all_numeric) return AttrKind::kNumeric;
  auto mid = token_counts.begin() + static_cast<std::ptrdiff_t>(token_counts.size() / 2);
  std::nth_element(token_counts.begin(), mid, token_counts.end());
  double median = static_cast<double>(*mid);
  if (token_counts.size() % 2 == 0) {
    const auto lower = *std::max_element(token_counts.begin(), mid);
    median = (median + static_cast<double>(lower)) / 2.0;
  }
  return median > static_cast<double>(kLongTextMedianTokens) ? AttrKind::kLongText
                                                             : AttrKind::kShortText;
}

}  // namespace

Relation read_relation(std::istream& in, const LoadOptions& options) {
  CsvReader reader(in);
  CsvRecord header;
  if (!reader.next(header)) throw ParseError("line 1: missing header row");

  std::vector<CsvRecord> rows;
  CsvRecord rec;
  while (reader.next(rec)) {
    if (rec.fields.size() != header.fields.size()) {
      throw ParseError("line " + std::to_string(rec.line) + ": expected " +
                       std::to_string(header.fields.size()) + " fields, found " +
                       std::to_string(rec.fields.size()));
    }
    rows.push_back(std::move(rec));
    rec = CsvRecord{};
  }

  const std::size_t arity = header.fields.size();
  std::vector<std::vector<bool>> missing(rows.size(), std::vector<bool>(arity, false));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < arity; ++c) {
      const auto cell = text::trim(rows[r].fields[c]);
      missing[r][c] = std::any_of(options.missing_markers.begin(), options.missing_markers.end(),
                                  [&](const std::string& m) { return cell == m; });
    }
  }

  std::vector<Attribute> attrs;
  attrs.reserve(arity);
  for (std::size_t c = 0; c < arity; ++c) {
    Attribute a;
    a.name = header.fields[c];
    if (auto it = options.kind_hints.find(a.name); it != options.kind_hints.end()) {
      a.kind = it->second;
    } else {
      a.kind = infer_kind(rows, c, missing);
    }
    attrs.push_back(std::move(a));
  }
  for (const auto& [name, kind] : options.kind_hints) {
    if (std::none_of(attrs.begin(), attrs.end(), [&](const Attribute& a) { return a.name == name; })) {
      throw SchemaError("kind hint for unknown column '" + name + "'");
    }
  }
  Schema schema(std::move(attrs), options.eid_attr);

  std::vector<TupleRecord> tuples;
  tuples.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    TupleRecord t;
    t.tid = static_cast<Tid>(r);
    t.values.reserve(arity);
    for (std::size_t c = 0; c < arity; ++c) {
      auto& cell = rows[r].fields[c];
      if (missing[r][c]) {
        t.values.push_back(AttrValue::missing());
      } else if (schema.at(c).kind == AttrKind::kNumeric) {
        const auto v = text::parse_number(cell);
        if (!v) {
          throw ParseError("line " + std::to_string(rows[r].line) + ": column '" + schema.at(c).name +
                           "' is numeric but cell '" + cell + "' does not parse");
        }
        t.values.push_back(AttrValue::number(*v, std::move(cell)));
      } else {
        t.values.push_back(AttrValue::text(std::move(cell)));
      }
    }
    if (auto e = schema.eid_index(); e && !t.values[*e].is_missing()) {
      t.eid = std::string(t.values[*e].str());
    }
    tuples.push_back(std::move(t));
  }
  return Relation(std::move(schema), std::move(tuples));
}

Relation load_relation(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return read_relation(in, options);
}

void write_relation_csv(const Relation& relation, std::ostream& out) {
  std::vector<std::string> fields;
  for (const auto& a : relation.schema().attributes()) fields.push_back(a.name);
  write_csv_row(out, fields);
  for (const auto& t : relation.tuples()) {
    fields.clear();
    for (const auto& v : t.values) fields.emplace_back(v.str());
    write_csv_row(out, fields);
  }
}

std::vector<DataPartition> split_fixed(const Relation& relation, std::size_t m) {
  if (m == 0) throw ConfigError("partition count must be at least 1");
  if (relation.empty()) throw ConfigError("cannot partition an empty relation");
  const std::size_t parts = std::min(m, relation.size());
  std::vector<DataPartition> out(parts);
  for (std::size_t p = 0; p < parts; ++p) {
    out[p].pid = p;
    out[p].tuple_refs.reserve(relation.size() / parts + 1);
  }
  for (Tid t = 0; t < relation.size(); ++t) out[t % parts].tuple_refs.push_back(t);
  return out;
}

}  // namespace mdblock
