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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mdblock {

using Tid = std::uint32_t;

enum class AttrKind { kCategorical, kNumeric, kShortText, kLongText };

std::string_view to_string(AttrKind kind);
std::optional<AttrKind> parse_attr_kind(std::string_view name);

struct Attribute {
  std::string name;
  AttrKind kind = AttrKind::kShortText;

  bool operator==(const Attribute&) const = default;
};

/// Ordered attribute list with unique names. The entity-id column, when
/// present, is an ordinary attribute that is additionally surfaced as
/// TupleRecord::eid.
class Schema {
 public:
  Schema() = default;
  Schema(std::vector<Attribute> attributes, std::optional<std::string> eid_attr = std::nullopt);

  const std::vector<Attribute>& attributes() const { return attributes_; }
  std::size_t arity() const { return attributes_.size(); }
  const Attribute& at(std::size_t index) const { return attributes_.at(index); }
  std::optional<std::size_t> index_of(std::string_view name) const;
  const std::optional<std::string>& eid_attr() const { return eid_attr_; }
  std::optional<std::size_t> eid_index() const { return eid_index_; }

 private:
  std::vector<Attribute> attributes_;
  std::optional<std::string> eid_attr_;
  std::optional<std::size_t> eid_index_;
};

/// A cell. Numbers keep the raw cell text so serialization is lossless.
class AttrValue {
 public:
  struct Missing {
    bool operator==(const Missing&) const = default;
  };
  struct Number {
    double value = 0.0;
    std::string raw;
    bool operator==(const Number&) const = default;
  };

  AttrValue() = default;
  static AttrValue missing() { return AttrValue(); }
  static AttrValue text(std::string value);
  /// Throws ConfigError if value is not finite.
  static AttrValue number(double value, std::string raw);
  static AttrValue number(double value);

  bool is_missing() const { return std::holds_alternative<Missing>(v_); }
  bool is_text() const { return std::holds_alternative<std::string>(v_); }
  bool is_number() const { return std::holds_alternative<Number>(v_); }

  /// Text content, or the raw text of a number; empty for Missing.
  std::string_view str() const;
  /// Precondition: is_number().
  double number_value() const { return std::get<Number>(v_).value; }

  bool operator==(const AttrValue&) const = default;

 private:
  std::variant<Missing, std::string, Number> v_;
};

struct TupleRecord {
  Tid tid = 0;
  std::optional<std::string> eid;
  std::vector<AttrValue> values;
};

/// Immutable once constructed; safe to share across threads.
class Relation {
 public:
  Relation() = default;
  /// Throws SchemaError if a tuple's arity differs from the schema or tids
  /// are not dense 0..n-1 in order.
  Relation(Schema schema, std::vector<TupleRecord> tuples);

  const Schema& schema() const { return schema_; }
  std::span<const TupleRecord> tuples() const { return tuples_; }
  std::size_t size() const { return tuples_.size(); }
  bool empty() const { return tuples_.empty(); }
  const TupleRecord& operator[](Tid tid) const { return tuples_[tid]; }
  const AttrValue& value(Tid tid, std::size_t attr) const { return tuples_[tid].values[attr]; }

 private:
  Schema schema_;
  std::vector<TupleRecord> tuples_;
};

/// A subset of a relation's tuples evaluated as one unit.
struct DataPartition {
  std::size_t pid = 0;
  std::vector<Tid> tuple_refs;
  /// Root-edge partitioner that produced this partition; empty for the
  /// round-robin splitter.
  std::optional<std::size_t> branch_id;
};

inline const std::vector<std::string>& default_missing_markers() {
  static const std::vector<std::string> kMarkers{"", "-", "NULL"};
  return kMarkers;
}

struct LoadOptions {
  /// Per-column kind overrides; the only way to obtain kCategorical.
  std::map<std::string, AttrKind, std::less<>> kind_hints;
  std::vector<std::string> missing_markers = default_missing_markers();
  std::optional<std::string> eid_attr;
};

/// Columns whose median token count exceeds this are inferred as long text.
inline constexpr std::size_t kLongTextMedianTokens = 8;

Relation load_relation(const std::filesystem::path& path, const LoadOptions& options = {});
Relation read_relation(std::istream& in, const LoadOptions& options = {});

/// Writes a header plus one row per tuple. Missing cells become empty fields.
void write_relation_csv(const Relation& relation, std::ostream& out);

/// Round-robin split into min(m, |D|) non-empty partitions whose sizes
/// differ by at most one. Throws ConfigError for m == 0 or an empty relation.
std::vector<DataPartition> split_fixed(const Relation& relation, std::size_t m);

}  // namespace mdblock
