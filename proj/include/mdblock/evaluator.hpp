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
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mdblock/relation.hpp"
#include "mdblock/similarity.hpp"

namespace mdblock {

// Predicate slots over one relation with per-column preprocessing (folded
// strings, interned token sets, parsed numbers) done once up front. Every
// decision matches eval_predicate on the same inputs.
class Evaluator {
 public:
  Evaluator(const Relation& relation, std::vector<BoundPredicate> slots);

  Evaluator(const Evaluator&) = delete;
  Evaluator& operator=(const Evaluator&) = delete;

  const Relation& relation() const { return *relation_; }
  std::size_t slot_count() const { return slots_.size(); }
  const BoundPredicate& slot(std::size_t i) const { return slots_[i]; }
  std::span<const BoundPredicate> slots() const { return slots_; }

  bool eval(std::size_t slot, Tid t, Tid s) const;

 private:
  enum class Route : std::uint8_t { kEq, kEdit, kJaccard, kExactToken, kGeneric };

  struct EqCell {
    bool number = false;
    double value = 0.0;
    std::string_view trimmed;
  };

  struct Column {
    std::vector<EqCell> eq;
    std::vector<std::string> folded;
    std::vector<std::string_view> text;
    std::vector<std::vector<std::uint32_t>> tokens;
  };

  struct SlotPlan {
    Route route = Route::kGeneric;
    const Column* lhs = nullptr;
    const Column* rhs = nullptr;
  };

  Column& column(std::size_t attr, bool fold_case);
  void prepare(Column& col, std::size_t attr, Route route, bool fold_case);

  const Relation* relation_;
  std::vector<BoundPredicate> slots_;
  std::vector<SlotPlan> plans_;
  std::map<std::pair<std::size_t, bool>, std::unique_ptr<Column>> columns_;
  std::unordered_map<std::string, std::uint32_t> dictionary_;
};

}  // namespace mdblock
