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

#include "mdblock/evaluator.hpp"

#include <algorithm>

#include "mdblock/text.hpp"

namespace mdblock {

Evaluator::Evaluator(const Relation& relation, std::vector<BoundPredicate> slots)
    : relation_(&relation), slots_(std::move(slots)) {
  plans_.resize(slots_.size());
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const auto& b = slots_[i];
    auto& plan = plans_[i];
    // Constants and custom scorers take the generic route.
    if (!b.rhs_index) continue;
    bool fold = false;
    if (b.predicate.op == Comparator::kEq) {
      plan.route = Route::kEq;
    } else {
      fold = b.measure->fold_case;
      switch (b.measure->kind) {
        case MeasureKind::kEdit:
          plan.route = Route::kEdit;
          break;
        case MeasureKind::kJaccard:
          plan.route = Route::kJaccard;
          break;
        case MeasureKind::kExactToken:
          plan.route = Route::kExactToken;
          break;
        case MeasureKind::kCustom:
          continue;
      }
    }
    auto& lhs = column(b.lhs_index, fold);
    prepare(lhs, b.lhs_index, plan.route, fold);
    auto& rhs = column(*b.rhs_index, fold);
    prepare(rhs, *b.rhs_index, plan.route, fold);
    plan.lhs = &lhs;
    plan.rhs = &rhs;
  }
  dictionary_.clear();
}

Evaluator::Column& Evaluator::column(std::size_t attr, bool fold_case) {
  auto& slot = columns_[{attr, fold_case}];
  if (!slot) slot = std::make_unique<Column>();
  return *slot;
}

void Evaluator::prepare(Column& col, std::size_t attr, Route route, bool fold_case) {
  const auto& rel = *relation_;
  const std::size_t n = rel.size();
  switch (route) {
    case Route::kEq:
      if (!col.eq.empty() || n == 0) return;
      col.eq.resize(n);
      for (Tid t = 0; t < n; ++t) {
        const auto& v = rel.value(t, attr);
        auto& cell = col.eq[t];
        if (v.is_number()) {
          cell.number = true;
          cell.value = v.number_value();
        }
        cell.trimmed = text::trim(v.str());
      }
      return;
    case Route::kEdit:
      if (fold_case) {
        if (!col.folded.empty() || n == 0) return;
        col.folded.resize(n);
        for (Tid t = 0; t < n; ++t) col.folded[t] = text::fold(rel.value(t, attr).str());
      } else {
        if (!col.text.empty() || n == 0) return;
        col.text.resize(n);
        for (Tid t = 0; t < n; ++t) col.text[t] = rel.value(t, attr).str();
      }
      return;
    case Route::kJaccard:
    case Route::kExactToken:
      if (!col.tokens.empty() || n == 0) return;
      col.tokens.resize(n);
      for (Tid t = 0; t < n; ++t) {
        auto& ids = col.tokens[t];
        for (auto& tok : text::tokenize(rel.value(t, attr).str(), fold_case)) {
          auto [it, _] = dictionary_.emplace(std::move(tok), static_cast<std::uint32_t>(dictionary_.size()));
          ids.push_back(it->second);
        }
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      }
      return;
    case Route::kGeneric:
      return;
  }
}

bool Evaluator::eval(std::size_t slot, Tid t, Tid s) const {
  const auto& b = slots_[slot];
  const auto& plan = plans_[slot];
  const auto& tr = (*relation_)[t];
  const auto& sr = (*relation_)[s];
  const auto& a = b.lhs(tr);
  const auto& c = b.rhs(sr);
  if (a.is_missing() || c.is_missing()) return false;
  const double threshold = b.predicate.threshold;
  switch (plan.route) {
    case Route::kEq: {
      const auto& x = plan.lhs->eq[t];
      const auto& y = plan.rhs->eq[s];
      if (x.number && y.number) return x.value == y.value;
      if (!x.number && !y.number) return x.trimmed == y.trimmed;
      return eval_equality(a, c);
    }
    case Route::kEdit:
      if (b.measure->fold_case) return edit_at_least(plan.lhs->folded[t], plan.rhs->folded[s], threshold);
      return edit_at_least(plan.lhs->text[t], plan.rhs->text[s], threshold);
    case Route::kJaccard: {
      const auto& x = plan.lhs->tokens[t];
      const auto& y = plan.rhs->tokens[s];
      if (x.empty() || y.empty()) return false;  // score 0, thresholds are positive
      const auto lo = std::min(x.size(), y.size());
      const auto hi = std::max(x.size(), y.size());
      if (static_cast<double>(lo) / static_cast<double>(hi) < threshold) return false;
      std::size_t inter = 0;
      auto i = x.begin();
      auto j = y.begin();
      while (i != x.end() && j != y.end()) {
        if (*i < *j) {
          ++i;
        } else if (*j < *i) {
          ++j;
        } else {
          ++inter;
          ++i;
          ++j;
        }
      }
      return static_cast<double>(inter) / static_cast<double>(x.size() + y.size() - inter) >= threshold;
    }
    case Route::kExactToken: {
      const auto& x = plan.lhs->tokens[t];
      return !x.empty() && x == plan.rhs->tokens[s] && 1.0 >= threshold;
    }
    case Route::kGeneric:
      break;
  }
  return eval_predicate(b, tr, sr);
}

}  // namespace mdblock
