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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mdblock/evaluator.hpp"
#include "mdblock/relation.hpp"

namespace mdblock {

struct TimingSample {
  std::size_t slot = 0;  // predicate slot of the evaluator that produced the log
  Tid t = 0;
  Tid s = 0;
  double seconds = 0.0;
};

struct TimingLog {
  std::vector<TimingSample> samples;
};

/// Times n_samples uniformly drawn pairs per predicate slot; each sample is
/// the per-evaluation time of the fastest of three short repeated batches. Throws ConfigError for n_samples == 0 or an empty relation.
TimingLog sample_timings(const Evaluator& evaluator, std::size_t n_samples, std::uint64_t seed);

// comparator one-hot (eq, edit, jaccard, exact_token, custom), kind one-hot
// for each side, constant flag, both value lengths and their product.
inline constexpr std::size_t kCostFeatureCount = 5 + 4 + 4 + 1 + 3;
using CostFeatures = std::array<double, kCostFeatureCount>;

CostFeatures cost_features(const BoundPredicate& p, const Relation& relation, Tid t, Tid s);

struct CostModelOptions {
  std::vector<std::size_t> hidden{2, 6, 1};
  std::size_t epochs = 200;
  double learning_rate = 0.02;
  double momentum = 0.9;
  std::size_t batch_size = 16;
  std::uint64_t seed = 17;
};

class CostModel {
 public:
  /// Seconds per evaluation; always positive.
  double predict(const CostFeatures& features) const;
  double predict(const BoundPredicate& p, const Relation& relation, Tid t, Tid s) const {
    return predict(cost_features(p, relation, t, s));
  }

  /// Input, hidden and output layer widths.
  const std::vector<std::size_t>& layer_sizes() const { return layers_; }
  const std::vector<double>& parameters() const { return params_; }
  /// Mean squared error on the training log, in seconds squared.
  double training_mse() const { return mse_; }

 private:
  friend CostModel train_cost_model(const TimingLog&, const Evaluator&, const CostModelOptions&);

  double forward(const CostFeatures& x, std::vector<std::vector<double>>* acts) const;

  std::vector<std::size_t> layers_;
  std::vector<double> params_;
  CostFeatures in_mean_{};
  CostFeatures in_scale_{};
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  double mse_ = 0.0;
};

/// Seeded SGD with momentum on squared error. Throws ConfigError for an
/// empty log.
CostModel train_cost_model(const TimingLog& log, const Evaluator& evaluator,
                           const CostModelOptions& options = {});

struct CostEstimate {
  /// Predicted seconds over all |D|^2 pairs, per slot.
  std::vector<double> total;
  /// total divided by its maximum; every entry lies in (0, 1].
  std::vector<double> normalized;
};

CostEstimate estimate_costs(const Evaluator& evaluator, const CostModel& model,
                            std::size_t n_pairs, std::uint64_t seed);

/// Divides by the maximum; non-positive entries are lifted to a tiny
/// positive floor. An all-zero input maps to all ones.
std::vector<double> normalize_by_max(std::span<const double> values);

}  // namespace mdblock
