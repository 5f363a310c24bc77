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

#include "mdblock/cost_model.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mdblock/error.hpp"

namespace mdblock {

namespace {

constexpr double kLeak = 0.01;
// The network fits log seconds; costs span several orders of magnitude.
constexpr double kFloorSeconds = 1e-10;

std::pair<Tid, Tid> draw_pair(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<Tid> pick(0, static_cast<Tid>(n - 1));
  const Tid t = pick(rng);
  if (n == 1) return {t, t};
  Tid s = pick(rng);
  while (s == t) s = pick(rng);
  return {t, s};
}

std::size_t kind_slot(AttrKind k) { return static_cast<std::size_t>(k); }

}  // namespace

TimingLog sample_timings(const Evaluator& evaluator, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw ConfigError("timing sample count must be at least 1");
  const auto& rel = evaluator.relation();
  if (rel.empty()) throw ConfigError("cannot sample timings on an empty relation");
  TimingLog log;
  log.samples.reserve(n_samples * evaluator.slot_count());
  std::mt19937_64 rng(seed);
  using Clock = std::chrono::steady_clock;
  for (std::size_t slot = 0; slot < evaluator.slot_count(); ++slot) {
    // Warm caches and branch predictors before recording.
    for (int i = 0; i < 8; ++i) {
      const auto [t, s] = draw_pair(rng, rel.size());
      (void)evaluator.eval(slot, t, s);
    }
    // Min over a few short batches: one pair is below timer resolution and
    // a single preemption would otherwise swamp the sample.
    constexpr int kBatches = 3;
    constexpr int kRepeats = 4;
    for (std::size_t i = 0; i < n_samples; ++i) {
      const auto [t, s] = draw_pair(rng, rel.size());
      double best = std::numeric_limits<double>::infinity();
      for (int b = 0; b < kBatches; ++b) {
        const auto start = Clock::now();
        for (int r = 0; r < kRepeats; ++r) {
          volatile bool sink = evaluator.eval(slot, t, s);
          (void)sink;
        }
        const auto stop = Clock::now();
        best = std::min(best, std::chrono::duration<double>(stop - start).count() / kRepeats);
      }
      log.samples.push_back({slot, t, s, best});
    }
  }
  return log;
}

CostFeatures cost_features(const BoundPredicate& p, const Relation& relation, Tid t, Tid s) {
  CostFeatures f{};
  std::size_t comparator = 0;
  if (p.predicate.op == Comparator::kSim) {
    switch (p.measure->kind) {
      case MeasureKind::kEdit:
        comparator = 1;
        break;
      case MeasureKind::kJaccard:
        comparator = 2;
        break;
      case MeasureKind::kExactToken:
        comparator = 3;
        break;
      case MeasureKind::kCustom:
        comparator = 4;
        break;
    }
  }
  f[comparator] = 1.0;
  const auto& schema = relation.schema();
  f[5 + kind_slot(schema.at(p.lhs_index).kind)] = 1.0;
  if (p.rhs_index) {
    f[9 + kind_slot(schema.at(*p.rhs_index).kind)] = 1.0;
  } else {
    f[13] = 1.0;
  }
  const double lt = static_cast<double>(p.lhs(relation[t]).str().size());
  const double ls = static_cast<double>(p.rhs(relation[s]).str().size());
  f[14] = lt;
  f[15] = ls;
  f[16] = lt * ls;
  return f;
}

double CostModel::forward(const CostFeatures& x, std::vector<std::vector<double>>* acts) const {
  std::vector<double> cur(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) cur[i] = (x[i] - in_mean_[i]) / in_scale_[i];
  if (acts) acts->push_back(cur);
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    const std::size_t in = layers_[l];
    const std::size_t out = layers_[l + 1];
    const bool last = l + 2 == layers_.size();
    std::vector<double> next(out);
    for (std::size_t o = 0; o < out; ++o) {
      double z = params_[off + out * in + o];
      for (std::size_t i = 0; i < in; ++i) z += params_[off + o * in + i] * cur[i];
      next[o] = last || z > 0.0 ? z : kLeak * z;
    }
    off += out * in + out;
    cur = std::move(next);
    if (acts) acts->push_back(cur);
  }
  return cur[0];
}

double CostModel::predict(const CostFeatures& features) const {
  constexpr std::size_t kWidth = 64;
  if (*std::max_element(layers_.begin(), layers_.end()) > kWidth) {
    return std::exp(forward(features, nullptr) * y_scale_ + y_mean_);
  }
  // Inference runs per pair and predicate; keep it off the heap.
  std::array<double, kWidth> a{};
  std::array<double, kWidth> b{};
  for (std::size_t i = 0; i < features.size(); ++i) a[i] = (features[i] - in_mean_[i]) / in_scale_[i];
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    const std::size_t in = layers_[l];
    const std::size_t out = layers_[l + 1];
    const bool last = l + 2 == layers_.size();
    for (std::size_t o = 0; o < out; ++o) {
      double z = params_[off + out * in + o];
      for (std::size_t i = 0; i < in; ++i) z += params_[off + o * in + i] * a[i];
      b[o] = last || z > 0.0 ? z : kLeak * z;
    }
    off += out * in + out;
    std::swap(a, b);
  }
  return std::exp(a[0] * y_scale_ + y_mean_);
}

CostModel train_cost_model(const TimingLog& log, const Evaluator& evaluator,
                           const CostModelOptions& options) {
  if (log.samples.empty()) throw ConfigError("cannot train a cost model on an empty timing log");
  if (options.batch_size == 0 || options.epochs == 0) throw ConfigError("batch size and epochs must be positive");
  CostModel model;
  model.layers_.push_back(kCostFeatureCount);
  for (auto h : options.hidden) {
    if (h == 0) throw ConfigError("hidden layers must be non-empty");
    model.layers_.push_back(h);
  }
  model.layers_.push_back(1);

  const auto& rel = evaluator.relation();
  const std::size_t n = log.samples.size();
  std::vector<CostFeatures> xs(n);
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& smp = log.samples[i];
    xs[i] = cost_features(evaluator.slot(smp.slot), rel, smp.t, smp.s);
    ys[i] = std::log(std::max(smp.seconds, kFloorSeconds));
  }

  for (std::size_t j = 0; j < kCostFeatureCount; ++j) {
    double mean = 0.0;
    for (const auto& x : xs) mean += x[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& x : xs) var += (x[j] - mean) * (x[j] - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    model.in_mean_[j] = mean;
    model.in_scale_[j] = sd > 1e-12 ? sd : 1.0;
  }
  {
    const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double y : ys) var += (y - mean) * (y - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    model.y_mean_ = mean;
    model.y_scale_ = sd > 1e-15 * std::max(1.0, std::abs(mean)) ? sd : (mean != 0.0 ? std::abs(mean) : 1.0);
  }

  std::mt19937_64 rng(options.seed);
  std::size_t param_count = 0;
  for (std::size_t l = 0; l + 1 < model.layers_.size(); ++l) {
    param_count += model.layers_[l] * model.layers_[l + 1] + model.layers_[l + 1];
  }
  model.params_.assign(param_count, 0.0);
  {
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < model.layers_.size(); ++l) {
      const std::size_t in = model.layers_[l];
      const std::size_t out = model.layers_[l + 1];
      const double bound = std::sqrt(6.0 / static_cast<double>(in));
      std::uniform_real_distribution<double> init(-bound, bound);
      for (std::size_t i = 0; i < in * out; ++i) model.params_[off + i] = init(rng);
      for (std::size_t o = 0; o < out; ++o) model.params_[off + in * out + o] = 0.01;
      off += in * out + out;
    }
  }

  std::vector<double> velocity(param_count, 0.0);
  std::vector<double> grad(param_count, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<double>> acts;
  const std::size_t layers = model.layers_.size();

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = options.learning_rate / (1.0 + 0.01 * static_cast<double>(epoch));
    for (std::size_t start = 0; start < n; start += options.batch_size) {
      const std::size_t end = std::min(n, start + options.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const std::size_t idx = order[b];
        acts.clear();
        const double out = model.forward(xs[idx], &acts);
        const double target = (ys[idx] - model.y_mean_) / model.y_scale_;
        std::vector<double> delta{2.0 * (out - target)};
        // Walk layers backwards; offsets recomputed from the end.
        std::size_t off = param_count;
        for (std::size_t l = layers - 1; l-- > 0;) {
          const std::size_t in = model.layers_[l];
          const std::size_t outw = model.layers_[l + 1];
          off -= in * outw + outw;
          const auto& a_in = acts[l];
          const auto& a_out = acts[l + 1];
          const bool last = l + 2 == layers;
          std::vector<double> dz(outw);
          for (std::size_t o = 0; o < outw; ++o) {
            const double slope = last || a_out[o] > 0.0 ? 1.0 : kLeak;
            dz[o] = delta[o] * slope;
          }
          std::vector<double> prev(in, 0.0);
          for (std::size_t o = 0; o < outw; ++o) {
            for (std::size_t i = 0; i < in; ++i) {
              grad[off + o * in + i] += dz[o] * a_in[i];
              prev[i] += dz[o] * model.params_[off + o * in + i];
            }
            grad[off + outw * in + o] += dz[o];
          }
          delta = std::move(prev);
        }
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      double norm = 0.0;
      for (auto& g : grad) {
        g *= scale;
        norm += g * g;
      }
      norm = std::sqrt(norm);
      const double clip = norm > 5.0 ? 5.0 / norm : 1.0;
      for (std::size_t i = 0; i < param_count; ++i) {
        velocity[i] = options.momentum * velocity[i] - lr * clip * grad[i];
        model.params_[i] += velocity[i];
      }
    }
  }

  double mse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = model.predict(xs[i]) - log.samples[i].seconds;
    mse += e * e;
  }
  model.mse_ = mse / static_cast<double>(n);
  return model;
}

std::vector<double> normalize_by_max(std::span<const double> values) {
  std::vector<double> out(values.size(), 1.0);
  double top = 0.0;
  for (double v : values) top = std::max(top, v);
  if (!(top > 0.0)) return out;
  constexpr double kFloor = 1e-9;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::max(kFloor, values[i] / top);
  return out;
}

CostEstimate estimate_costs(const Evaluator& evaluator, const CostModel& model, std::size_t n_pairs,
                            std::uint64_t seed) {
  if (n_pairs == 0) throw ConfigError("cost estimation needs at least one sampled pair");
  const auto& rel = evaluator.relation();
  if (rel.empty()) throw ConfigError("cannot estimate costs on an empty relation");
  std::mt19937_64 rng(seed);
  std::vector<std::pair<Tid, Tid>> pairs(n_pairs);
  for (auto& p : pairs) p = draw_pair(rng, rel.size());

  CostEstimate est;
  est.total.assign(evaluator.slot_count(), 0.0);
  const double universe = static_cast<double>(rel.size()) * static_cast<double>(rel.size());
  for (std::size_t slot = 0; slot < evaluator.slot_count(); ++slot) {
    double sum = 0.0;
    for (const auto& [t, s] : pairs) sum += model.predict(evaluator.slot(slot), rel, t, s);
    est.total[slot] = sum * universe / static_cast<double>(n_pairs);
  }
  est.normalized = normalize_by_max(est.total);
  return est;
}

}  // namespace mdblock
