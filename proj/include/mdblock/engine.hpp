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

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mdblock/evaluator.hpp"
#include "mdblock/plan.hpp"
#include "mdblock/relation.hpp"

namespace mdblock {

enum class StealMode { kOff, kInter, kInterIntra };

std::string_view to_string(StealMode mode);
std::optional<StealMode> parse_steal_mode(std::string_view name);

struct EngineConfig {
  std::size_t interval_size = 256;
  std::size_t window_size = 1024;  // in intervals
  std::size_t lanes_per_block = 32;
  std::size_t num_blocks = 0;  // 0: hardware concurrency
  bool symmetric = true;
  StealMode stealing = StealMode::kInterIntra;
  std::size_t buffer_half_capacity = 4096;
  /// Comparisons claimed from a lane range at a time.
  std::size_t chunk = 16;
  /// Workloads with fewer comparisons run on the calling thread.
  std::size_t inline_below = 0;

  /// Throws ConfigError on zero sizes; resolves num_blocks.
  EngineConfig validated() const;
};

// One reuse bit and one value bit per predicate slot.
class PairBitmaps {
 public:
  explicit PairBitmaps(std::size_t slots) : reuse_((slots + 63) / 64), value_((slots + 63) / 64) {}

  void clear() {
    std::fill(reuse_.begin(), reuse_.end(), 0);
    std::fill(value_.begin(), value_.end(), 0);
  }
  bool known(std::size_t slot) const { return (reuse_[slot >> 6] >> (slot & 63)) & 1U; }
  bool value(std::size_t slot) const { return (value_[slot >> 6] >> (slot & 63)) & 1U; }
  void set(std::size_t slot, bool v) {
    reuse_[slot >> 6] |= std::uint64_t{1} << (slot & 63);
    if (v) value_[slot >> 6] |= std::uint64_t{1} << (slot & 63);
  }
  bool clean() const {
    for (auto w : reuse_) {
      if (w) return false;
    }
    return true;
  }

 private:
  std::vector<std::uint64_t> reuse_;
  std::vector<std::uint64_t> value_;
};

struct PairTrace {
  std::vector<std::uint32_t> scorer_calls;  // per slot
  std::vector<std::size_t> executed;        // instruction indices in order
};

/// Runs the path for (t, s). The bitmaps are cleared on return. evals, when
/// given, is incremented once per predicate actually evaluated.
std::optional<std::size_t> evaluate_pair(const ExecutionPath& path, const Evaluator& evaluator, Tid t,
                                         Tid s, PairBitmaps& bitmaps, PairTrace* trace = nullptr,
                                         std::size_t* evals = nullptr);

struct CandidatePair {
  Tid t = 0;
  Tid s = 0;
  std::uint32_t rule = 0;

  bool operator==(const CandidatePair&) const = default;
  auto operator<=>(const CandidatePair&) const = default;
};

struct BlockStats {
  std::size_t own_intervals = 0;
  std::size_t stolen_intervals = 0;
  std::size_t range_steals = 0;
  std::size_t stolen_comparisons = 0;
  std::size_t comparisons = 0;
  std::size_t predicate_evals = 0;
  std::size_t flushes = 0;
  /// Jumps between non-consecutive intervals of the block's own sequence.
  std::size_t index_jumps = 0;
  double busy_seconds = 0.0;  // thread CPU time
  double wall_seconds = 0.0;
};

struct RunStats {
  std::vector<BlockStats> blocks;
  double wall_seconds = 0.0;

  BlockStats totals() const;
  void merge(const RunStats& other);
};

struct CandidateSet {
  std::vector<CandidatePair> pairs;
  RunStats stats;

  void sort() { std::sort(pairs.begin(), pairs.end()); }
};

// Interval ids 0..count-1. Interval i belongs to block
// (i mod window) mod blocks; each block walks its own intervals in order and
// claims through one shared test-and-set bitmap.
class IntervalTable {
 public:
  IntervalTable(std::size_t count, std::size_t num_blocks, std::size_t window);

  std::size_t size() const { return count_; }
  std::size_t block_of(std::size_t interval) const;
  const std::vector<std::size_t>& assigned(std::size_t block) const { return own_[block]; }

  /// Indivisible test-and-set; true when this call won the interval.
  bool try_claim(std::size_t interval);
  bool claimed(std::size_t interval) const;

  struct Claim {
    std::size_t interval = 0;
    bool stolen = false;
  };
  /// Own next interval first, then (when stealing allows) the lowest
  /// unclaimed one. Each block must call this only for itself.
  std::optional<Claim> claim(std::size_t block, StealMode mode);

 private:
  std::size_t count_;
  std::size_t window_;
  std::vector<std::vector<std::size_t>> own_;
  std::vector<std::size_t> cursor_;
  std::unique_ptr<std::atomic<std::uint64_t>[]> bits_;
  std::size_t words_;
};

// Inclusive comparison range of one lane; empty when start > end.
struct LaneRange {
  std::int64_t start = 0;
  std::int64_t end = -1;

  std::int64_t remaining() const { return end >= start ? end - start + 1 : 0; }
  bool operator==(const LaneRange&) const = default;
};

/// Midpoint split: victim keeps [start, mid], thief gets [mid + 1, end].
std::optional<std::pair<LaneRange, LaneRange>> split_range(LaneRange victim);

// Append-only pair store. Writers reserve disjoint regions with one
// fetch_add and fill them without further synchronization.
class ResultSink {
 public:
  ResultSink();
  ~ResultSink();
  ResultSink(const ResultSink&) = delete;
  ResultSink& operator=(const ResultSink&) = delete;

  std::size_t reserve(std::size_t n);
  void write(std::size_t offset, std::span<const CandidatePair> pairs);
  std::size_t size() const { return next_.load(std::memory_order_acquire); }
  std::size_t reservations() const { return reservations_.load(std::memory_order_relaxed); }
  /// Call after all writers finished.
  std::vector<CandidatePair> collect() const;

 private:
  static constexpr std::size_t kSegmentBits = 14;
  static constexpr std::size_t kSegmentSize = std::size_t{1} << kSegmentBits;
  static constexpr std::size_t kMaxSegments = std::size_t{1} << 14;

  CandidatePair* segment(std::size_t index);

  std::atomic<std::size_t> next_{0};
  std::atomic<std::size_t> reservations_{0};
  std::unique_ptr<std::atomic<CandidatePair*>[]> segments_;
};

// Two halves: results go into the active half; a full half is copied to the
// sink through one reservation and the other half becomes active.
class BlockBuffer {
 public:
  BlockBuffer(std::size_t half_capacity, ResultSink& sink);

  void push(const CandidatePair& pair);
  /// Flushes whatever is buffered.
  void flush();
  std::size_t flushes() const { return flushes_; }

 private:
  void flush_half(std::size_t half);

  std::size_t capacity_;
  ResultSink& sink_;
  std::vector<CandidatePair> halves_[2];
  std::size_t active_ = 0;
  std::size_t flushes_ = 0;
};

void flush_results(BlockBuffer& local);

// Rows x cols comparison work. With same set, row i is compared with cols
// after i (symmetric) or all cols but i (asymmetric); otherwise with all cols.
struct Workload {
  std::span<const Tid> rows;
  std::span<const Tid> cols;
  bool same = true;
};

class Engine {
 public:
  explicit Engine(EngineConfig config);
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const EngineConfig& config() const { return config_; }

  CandidateSet run(const ExecutionPath& path, const Evaluator& evaluator, Workload work);

  CandidateSet run_partition(const DataPartition& p, const ExecutionPath& path, const Evaluator& evaluator);

  /// Throws ConfigError when the partitions are the same or belong to
  /// different branches.
  CandidateSet cross_partition_pull(const DataPartition& a, const DataPartition& b,
                                    const ExecutionPath& path, const Evaluator& evaluator);

 private:
  struct Run;
  void worker(std::size_t block);
  void process(Run& run, std::size_t block);

  EngineConfig config_;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  Run* current_ = nullptr;
  std::size_t generation_ = 0;
  std::size_t pending_ = 0;
  bool stopping_ = false;
  std::mutex run_mu_;
};

}  // namespace mdblock
