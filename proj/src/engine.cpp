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

#include "mdblock/engine.hpp"

#include <time.h>

#include <bit>
#include <chrono>
#include <exception>

#include "mdblock/error.hpp"

namespace mdblock {

namespace {

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}

// Half-open [begin, end) of column positions packed into one word so owner
// claims and thief splits race through the same compare-and-swap.
constexpr std::uint64_t pack(std::uint32_t begin, std::uint32_t end) {
  return (static_cast<std::uint64_t>(begin) << 32) | end;
}
constexpr std::uint32_t range_begin(std::uint64_t r) { return static_cast<std::uint32_t>(r >> 32); }
constexpr std::uint32_t range_end(std::uint64_t r) { return static_cast<std::uint32_t>(r); }
constexpr std::uint64_t range_size(std::uint64_t r) {
  return range_end(r) > range_begin(r) ? range_end(r) - range_begin(r) : 0;
}

}  // namespace

std::string_view to_string(StealMode mode) {
  switch (mode) {
    case StealMode::kOff:
      return "off";
    case StealMode::kInter:
      return "inter";
    case StealMode::kInterIntra:
      return "inter+intra";
  }
  return "off";
}

std::optional<StealMode> parse_steal_mode(std::string_view name) {
  if (name == "off") return StealMode::kOff;
  if (name == "inter") return StealMode::kInter;
  if (name == "inter+intra") return StealMode::kInterIntra;
  return std::nullopt;
}

EngineConfig EngineConfig::validated() const {
  EngineConfig c = *this;
  if (c.interval_size == 0) throw ConfigError("interval size must be at least 1");
  if (c.window_size == 0) throw ConfigError("window size must be at least 1");
  if (c.lanes_per_block == 0) throw ConfigError("lanes per block must be at least 1");
  if (c.buffer_half_capacity == 0) throw ConfigError("result buffer half capacity must be at least 1");
  if (c.chunk == 0) throw ConfigError("claim chunk must be at least 1");
  if (c.num_blocks == 0) c.num_blocks = std::max(1U, std::thread::hardware_concurrency());
  return c;
}

std::optional<std::size_t> evaluate_pair(const ExecutionPath& path, const Evaluator& evaluator, Tid t,
                                         Tid s, PairBitmaps& bitmaps, PairTrace* trace,
                                         std::size_t* evals) {
  const auto& code = path.code;
  std::size_t pc = 0;
  while (pc < code.size()) {
    const auto& ins = code[pc];
    if (trace) trace->executed.push_back(pc);
    if (ins.op == OpCode::kCheckpoint) {
      bitmaps.clear();
      return ins.rule;
    }
    bool v;
    if (bitmaps.known(ins.slot)) {
      v = bitmaps.value(ins.slot);
    } else {
      v = evaluator.eval(ins.slot, t, s);
      bitmaps.set(ins.slot, v);
      if (evals) ++*evals;
      if (trace) {
        if (trace->scorer_calls.size() <= ins.slot) trace->scorer_calls.resize(path.slots.size());
        ++trace->scorer_calls[ins.slot];
      }
    }
    pc = v ? pc + 1 : ins.fail_jump;
  }
  bitmaps.clear();
  return std::nullopt;
}

BlockStats RunStats::totals() const {
  BlockStats t;
  for (const auto& b : blocks) {
    t.own_intervals += b.own_intervals;
    t.stolen_intervals += b.stolen_intervals;
    t.range_steals += b.range_steals;
    t.stolen_comparisons += b.stolen_comparisons;
    t.comparisons += b.comparisons;
    t.predicate_evals += b.predicate_evals;
    t.flushes += b.flushes;
    t.index_jumps += b.index_jumps;
    t.busy_seconds += b.busy_seconds;
    t.wall_seconds = std::max(t.wall_seconds, b.wall_seconds);
  }
  return t;
}

void RunStats::merge(const RunStats& other) {
  if (blocks.size() < other.blocks.size()) blocks.resize(other.blocks.size());
  for (std::size_t i = 0; i < other.blocks.size(); ++i) {
    auto& a = blocks[i];
    const auto& b = other.blocks[i];
    a.own_intervals += b.own_intervals;
    a.stolen_intervals += b.stolen_intervals;
    a.range_steals += b.range_steals;
    a.stolen_comparisons += b.stolen_comparisons;
    a.comparisons += b.comparisons;
    a.predicate_evals += b.predicate_evals;
    a.flushes += b.flushes;
    a.index_jumps += b.index_jumps;
    a.busy_seconds += b.busy_seconds;
    a.wall_seconds += b.wall_seconds;
  }
  wall_seconds += other.wall_seconds;
}

IntervalTable::IntervalTable(std::size_t count, std::size_t num_blocks, std::size_t window)
    : count_(count), window_(window), own_(num_blocks), cursor_(num_blocks, 0) {
  if (num_blocks == 0 || window == 0) throw ConfigError("interval table needs blocks and a window");
  for (std::size_t i = 0; i < count; ++i) own_[block_of(i)].push_back(i);
  words_ = (count + 63) / 64;
  bits_ = std::make_unique<std::atomic<std::uint64_t>[]>(std::max<std::size_t>(words_, 1));
  for (std::size_t w = 0; w < words_; ++w) bits_[w].store(0, std::memory_order_relaxed);
}

std::size_t IntervalTable::block_of(std::size_t interval) const {
  return (interval % window_) % own_.size();
}

bool IntervalTable::try_claim(std::size_t interval) {
  const std::uint64_t mask = std::uint64_t{1} << (interval & 63);
  return (bits_[interval >> 6].fetch_or(mask, std::memory_order_acq_rel) & mask) == 0;
}

bool IntervalTable::claimed(std::size_t interval) const {
  return (bits_[interval >> 6].load(std::memory_order_acquire) >> (interval & 63)) & 1U;
}

std::optional<IntervalTable::Claim> IntervalTable::claim(std::size_t block, StealMode mode) {
  auto& own = own_[block];
  auto& cursor = cursor_[block];
  while (cursor < own.size()) {
    const std::size_t i = own[cursor++];
    if (try_claim(i)) return Claim{i, false};
  }
  if (mode == StealMode::kOff) return std::nullopt;
  for (std::size_t w = 0; w < words_; ++w) {
    std::uint64_t bits = bits_[w].load(std::memory_order_acquire);
    while (~bits != 0) {
      const std::size_t i = w * 64 + static_cast<std::size_t>(std::countr_one(bits));
      if (i >= count_) break;
      if (try_claim(i)) return Claim{i, true};
      bits = bits_[w].load(std::memory_order_acquire);
    }
  }
  return std::nullopt;
}

std::optional<std::pair<LaneRange, LaneRange>> split_range(LaneRange victim) {
  if (victim.remaining() < 2) return std::nullopt;
  const std::int64_t sum = victim.start + victim.end;
  const std::int64_t mid = sum >= 0 ? sum / 2 : -((-sum + 1) / 2);
  return std::make_pair(LaneRange{victim.start, mid}, LaneRange{mid + 1, victim.end});
}

ResultSink::ResultSink() : segments_(std::make_unique<std::atomic<CandidatePair*>[]>(kMaxSegments)) {
  for (std::size_t i = 0; i < kMaxSegments; ++i) segments_[i].store(nullptr, std::memory_order_relaxed);
}

ResultSink::~ResultSink() {
  for (std::size_t i = 0; i < kMaxSegments; ++i) delete[] segments_[i].load(std::memory_order_relaxed);
}

std::size_t ResultSink::reserve(std::size_t n) {
  reservations_.fetch_add(1, std::memory_order_relaxed);
  const std::size_t off = next_.fetch_add(n, std::memory_order_acq_rel);
  if (off + n > kSegmentSize * kMaxSegments) throw Error("result sink capacity exceeded");
  return off;
}

CandidatePair* ResultSink::segment(std::size_t index) {
  auto* p = segments_[index].load(std::memory_order_acquire);
  if (p) return p;
  auto* fresh = new CandidatePair[kSegmentSize];
  if (segments_[index].compare_exchange_strong(p, fresh, std::memory_order_acq_rel)) return fresh;
  delete[] fresh;
  return p;
}

void ResultSink::write(std::size_t offset, std::span<const CandidatePair> pairs) {
  for (const auto& pr : pairs) {
    segment(offset >> kSegmentBits)[offset & (kSegmentSize - 1)] = pr;
    ++offset;
  }
}

std::vector<CandidatePair> ResultSink::collect() const {
  const std::size_t n = size();
  std::vector<CandidatePair> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(segments_[i >> kSegmentBits].load(std::memory_order_acquire)[i & (kSegmentSize - 1)]);
  }
  return out;
}

BlockBuffer::BlockBuffer(std::size_t half_capacity, ResultSink& sink)
    : capacity_(half_capacity), sink_(sink) {
  if (capacity_ == 0) throw ConfigError("result buffer half capacity must be at least 1");
  halves_[0].reserve(std::min<std::size_t>(capacity_, 1024));
  halves_[1].reserve(std::min<std::size_t>(capacity_, 1024));
}

void BlockBuffer::push(const CandidatePair& pair) {
  auto& half = halves_[active_];
  half.push_back(pair);
  if (half.size() >= capacity_) {
    const std::size_t full = active_;
    active_ ^= 1;
    flush_half(full);
  }
}

void BlockBuffer::flush_half(std::size_t half) {
  auto& h = halves_[half];
  if (h.empty()) return;
  const std::size_t off = sink_.reserve(h.size());
  sink_.write(off, h);
  h.clear();
  ++flushes_;
}

void BlockBuffer::flush() {
  flush_half(active_ ^ 1);
  flush_half(active_);
}

void flush_results(BlockBuffer& local) { local.flush(); }

struct Engine::Run {
  struct BlockState {
    std::mutex mu;
    // Slots 0..interval_size-1 hold the rows of the current interval; the
    // last slot holds a range taken from another block.
    std::unique_ptr<std::atomic<std::uint64_t>[]> ranges;
    std::vector<std::uint32_t> rows;
    std::size_t slot_count = 0;
    BlockStats stats;
  };

  Run(const ExecutionPath& p, const Evaluator& e, Workload w, const EngineConfig& c, std::size_t blocks)
      : path(p),
        evaluator(e),
        work(w),
        cfg(c),
        intervals((w.rows.size() + c.interval_size - 1) / c.interval_size),
        table(intervals, blocks, c.window_size) {
    for (std::size_t b = 0; b < blocks; ++b) {
      auto st = std::make_unique<BlockState>();
      st->slot_count = c.interval_size + 1;
      st->ranges = std::make_unique<std::atomic<std::uint64_t>[]>(st->slot_count);
      for (std::size_t k = 0; k < st->slot_count; ++k) st->ranges[k].store(pack(0, 0), std::memory_order_relaxed);
      st->rows.assign(st->slot_count, 0);
      state.push_back(std::move(st));
    }
  }

  std::uint64_t initial_range(std::size_t row) const {
    const auto n = static_cast<std::uint32_t>(work.cols.size());
    if (work.same && cfg.symmetric) return pack(static_cast<std::uint32_t>(row + 1), n);
    return pack(0, n);
  }

  const ExecutionPath& path;
  const Evaluator& evaluator;
  Workload work;
  EngineConfig cfg;
  std::size_t intervals;
  IntervalTable table;
  ResultSink sink;
  std::vector<std::unique_ptr<BlockState>> state;
  std::mutex error_mu;
  std::exception_ptr error;
};

Engine::Engine(EngineConfig config) : config_(config.validated()) {
  threads_.reserve(config_.num_blocks);
  for (std::size_t b = 0; b < config_.num_blocks; ++b) threads_.emplace_back([this, b] { worker(b); });
}

Engine::~Engine() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void Engine::worker(std::size_t block) {
  std::size_t seen = 0;
  for (;;) {
    Run* run = nullptr;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return stopping_ || generation_ != seen; });
      if (stopping_) return;
      seen = generation_;
      run = current_;
    }
    process(*run, block);
    {
      std::lock_guard lock(mu_);
      if (--pending_ == 0) done_cv_.notify_all();
    }
  }
}

void Engine::process(Run& run, std::size_t block) {
  const auto wall_start = std::chrono::steady_clock::now();
  const double cpu_start = thread_cpu_seconds();
  auto& me = *run.state[block];
  auto& stats = me.stats;
  const auto& cfg = run.cfg;
  const std::size_t extra = me.slot_count - 1;
  const auto rows = run.work.rows;
  const auto cols = run.work.cols;
  const bool same = run.work.same;
  const bool symmetric = cfg.symmetric;
  const std::uint32_t chunk = static_cast<std::uint32_t>(cfg.chunk);

  try {
    BlockBuffer buffer(cfg.buffer_half_capacity, run.sink);
    PairBitmaps bitmaps(run.path.slots.size());

    auto emit = [&](Tid t, Tid s) {
      if (const auto rule = evaluate_pair(run.path, run.evaluator, t, s, bitmaps, nullptr, &stats.predicate_evals)) {
        buffer.push({t, s, static_cast<std::uint32_t>(*rule)});
      }
    };
    auto compare = [&](std::uint32_t row, std::uint32_t col) {
      if (same && row == col) return;
      const Tid a = rows[row];
      const Tid b = cols[col];
      ++stats.comparisons;
      if (symmetric) {
        emit(std::min(a, b), std::max(a, b));
      } else {
        emit(a, b);
        if (!same) emit(b, a);
      }
    };
    auto drain = [&](std::size_t k) {
      auto& slot = me.ranges[k];
      const std::uint32_t row = me.rows[k];
      std::uint64_t cur = slot.load(std::memory_order_acquire);
      for (;;) {
        const std::uint32_t lo = range_begin(cur);
        const std::uint32_t hi = range_end(cur);
        if (lo >= hi) return;
        const std::uint32_t take = std::min(chunk, hi - lo);
        if (!slot.compare_exchange_weak(cur, pack(lo + take, hi), std::memory_order_acq_rel)) continue;
        for (std::uint32_t j = lo; j < lo + take; ++j) compare(row, j);
        cur = slot.load(std::memory_order_acquire);
      }
    };
    auto steal_range = [&]() -> bool {
      // Victims by descending backlog; give up only when none can be split.
      std::vector<std::pair<std::uint64_t, std::size_t>> backlog;
      for (std::size_t v = 0; v < run.state.size(); ++v) {
        if (v == block) continue;
        std::uint64_t rem = 0;
        for (std::size_t k = 0; k < run.state[v]->slot_count; ++k) {
          rem += range_size(run.state[v]->ranges[k].load(std::memory_order_relaxed));
        }
        if (rem >= 2) backlog.emplace_back(rem, v);
      }
      std::sort(backlog.begin(), backlog.end(), std::greater<>());
      for (const auto& [rem, v] : backlog) {
        auto& victim = *run.state[v];
        std::uint32_t row = 0;
        std::uint64_t taken = 0;
        {
          std::lock_guard lock(victim.mu);
          for (;;) {
            std::size_t best = victim.slot_count;
            std::uint64_t best_size = 1;
            std::uint64_t best_val = 0;
            for (std::size_t k = 0; k < victim.slot_count; ++k) {
              const auto val = victim.ranges[k].load(std::memory_order_acquire);
              if (range_size(val) > best_size) {
                best = k;
                best_size = range_size(val);
                best_val = val;
              }
            }
            if (best == victim.slot_count) break;
            const std::uint32_t lo = range_begin(best_val);
            const std::uint32_t hi = range_end(best_val);
            const std::uint32_t mid = lo + (hi - 1 - lo) / 2;  // last index the victim keeps
            if (victim.ranges[best].compare_exchange_strong(best_val, pack(lo, mid + 1),
                                                            std::memory_order_acq_rel)) {
              row = victim.rows[best];
              taken = pack(mid + 1, hi);
              break;
            }
          }
        }
        if (taken == 0) continue;
        {
          std::lock_guard lock(me.mu);
          me.rows[extra] = row;
          me.ranges[extra].store(taken, std::memory_order_release);
        }
        ++stats.range_steals;
        stats.stolen_comparisons += range_size(taken);
        drain(extra);
        return true;
      }
      return false;
    };

    std::optional<std::size_t> last_own;
    for (;;) {
      if (const auto claim = run.table.claim(block, cfg.stealing)) {
        if (claim->stolen) {
          ++stats.stolen_intervals;
        } else {
          ++stats.own_intervals;
          if (last_own && claim->interval != *last_own + 1) ++stats.index_jumps;
          last_own = claim->interval;
        }
        const std::size_t lo = claim->interval * cfg.interval_size;
        const std::size_t hi = std::min(rows.size(), lo + cfg.interval_size);
        {
          std::lock_guard lock(me.mu);
          for (std::size_t r = lo; r < hi; ++r) {
            me.rows[r - lo] = static_cast<std::uint32_t>(r);
            me.ranges[r - lo].store(run.initial_range(r), std::memory_order_release);
          }
        }
        for (std::size_t k = 0; k < hi - lo; ++k) drain(k);
        continue;
      }
      if (cfg.stealing == StealMode::kInterIntra && steal_range()) continue;
      break;
    }
    buffer.flush();
    stats.flushes = buffer.flushes();
  } catch (...) {
    std::lock_guard lock(run.error_mu);
    if (!run.error) run.error = std::current_exception();
  }
  stats.busy_seconds = thread_cpu_seconds() - cpu_start;
  stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
}

CandidateSet Engine::run(const ExecutionPath& path, const Evaluator& evaluator, Workload work) {
  const auto start = std::chrono::steady_clock::now();
  if (work.same && work.cols.data() != work.rows.data()) {
    if (work.cols.size() != work.rows.size() ||
        !std::equal(work.rows.begin(), work.rows.end(), work.cols.begin())) {
      throw ConfigError("a same-set workload needs identical rows and columns");
    }
  }
  if (work.rows.size() >= (std::size_t{1} << 32) || work.cols.size() >= (std::size_t{1} << 32)) {
    throw ConfigError("workload too large for 32-bit lane ranges");
  }
  const std::size_t n = work.rows.size();
  const std::size_t m = work.cols.size();
  std::size_t comparisons = n * m;
  if (work.same) comparisons = config_.symmetric ? n * (n - (n > 0)) / 2 : n * (n - (n > 0));

  CandidateSet out;
  if (comparisons == 0) {
    out.stats.blocks.resize(1);
    return out;
  }
  if (comparisons < config_.inline_below) {
    Run run(path, evaluator, work, config_, 1);
    process(run, 0);
    if (run.error) std::rethrow_exception(run.error);
    out.pairs = run.sink.collect();
    out.stats.blocks.push_back(run.state[0]->stats);
  } else {
    std::lock_guard serial(run_mu_);
    Run run(path, evaluator, work, config_, config_.num_blocks);
    {
      std::lock_guard lock(mu_);
      current_ = &run;
      pending_ = threads_.size();
      ++generation_;
    }
    cv_.notify_all();
    {
      std::unique_lock lock(mu_);
      done_cv_.wait(lock, [&] { return pending_ == 0; });
      current_ = nullptr;
    }
    if (run.error) std::rethrow_exception(run.error);
    out.pairs = run.sink.collect();
    for (const auto& st : run.state) out.stats.blocks.push_back(st->stats);
  }
  out.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

CandidateSet Engine::run_partition(const DataPartition& p, const ExecutionPath& path,
                                   const Evaluator& evaluator) {
  return run(path, evaluator, Workload{p.tuple_refs, p.tuple_refs, true});
}

CandidateSet Engine::cross_partition_pull(const DataPartition& a, const DataPartition& b,
                                          const ExecutionPath& path, const Evaluator& evaluator) {
  if (&a == &b || (a.pid == b.pid && a.branch_id == b.branch_id)) {
    throw ConfigError("cross-partition pull needs two different partitions");
  }
  if (a.branch_id != b.branch_id) throw ConfigError("cross-partition pull across different branches");
  return run(path, evaluator, Workload{a.tuple_refs, b.tuple_refs, false});
}

}  // namespace mdblock
