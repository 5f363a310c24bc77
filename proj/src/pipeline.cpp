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

#include "mdblock/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "mdblock/channel.hpp"
#include "mdblock/error.hpp"
#include "mdblock/evaluator.hpp"
#include "mdblock/text.hpp"

namespace mdblock {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Task {
  std::size_t branch = 0;
  std::vector<Tid> rows;
  std::vector<Tid> cols;  // empty for a same-set task
  std::uint64_t key = 0;
};

struct TaskResult {
  std::size_t branch = 0;
  std::vector<CandidatePair> pairs;
};

// Tasks of one branch: one per partition with at least one pair, and one
// per partition with pulls covering all of its pulled partitions at once.
std::vector<Task> branch_tasks(const PartitionSet& set, std::size_t branch, bool pull) {
  std::vector<Task> tasks;
  std::unordered_map<std::size_t, std::size_t> local;
  for (std::size_t i = 0; i < set.partitions.size(); ++i) local[set.partitions[i].pid] = i;
  for (const auto& p : set.partitions) {
    if (p.tuple_refs.size() < 2) continue;
    Task t;
    t.branch = branch;
    t.rows = p.tuple_refs;
    t.key = partition_key(p);
    tasks.push_back(std::move(t));
  }
  if (!pull) return tasks;
  std::size_t i = 0;
  while (i < set.pulls.size()) {
    const std::size_t a = set.pulls[i].a;
    Task t;
    t.branch = branch;
    const auto& pa = set.partitions[local.at(a)];
    t.rows = pa.tuple_refs;
    t.key = text::mix64(partition_key(pa) + 1);
    for (; i < set.pulls.size() && set.pulls[i].a == a; ++i) {
      const auto& pb = set.partitions[local.at(set.pulls[i].b)];
      t.cols.insert(t.cols.end(), pb.tuple_refs.begin(), pb.tuple_refs.end());
    }
    std::sort(t.cols.begin(), t.cols.end());
    tasks.push_back(std::move(t));
  }
  return tasks;
}

class Collector {
 public:
  void add(const TaskResult& r) {
    for (const auto& p : r.pairs) {
      const std::uint64_t key = (static_cast<std::uint64_t>(p.t) << 32) | p.s;
      auto [it, inserted] = best_.emplace(key, Entry{r.branch, p.rule});
      if (!inserted && r.branch < it->second.branch) it->second = Entry{r.branch, p.rule};
    }
  }

  std::vector<CandidatePair> finish() const {
    std::vector<CandidatePair> out;
    out.reserve(best_.size());
    for (const auto& [key, e] : best_) {
      out.push_back({static_cast<Tid>(key >> 32), static_cast<Tid>(key & 0xffffffffU), e.rule});
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  struct Entry {
    std::size_t branch;
    std::uint32_t rule;
  };
  std::unordered_map<std::uint64_t, Entry> best_;
};

// Captures the first failure and the stage it happened in.
class Failure {
 public:
  void set(const char* stage) {
    std::lock_guard lock(mu_);
    if (error_) return;
    stage_ = stage;
    error_ = std::current_exception();
    failed_.store(true);
  }
  bool failed() const { return failed_.load(); }
  void rethrow() const {
    if (!error_) return;
    try {
      std::rethrow_exception(error_);
    } catch (const std::exception& e) {
      throw Error(std::string("stage '") + stage_ + "' failed: " + e.what());
    }
  }

 private:
  std::mutex mu_;
  std::atomic<bool> failed_{false};
  const char* stage_ = "";
  std::exception_ptr error_;
};

}  // namespace

PipelineResult pipeline_run(const Relation& relation, const Plan& plan, const PipelineConfig& config,
                            const EngineConfig& engine_cfg, const std::vector<DeviceSpec>& devices) {
  if (devices.empty()) throw ConfigError("stage 'schedule' failed: no devices configured");
  if (config.partition_queue == 0 || config.collect_queue == 0) throw ConfigError("stage queue bounds must be at least 1");
  const auto start = Clock::now();
  PipelineResult result;
  result.timings.plan = plan.sampling_seconds + plan.estimation_seconds + plan.generation_seconds;
  result.tasks_per_device.assign(devices.size(), 0);
  result.device_stats.resize(devices.size());

  const Evaluator evaluator(relation, plan.path.slots);
  const auto partitioners = derive_partitioners(plan.tree, plan.path);
  std::vector<ExecutionPath> branch_paths;
  for (const auto& p : partitioners) branch_paths.push_back(compile_branch(plan.tree, plan.path, p.root_child));

  const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
  std::vector<std::unique_ptr<Engine>> engines;
  for (const auto& d : devices) {
    EngineConfig c = engine_cfg;
    c.num_blocks = d.blocks ? d.blocks : std::max<std::size_t>(1, hw / devices.size());
    c.lanes_per_block = d.lanes;
    engines.push_back(std::make_unique<Engine>(c));
  }
  const ChblScheduler scheduler(devices, config.seed);
  Collector collector;

  auto run_task = [&](std::size_t device, const Task& task) {
    const auto& path = branch_paths[task.branch];
    Workload w{task.rows, task.cols.empty() ? std::span<const Tid>(task.rows) : std::span<const Tid>(task.cols),
               task.cols.empty()};
    return engines[device]->run(path, evaluator, w);
  };

  if (!config.async) {
    std::vector<Task> tasks;
    auto t0 = Clock::now();
    for (const auto& part : partitioners) {
      auto set = partition_branch(relation, part, config.partition, result.partitions);
      result.partitions += set.partitions.size();
      if (config.pull) result.pulls += set.pulls.size();
      for (auto& t : branch_tasks(set, part.branch_id, config.pull)) tasks.push_back(std::move(t));
    }
    result.timings.partition = since(t0);

    t0 = Clock::now();
    std::vector<std::size_t> device_of;
    std::vector<std::size_t> loads(devices.size(), 0);
    for (const auto& t : tasks) {
      bool fallback = false;
      const auto d = scheduler.pick(t.key, loads, &fallback);
      ++loads[d];
      device_of.push_back(d);
      if (fallback) ++result.fallbacks;
    }
    result.timings.schedule = since(t0);

    std::vector<TaskResult> outputs;
    t0 = Clock::now();
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const auto d = device_of[i];
      auto cs = run_task(d, tasks[i]);
      ++result.tasks_per_device[d];
      result.device_stats[d].merge(cs.stats);
      outputs.push_back({tasks[i].branch, std::move(cs.pairs)});
    }
    result.timings.execute = since(t0);

    t0 = Clock::now();
    for (const auto& o : outputs) collector.add(o);
    result.candidates.pairs = collector.finish();
    result.timings.collect = since(t0);
    result.tasks = tasks.size();
  } else {
    Failure failure;
    Channel<Task> to_schedule(config.partition_queue);
    std::vector<std::unique_ptr<Channel<Task>>> queues;
    for (const auto& d : devices) queues.push_back(std::make_unique<Channel<Task>>(d.capacity));
    Channel<TaskResult> to_collect(config.collect_queue);
    std::vector<std::atomic<std::size_t>> loads(devices.size());
    for (auto& l : loads) l.store(0);
    std::atomic<std::size_t> executors_left{devices.size()};
    std::atomic<std::size_t> partitions{0};
    std::atomic<std::size_t> pulls{0};
    std::atomic<std::size_t> task_count{0};
    std::vector<double> execute_busy(devices.size(), 0.0);
    double partition_busy = 0.0;
    double schedule_busy = 0.0;
    double collect_busy = 0.0;

    auto abort_all = [&] {
      to_schedule.close();
      for (auto& q : queues) q->close();
      to_collect.close();
    };

    std::thread partition_stage([&] {
      try {
        for (const auto& part : partitioners) {
          if (failure.failed()) break;
          const auto t0 = Clock::now();
          auto set = partition_branch(relation, part, config.partition, partitions.load());
          partitions += set.partitions.size();
          if (config.pull) pulls += set.pulls.size();
          auto tasks = branch_tasks(set, part.branch_id, config.pull);
          partition_busy += since(t0);
          for (auto& t : tasks) {
            if (!to_schedule.push(std::move(t))) break;
          }
        }
      } catch (...) {
        failure.set("partition");
        abort_all();
      }
      to_schedule.close();
    });

    std::thread schedule_stage([&] {
      try {
        std::vector<std::size_t> snapshot(devices.size());
        while (auto task = to_schedule.pop()) {
          const auto t0 = Clock::now();
          for (std::size_t d = 0; d < devices.size(); ++d) snapshot[d] = loads[d].load();
          bool fallback = false;
          const auto d = scheduler.pick(task->key, snapshot, &fallback);
          if (fallback) ++result.fallbacks;
          ++loads[d];
          ++result.tasks_per_device[d];
          ++task_count;
          schedule_busy += since(t0);
          if (!queues[d]->push(std::move(*task))) break;
        }
      } catch (...) {
        failure.set("schedule");
        abort_all();
      }
      for (auto& q : queues) q->close();
    });

    std::vector<std::thread> executors;
    for (std::size_t d = 0; d < devices.size(); ++d) {
      executors.emplace_back([&, d] {
        try {
          while (auto task = queues[d]->pop()) {
            const auto t0 = Clock::now();
            auto cs = run_task(d, *task);
            result.device_stats[d].merge(cs.stats);
            execute_busy[d] += since(t0);
            --loads[d];
            if (!to_collect.push({task->branch, std::move(cs.pairs)})) break;
          }
        } catch (...) {
          failure.set("execute");
          abort_all();
        }
        if (--executors_left == 0) to_collect.close();
      });
    }

    try {
      while (auto r = to_collect.pop()) {
        const auto t0 = Clock::now();
        collector.add(*r);
        collect_busy += since(t0);
      }
    } catch (...) {
      failure.set("collect");
      abort_all();
    }

    partition_stage.join();
    schedule_stage.join();
    for (auto& e : executors) e.join();
    failure.rethrow();

    const auto t0 = Clock::now();
    result.candidates.pairs = collector.finish();
    collect_busy += since(t0);
    result.partitions = partitions.load();
    result.pulls = pulls.load();
    result.tasks = task_count.load();
    result.timings.partition = partition_busy;
    result.timings.schedule = schedule_busy;
    for (double b : execute_busy) result.timings.execute += b;
    result.timings.collect = collect_busy;
  }

  for (const auto& s : result.device_stats) result.candidates.stats.merge(s);
  result.timings.total = since(start);
  result.candidates.stats.wall_seconds = result.timings.total;
  return result;
}

}  // namespace mdblock
