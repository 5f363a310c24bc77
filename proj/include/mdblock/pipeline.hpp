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
#include <vector>

#include "mdblock/engine.hpp"
#include "mdblock/partition.hpp"
#include "mdblock/plan.hpp"
#include "mdblock/relation.hpp"

namespace mdblock {

struct PipelineConfig {
  bool async = true;
  std::size_t partition_queue = 64;
  std::size_t collect_queue = 64;
  bool pull = true;
  PartitionOptions partition;
  std::uint64_t seed = 0;
};

struct StageTimings {
  double plan = 0.0;
  double partition = 0.0;
  double schedule = 0.0;
  double execute = 0.0;  // summed over devices
  double collect = 0.0;
  double total = 0.0;
};

struct PipelineResult {
  /// Deduplicated across branches, sorted by (t, s); the witness kept for
  /// a pair is the one from its lowest branch.
  CandidateSet candidates;
  StageTimings timings;
  std::size_t partitions = 0;
  std::size_t pulls = 0;  // cross-partition pulls executed
  std::size_t tasks = 0;
  std::size_t fallbacks = 0;
  std::vector<std::size_t> tasks_per_device;
  std::vector<RunStats> device_stats;
};

/// Partitions by the plan's root edges, schedules partitions onto devices,
/// runs them and merges the results. Throws Error naming the failed stage.
PipelineResult pipeline_run(const Relation& relation, const Plan& plan, const PipelineConfig& config,
                            const EngineConfig& engine, const std::vector<DeviceSpec>& devices);

}  // namespace mdblock
