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
#include <optional>
#include <string>
#include <vector>

#include "mdblock/plan.hpp"
#include "mdblock/relation.hpp"
#include "mdblock/similarity.hpp"

namespace mdblock {

enum class KeyKind {
  kExact,     // equality on one attribute: folded value
  kMinHash,   // built-in similarity on one attribute: band signature
  kUniversal  // constants, cross-attribute or custom comparisons: one group
};

struct Partitioner {
  std::size_t branch_id = 0;
  std::size_t root_child = 0;  // tree node the branch starts at
  BoundPredicate predicate;
  KeyKind kind = KeyKind::kUniversal;
};

/// One partitioner per root edge, branch ids following the root's visit
/// order (descending edge score).
std::vector<Partitioner> derive_partitioners(const ExecutionTree& tree, const ExecutionPath& path);

struct PartitionOptions {
  std::size_t max_partition_size = 0;  // 0: unbounded
  std::size_t bands = 8;
  std::size_t rows_per_band = 4;
  std::uint64_t seed = 0;
};

// Pair of partitions (indices into PartitionSet::partitions) of the same
// branch whose cross pairs must also be compared.
struct PartitionPull {
  std::size_t a = 0;
  std::size_t b = 0;
  bool operator==(const PartitionPull&) const = default;
  auto operator<=>(const PartitionPull&) const = default;
};

struct PartitionSet {
  std::vector<DataPartition> partitions;
  std::vector<PartitionPull> pulls;  // a < b, sorted
};

/// Partitions for one branch. Tuples with a missing key attribute get a
/// group of their own; groups above max_partition_size are split round
/// robin and their pieces pulled pairwise; MinHash groups sharing any
/// further band are pulled too.
PartitionSet partition_branch(const Relation& relation, const Partitioner& partitioner,
                              const PartitionOptions& options, std::size_t first_pid = 0);

PartitionSet partition_relation(const Relation& relation, const std::vector<Partitioner>& partitioners,
                                const PartitionOptions& options);

struct DeviceSpec {
  std::size_t id = 0;
  std::size_t capacity = 4;   // queued partitions
  std::size_t blocks = 0;     // worker blocks; 0 picks a share of the machine
  std::size_t lanes = 32;
};

/// Reads {"devices": [{"id", "capacity", "blocks", "lanes"}, ...]} or
/// {"count": n, "capacity": c, "blocks": b, "lanes": l}.
std::vector<DeviceSpec> load_devices(const std::string& path);
std::vector<DeviceSpec> make_devices(std::size_t count, std::size_t capacity = 4, std::size_t blocks = 0);

/// Position on the unit circle [0, 1).
double circle_position(std::uint64_t key, std::uint64_t seed);

// Consistent hashing with bounded loads.
class ChblScheduler {
 public:
  ChblScheduler(std::vector<DeviceSpec> devices, std::uint64_t seed);

  const std::vector<DeviceSpec>& devices() const { return devices_; }
  double device_position(std::size_t device) const { return positions_[device]; }

  /// Device index for key given current queue lengths: first device
  /// clockwise from the key's position with load < capacity, else the least
  /// loaded (lowest index on ties), reported through fallback.
  std::size_t pick(std::uint64_t key, const std::vector<std::size_t>& loads, bool* fallback) const;

 private:
  std::vector<DeviceSpec> devices_;
  std::vector<double> positions_;
  std::vector<std::size_t> clockwise_;  // device indices sorted by position
  std::uint64_t seed_;
};

struct ScheduleResult {
  std::vector<std::size_t> device_of;          // per partition
  std::vector<std::size_t> fallback_partitions;  // admitted over capacity
};

/// Static admission: each partition joins a device queue in order and
/// queues never drain.
ScheduleResult schedule(const std::vector<DataPartition>& partitions, const std::vector<DeviceSpec>& devices,
                        std::uint64_t seed);

std::uint64_t partition_key(const DataPartition& p);

}  // namespace mdblock
