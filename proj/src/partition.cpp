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

#include "mdblock/partition.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "mdblock/error.hpp"
#include "mdblock/minhash.hpp"
#include "mdblock/text.hpp"

namespace mdblock {

std::vector<Partitioner> derive_partitioners(const ExecutionTree& tree, const ExecutionPath& path) {
  std::vector<Partitioner> out;
  const auto roots = visit_order(tree, 0);
  for (std::size_t b = 0; b < roots.size(); ++b) {
    Partitioner part;
    part.branch_id = b;
    part.root_child = roots[b];
    part.predicate = path.slots.at(tree.nodes[roots[b]].predicate);
    const auto& p = part.predicate;
    if (p.predicate.is_const() || p.predicate.cross_attribute()) {
      part.kind = KeyKind::kUniversal;
    } else if (p.predicate.op == Comparator::kEq) {
      part.kind = KeyKind::kExact;
    } else if (p.measure->kind != MeasureKind::kCustom && p.measure->symmetric) {
      part.kind = KeyKind::kMinHash;
    } else {
      part.kind = KeyKind::kUniversal;
    }
    out.push_back(std::move(part));
  }
  return out;
}

PartitionSet partition_branch(const Relation& relation, const Partitioner& partitioner,
                              const PartitionOptions& options, std::size_t first_pid) {
  if (options.bands == 0 || options.rows_per_band == 0) throw ConfigError("MinHash banding needs bands and rows");
  const auto& bp = partitioner.predicate;
  const std::size_t attr = bp.lhs_index;
  const bool minhash = partitioner.kind == KeyKind::kMinHash;
  const MinHasher hasher(minhash ? options.bands * options.rows_per_band : 0, options.seed);

  std::unordered_map<std::string, std::size_t> group_of_key;
  std::vector<std::vector<Tid>> groups;
  // Groups seen per band key, for bands after the first.
  std::vector<std::map<std::uint64_t, std::vector<std::size_t>>> band_groups(
      minhash ? options.bands - 1 : 0);

  for (const auto& t : relation.tuples()) {
    const auto& v = t.values[attr];
    std::string key;
    std::vector<std::uint64_t> sig;
    bool missing = false;
    switch (partitioner.kind) {
      case KeyKind::kUniversal:
        key = "*";
        break;
      case KeyKind::kExact:
        if (v.is_missing()) {
          missing = true;
        } else {
          key = "=" + equality_key(v);
        }
        break;
      case KeyKind::kMinHash:
        if (v.is_missing()) {
          missing = true;
        } else {
          sig = hasher.signature(shingles(v.str(), bp.measure->kind, bp.measure->fold_case));
          key = "#" + std::to_string(band_key(sig, 0, options.rows_per_band));
        }
        break;
    }
    std::size_t g;
    if (missing) {
      g = groups.size();
      groups.emplace_back();
    } else {
      auto [it, inserted] = group_of_key.emplace(key, groups.size());
      if (inserted) groups.emplace_back();
      g = it->second;
    }
    groups[g].push_back(t.tid);
    for (std::size_t b = 1; minhash && !missing && b < options.bands; ++b) {
      auto& bucket = band_groups[b - 1][band_key(sig, b, options.rows_per_band)];
      if (bucket.empty() || bucket.back() != g) bucket.push_back(g);
    }
  }

  PartitionSet out;
  std::vector<std::vector<std::size_t>> pieces(groups.size());
  std::set<PartitionPull> pulls;
  const std::size_t cap = options.max_partition_size;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& members = groups[g];
    const std::size_t count = cap == 0 ? 1 : std::max<std::size_t>(1, (members.size() + cap - 1) / cap);
    const std::size_t base = out.partitions.size();
    for (std::size_t k = 0; k < count; ++k) {
      DataPartition p;
      p.pid = first_pid + base + k;
      p.branch_id = partitioner.branch_id;
      out.partitions.push_back(std::move(p));
      pieces[g].push_back(base + k);
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      out.partitions[base + i % count].tuple_refs.push_back(members[i]);
    }
    for (std::size_t a = 0; a < count; ++a) {
      for (std::size_t b = a + 1; b < count; ++b) pulls.insert({base + a, base + b});
    }
  }
  for (const auto& bands : band_groups) {
    for (const auto& [key, gs] : bands) {
      std::vector<std::size_t> uniq(gs.begin(), gs.end());
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      for (std::size_t i = 0; i < uniq.size(); ++i) {
        for (std::size_t j = i + 1; j < uniq.size(); ++j) {
          for (auto pa : pieces[uniq[i]]) {
            for (auto pb : pieces[uniq[j]]) pulls.insert({std::min(pa, pb), std::max(pa, pb)});
          }
        }
      }
    }
  }
  for (const auto& pl : pulls) out.pulls.push_back({first_pid + pl.a, first_pid + pl.b});
  return out;
}

PartitionSet partition_relation(const Relation& relation, const std::vector<Partitioner>& partitioners,
                                const PartitionOptions& options) {
  if (partitioners.empty()) throw ConfigError("partitioning needs at least one partitioner");
  PartitionSet out;
  for (const auto& part : partitioners) {
    auto branch = partition_branch(relation, part, options, out.partitions.size());
    for (auto& p : branch.partitions) out.partitions.push_back(std::move(p));
    for (const auto& pl : branch.pulls) out.pulls.push_back(pl);
  }
  return out;
}

std::vector<DeviceSpec> make_devices(std::size_t count, std::size_t capacity, std::size_t blocks) {
  if (count == 0) throw ConfigError("need at least one device");
  if (capacity == 0) throw ConfigError("device capacity must be at least 1");
  std::vector<DeviceSpec> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i].id = i;
    out[i].capacity = capacity;
    out[i].blocks = blocks;
  }
  return out;
}

std::vector<DeviceSpec> load_devices(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open device config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("device config '" + path + "': " + e.what());
  }
  auto field = [](const nlohmann::json& o, const char* name, std::size_t fallback) -> std::size_t {
    if (!o.contains(name)) return fallback;
    if (!o[name].is_number_unsigned()) throw ConfigError(std::string("device field '") + name + "' must be a non-negative integer");
    return o[name].get<std::size_t>();
  };
  if (j.contains("devices")) {
    std::vector<DeviceSpec> out;
    std::set<std::size_t> ids;
    for (const auto& d : j["devices"]) {
      DeviceSpec spec;
      spec.id = field(d, "id", out.size());
      spec.capacity = field(d, "capacity", 4);
      spec.blocks = field(d, "blocks", 0);
      spec.lanes = field(d, "lanes", 32);
      if (spec.capacity == 0) throw ConfigError("device capacity must be at least 1");
      if (!ids.insert(spec.id).second) throw ConfigError("duplicate device id " + std::to_string(spec.id));
      out.push_back(spec);
    }
    if (out.empty()) throw ConfigError("device config lists no devices");
    return out;
  }
  auto out = make_devices(field(j, "count", 1), field(j, "capacity", 4), field(j, "blocks", 0));
  for (auto& d : out) d.lanes = field(j, "lanes", 32);
  return out;
}

double circle_position(std::uint64_t key, std::uint64_t seed) {
  return static_cast<double>(text::mix64(key ^ text::mix64(seed)) >> 11) * 0x1.0p-53;
}

ChblScheduler::ChblScheduler(std::vector<DeviceSpec> devices, std::uint64_t seed)
    : devices_(std::move(devices)), seed_(seed) {
  if (devices_.empty()) throw ConfigError("scheduling needs at least one device");
  for (const auto& d : devices_) positions_.push_back(circle_position(text::mix64(d.id + 0x5bd1e995ULL), seed));
  clockwise_.resize(devices_.size());
  for (std::size_t i = 0; i < clockwise_.size(); ++i) clockwise_[i] = i;
  std::stable_sort(clockwise_.begin(), clockwise_.end(),
                   [&](std::size_t a, std::size_t b) { return positions_[a] < positions_[b]; });
}

std::size_t ChblScheduler::pick(std::uint64_t key, const std::vector<std::size_t>& loads, bool* fallback) const {
  const double pos = circle_position(key, seed_);
  const auto first = std::lower_bound(clockwise_.begin(), clockwise_.end(), pos,
                                      [&](std::size_t d, double p) { return positions_[d] < p; });
  const std::size_t start = static_cast<std::size_t>(first - clockwise_.begin());
  for (std::size_t i = 0; i < clockwise_.size(); ++i) {
    const std::size_t d = clockwise_[(start + i) % clockwise_.size()];
    if (loads[d] < devices_[d].capacity) {
      if (fallback) *fallback = false;
      return d;
    }
  }
  if (fallback) *fallback = true;
  return static_cast<std::size_t>(std::min_element(loads.begin(), loads.end()) - loads.begin());
}

std::uint64_t partition_key(const DataPartition& p) {
  const std::uint64_t branch = p.branch_id ? *p.branch_id + 1 : 0;
  return text::mix64(text::mix64(p.pid) ^ (branch << 48));
}

ScheduleResult schedule(const std::vector<DataPartition>& partitions, const std::vector<DeviceSpec>& devices,
                        std::uint64_t seed) {
  ChblScheduler sched(devices, seed);
  ScheduleResult out;
  std::vector<std::size_t> loads(devices.size(), 0);
  for (std::size_t i = 0; i < partitions.size(); ++i) {
    bool fallback = false;
    const std::size_t d = sched.pick(partition_key(partitions[i]), loads, &fallback);
    ++loads[d];
    out.device_of.push_back(d);
    if (fallback) out.fallback_partitions.push_back(i);
  }
  return out;
}

}  // namespace mdblock
