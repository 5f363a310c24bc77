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

#include <cstdint>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mdblock/bench.hpp"
#include "mdblock/engine.hpp"
#include "mdblock/error.hpp"
#include "mdblock/metrics.hpp"
#include "mdblock/pipeline.hpp"
#include "mdblock/plan.hpp"
#include "mdblock/relation.hpp"
#include "mdblock/rules.hpp"

namespace {

using namespace mdblock;

struct InputFlags {
  std::string data;
  std::string rules;
  std::string eid_column;
  std::vector<std::string> categorical;
  std::string order = "epg";
  std::uint64_t seed = 42;
  std::size_t timing_samples = 500;
};

struct RunFlags {
  std::string out;
  std::string ground_truth;
  std::string gt_key;
  bool gt_from_eid = false;
  std::size_t partitions = 0;
  std::size_t devices = 1;
  std::string devices_config;
  std::size_t nt = 256;
  std::size_t nw = 1024;
  std::size_t lanes = 32;
  std::size_t blocks = 0;
  std::string stealing = "inter+intra";
  bool symmetric = true;
  bool sync = false;
  bool no_pull = false;
  std::string stats;
};

struct BenchFlags {
  std::string suite;
  std::string out;
  std::size_t devices = 8;
};

void add_input_flags(CLI::App& cmd, InputFlags& f) {
  cmd.add_option("--data", f.data, "Input relation (CSV with header)")->required()->check(CLI::ExistingFile);
  cmd.add_option("--rules", f.rules, "Rule document (JSON)")->required()->check(CLI::ExistingFile);
  cmd.add_option("--eid-column", f.eid_column, "Column holding entity ids");
  cmd.add_option("--categorical", f.categorical, "Treat this column as categorical (repeatable)");
  cmd.add_option("--order", f.order, "Predicate ordering")->check(CLI::IsMember({"epg", "random", "reversed"}));
  cmd.add_option("--seed", f.seed, "Seed for sampling, hashing and random ordering");
  cmd.add_option("--timing-samples", f.timing_samples, "Timed evaluations per predicate for the cost model")
      ->check(CLI::PositiveNumber);
}

struct Loaded {
  Relation relation;
  RuleSet rules;
  Plan plan;
};

Loaded load_and_plan(const InputFlags& f) {
  LoadOptions lo;
  if (!f.eid_column.empty()) lo.eid_attr = f.eid_column;
  for (const auto& c : f.categorical) lo.kind_hints[c] = AttrKind::kCategorical;
  auto relation = load_relation(f.data, lo);
  const auto& reg = MeasureRegistry::defaults();
  auto rules = load_ruleset(f.rules, reg);
  PlanOptions po;
  po.seed = f.seed;
  po.order = *parse_order_mode(f.order);
  po.timing_samples = f.timing_samples;
  auto plan = make_plan(relation, rules, reg, po);
  return {std::move(relation), std::move(rules), std::move(plan)};
}

void print_stats(std::ostream& os, const PipelineResult& res) {
  const auto& t = res.timings;
  os << "stage\tseconds\n"
     << "plan\t" << t.plan << "\npartition\t" << t.partition << "\nschedule\t" << t.schedule << "\nexecute\t"
     << t.execute << "\ncollect\t" << t.collect << "\ntotal\t" << t.total << "\n";
  os << "partitions\t" << res.partitions << "\ntasks\t" << res.tasks << "\npulls\t" << res.pulls << "\nfallbacks\t"
     << res.fallbacks << "\n";
  os << "device\tblock\tcomparisons\tpredicate_evals\town_intervals\tstolen_intervals\trange_steals\tbusy_s\n";
  for (std::size_t d = 0; d < res.device_stats.size(); ++d) {
    const auto& blocks = res.device_stats[d].blocks;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const auto& s = blocks[b];
      os << d << '\t' << b << '\t' << s.comparisons << '\t' << s.predicate_evals << '\t' << s.own_intervals << '\t'
         << s.stolen_intervals << '\t' << s.range_steals << '\t' << s.busy_seconds << '\n';
    }
  }
}

int cmd_run(const InputFlags& in, const RunFlags& f) {
  auto loaded = load_and_plan(in);
  for (const auto& w : loaded.plan.warnings) std::cerr << "warning: " << w << '\n';

  EngineConfig ec;
  ec.interval_size = f.nt;
  ec.window_size = f.nw;
  ec.lanes_per_block = f.lanes;
  ec.num_blocks = f.blocks;
  ec.symmetric = f.symmetric;
  ec.stealing = *parse_steal_mode(f.stealing);
  ec.inline_below = 4096;

  PipelineConfig pc;
  pc.async = !f.sync;
  pc.pull = !f.no_pull;
  pc.seed = in.seed;
  pc.partition.max_partition_size = f.partitions;
  pc.partition.seed = in.seed;

  auto devices = f.devices_config.empty() ? make_devices(f.devices) : load_devices(f.devices_config);
  for (auto& d : devices) {
    if (!f.devices_config.empty()) continue;
    d.lanes = f.lanes;
    if (f.blocks) d.blocks = f.blocks;
  }

  const auto res = pipeline_run(loaded.relation, loaded.plan, pc, ec, devices);
  const auto& pairs = res.candidates.pairs;
  if (f.out.empty() || f.out == "-") {
    write_candidates_csv(std::cout, pairs, loaded.plan.path.rule_ids);
  } else {
    std::ofstream out(f.out);
    if (!out) throw ConfigError("cannot write '" + f.out + "'");
    write_candidates_csv(out, pairs, loaded.plan.path.rule_ids);
  }

  std::ostream& report = f.out.empty() || f.out == "-" ? std::cerr : std::cout;
  report << std::setprecision(6);
  report << "tuples\t" << loaded.relation.size() << "\ncandidates\t" << pairs.size() << "\nwall_s\t"
         << res.timings.total << '\n';
  std::optional<GroundTruth> truth;
  if (!f.ground_truth.empty()) {
    truth = load_ground_truth(f.ground_truth, loaded.relation,
                              f.gt_key.empty() ? std::nullopt : std::optional<std::string>(f.gt_key));
  } else if (f.gt_from_eid) {
    truth = ground_truth_from_eid(loaded.relation);
  }
  if (truth) {
    const auto m = compute_metrics(pairs, *truth, loaded.relation.size());
    report << "ground_truth\t" << m.ground_truth << "\ntrue_positives\t" << m.true_positives << "\nprecision\t"
           << m.precision << "\nrecall\t" << m.recall << "\nf1\t" << m.f1 << "\ncssr\t" << m.cssr << '\n';
  } else {
    report << "cssr\t" << compute_metrics(pairs, GroundTruth{}, loaded.relation.size()).cssr << '\n';
  }
  if (!f.stats.empty()) {
    std::ofstream st(f.stats);
    if (!st) throw ConfigError("cannot write '" + f.stats + "'");
    print_stats(st, res);
  }
  return 0;
}

int cmd_explain(const InputFlags& in, bool json) {
  const auto loaded = load_and_plan(in);
  for (const auto& w : loaded.plan.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << (json ? plan_to_json(loaded.plan) + "\n" : explain_text(loaded.plan));
  return 0;
}

int cmd_bench(const BenchFlags& f, const std::string& data_dir, std::uint64_t seed) {
  const auto* suite = bench::find_suite(f.suite);
  if (!suite) throw ConfigError("unknown suite '" + f.suite + "'");
  bench::Options options;
  options.data_dir = data_dir;
  options.seed = seed;
  options.device_counts = f.devices > 1 ? std::vector<std::size_t>{1, f.devices} : std::vector<std::size_t>{1};
  options.inter_only_stealing = true;
  const auto outcome = suite->run(options);
  if (f.out.empty() || f.out == "-") {
    outcome.table.write_tsv(std::cout);
  } else {
    std::ofstream out(f.out);
    if (!out) throw ConfigError("cannot write '" + f.out + "'");
    outcome.table.write_tsv(out);
  }
  std::cerr << (outcome.pass ? "PASS " : "FAIL ") << suite->name << ": " << outcome.summary << '\n';
  return outcome.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rule-based blocking: candidate pairs from matching rules"};
  app.set_config("--config", "", "TOML file with flag values");
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  InputFlags run_in;
  RunFlags run;
  auto* run_cmd = app.add_subcommand("run", "Generate candidate pairs");
  add_input_flags(*run_cmd, run_in);
  run_cmd->add_option("--out", run.out, "Candidate CSV (default stdout)");
  run_cmd->add_option("--ground-truth", run.ground_truth, "Two-column CSV of matching pairs")
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--gt-key", run.gt_key, "Column the ground-truth cells refer to (default: tids)");
  run_cmd->add_flag("--gt-from-eid", run.gt_from_eid, "Ground truth = all pairs sharing the eid column");
  run_cmd->add_option("--partitions", run.partitions, "Cap on tuples per partition (0: unbounded)");
  run_cmd->add_option("--devices", run.devices, "Number of simulated devices")->check(CLI::PositiveNumber);
  run_cmd->add_option("--devices-config", run.devices_config, "Device topology (JSON)")->check(CLI::ExistingFile);
  run_cmd->add_option("--nt", run.nt, "Interval size in tuples")->check(CLI::PositiveNumber);
  run_cmd->add_option("--nw", run.nw, "Window size in intervals")->check(CLI::PositiveNumber);
  run_cmd->add_option("--lanes", run.lanes, "Lanes per block")->check(CLI::PositiveNumber);
  run_cmd->add_option("--blocks", run.blocks, "Worker blocks per device (0: share of the machine)");
  run_cmd->add_option("--stealing", run.stealing, "Work stealing")
      ->check(CLI::IsMember({"off", "inter", "inter+intra"}));
  run_cmd->add_option("--symmetric", run.symmetric, "Compare each unordered pair once (true/false)");
  run_cmd->add_flag("--sync", run.sync, "Run pipeline stages one after another");
  run_cmd->add_flag("--no-pull", run.no_pull, "Skip cross-partition pulls");
  run_cmd->add_option("--stats", run.stats, "Write stage timings and per-block counters (TSV)");

  InputFlags explain_in;
  bool explain_json = false;
  auto* explain_cmd = app.add_subcommand("explain", "Print the predicate ordering, execution tree and path");
  add_input_flags(*explain_cmd, explain_in);
  explain_cmd->add_flag("--json", explain_json, "Emit JSON instead of text");

  BenchFlags bench_flags;
  std::string bench_data = "data";
  std::uint64_t bench_seed = 0;
  auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark suite and print its table as TSV");
  std::vector<std::string> names;
  for (const auto& s : mdblock::bench::suites()) {
    names.emplace_back(s.alias);
    if (s.alias != s.name) names.emplace_back(s.name);
  }
  bench_cmd->add_option("--suite", bench_flags.suite, "Suite name")->required()->check(CLI::IsMember(names));
  bench_cmd->add_option("--out", bench_flags.out, "TSV output (default stdout)");
  bench_cmd->add_option("--data", bench_data, "Directory with bundled datasets");
  bench_cmd->add_option("--devices", bench_flags.devices, "Device count compared against one device (scaling)")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench_seed, "Seed offset");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run_in, run);
    if (*explain_cmd) return cmd_explain(explain_in, explain_json);
    return cmd_bench(bench_flags, bench_data, bench_seed);
  } catch (const mdblock::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
