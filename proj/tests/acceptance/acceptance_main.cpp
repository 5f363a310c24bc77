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

#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mdblock/bench.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mdblock acceptance runner"};
  std::vector<std::string> names;
  mdblock::bench::Options options;
  options.data_dir = MDBLOCK_DATA_DIR;
  std::string tsv_dir;
  app.add_option("--criterion", names, "Suite to run (repeatable); all when omitted");
  app.add_option("--data", options.data_dir, "Data directory");
  app.add_option("--seed", options.seed, "Seed offset");
  app.add_option("--tsv-dir", tsv_dir, "Write one TSV table per suite here");
  CLI11_PARSE(app, argc, argv);

  std::vector<const mdblock::bench::Suite*> selected;
  if (names.empty()) {
    for (const auto& s : mdblock::bench::suites()) selected.push_back(&s);
  }
  for (const auto& n : names) {
    const auto* s = mdblock::bench::find_suite(n);
    if (!s) {
      std::cerr << "unknown suite: " << n << "\n";
      return 2;
    }
    selected.push_back(s);
  }

  int failures = 0;
  for (const auto* s : selected) {
    mdblock::bench::Outcome out;
    try {
      out = s->run(options);
    } catch (const std::exception& e) {
      out.suite = std::string(s->name);
      out.summary = std::string("error: ") + e.what();
    }
    out.table.write_tsv(std::cout);
    if (!tsv_dir.empty()) {
      std::ofstream f(tsv_dir + "/" + out.suite + ".tsv");
      out.table.write_tsv(f);
    }
    std::cout << (out.pass ? "PASS " : "FAIL ") << s->name << ": " << out.summary << std::endl;
    failures += !out.pass;
  }
  return failures ? 1 : 0;
}
