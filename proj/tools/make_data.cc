/*
 * Copyright 2026 The g2v Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Writes a synthetic message-network log in the bundled CSV format.
//   g2v_make_data --seed 7 --events 5000 --out data/uci_message_5k.csv

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "g2v/synthetic.hpp"
#include "g2v/temporal_graph.hpp"

int main(int argc, char** argv) {
  CLI::App app{"g2v_make_data"};
  uint64_t seed = 7;
  g2v::MessageLogOptions options;
  std::string out;
  app.add_option("--seed", seed);
  app.add_option("--events", options.events);
  app.add_option("--nodes", options.nodes);
  app.add_option("--out", out)->required();
  CLI11_PARSE(app, argc, argv);
  std::ofstream file(out);
  g2v::WriteEvents(g2v::MessageLog(seed, options), file);
  if (!file) {
    std::cerr << "error: Io: cannot write " << out << "\n";
    return 1;
  }
  return 0;
}
