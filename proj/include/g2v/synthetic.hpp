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

#ifndef G2V_SYNTHETIC_HPP_
#define G2V_SYNTHETIC_HPP_

#include <cstdint>

#include "g2v/temporal_graph.hpp"

namespace g2v {

struct RandomLogOptions {
  size_t events = 200;
  size_t nodes = 30;
  // Timestamps are integers in [0, time_span); duplicates produce ties.
  uint64_t time_span = 100;
  size_t edge_feat_dim = 0;
  bool allow_self_loops = false;
};

TemporalGraph RandomLog(uint64_t seed, const RandomLogOptions& options = {});

// Hub-and-spoke stream: every event joins a fresh source node to one of
// `hubs` hub nodes (hubs receive `warmup` events each before the main
// stream). A positive (u, v) therefore always has v with at least `warmup`
// recent neighbours wired to it, while a random destination is a spoke
// with at most one incident edge or a node with no history. With
// `hub_flag`, every node carries a 1-d feature that is 1 for hubs.
struct SeparableLogOptions {
  size_t events = 5000;
  size_t hubs = 10;
  size_t warmup = 4;
  bool hub_flag = true;
};

TemporalGraph SeparableLog(uint64_t seed, const SeparableLogOptions& options = {});

// Message-network generator in the shape of the UCI online-community log:
// bursty timestamps, heavy-tailed activity, repeated conversations and
// triadic closure.
struct MessageLogOptions {
  size_t events = 5000;
  size_t nodes = 600;
  double start_time = 1082040961.0;
  double mean_gap = 120.0;
};

TemporalGraph MessageLog(uint64_t seed, const MessageLogOptions& options = {});

}  // namespace g2v

#endif  // G2V_SYNTHETIC_HPP_
