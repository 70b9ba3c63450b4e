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

#include "g2v/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "g2v/hash.hpp"

namespace g2v {

TemporalGraph RandomLog(uint64_t seed, const RandomLogOptions& o) {
  Rng rng(seed);
  std::vector<uint64_t> times(o.events);
  for (auto& t : times) t = rng.UniformIndex(std::max<uint64_t>(1, o.time_span));
  std::sort(times.begin(), times.end());
  std::vector<Event> events;
  events.reserve(o.events);
  for (size_t i = 0; i < o.events; ++i) {
    Event e;
    e.src = rng.UniformIndex(o.nodes);
    do {
      e.dst = rng.UniformIndex(o.nodes);
    } while (!o.allow_self_loops && o.nodes > 1 && e.dst == e.src);
    e.t = static_cast<double>(times[i]);
    e.edge_feat.resize(o.edge_feat_dim);
    for (auto& f : e.edge_feat) f = static_cast<float>(rng.UniformSymmetric(1.0));
    events.push_back(std::move(e));
  }
  return TemporalGraph(std::move(events), o.nodes);
}

TemporalGraph SeparableLog(uint64_t seed, const SeparableLogOptions& o) {
  Rng rng(seed);
  std::vector<Event> events;
  events.reserve(o.events);
  NodeId next = o.hubs;
  double t = 0.0;
  for (size_t w = 0; w < o.warmup && events.size() < o.events; ++w) {
    for (NodeId h = 0; h < o.hubs && events.size() < o.events; ++h) {
      events.push_back({next++, h, t, {}});
      t += 1.0;
    }
  }
  while (events.size() < o.events) {
    events.push_back({next++, rng.UniformIndex(o.hubs), t, {}});
    t += 1.0;
  }
  if (!o.hub_flag) return TemporalGraph(std::move(events), next);
  TemporalGraph graph(std::move(events), next, 1);
  for (NodeId h = 0; h < o.hubs; ++h) graph.SetNodeFeature(h, {1.0f});
  return graph;
}

TemporalGraph MessageLog(uint64_t seed, const MessageLogOptions& o) {
  Rng rng(seed);
  // Heavy-tailed activity: weight_i ~ 1 / (rank + 1)^0.9.
  std::vector<double> cumulative(o.nodes);
  double total = 0.0;
  for (size_t i = 0; i < o.nodes; ++i) {
    total += 1.0 / std::pow(static_cast<double>(i) + 1.0, 0.9);
    cumulative[i] = total;
  }
  std::vector<NodeId> perm(o.nodes);
  for (size_t i = 0; i < o.nodes; ++i) perm[i] = i;
  for (size_t i = o.nodes; i > 1; --i) std::swap(perm[i - 1], perm[rng.UniformIndex(i)]);
  const auto draw_active = [&] {
    const double x = rng.UniformUnit() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
    return perm[std::min<size_t>(static_cast<size_t>(it - cumulative.begin()), o.nodes - 1)];
  };

  std::vector<std::vector<NodeId>> contacts(o.nodes);
  std::vector<Event> events;
  events.reserve(o.events);
  double t = o.start_time;
  while (events.size() < o.events) {
    // Bursty gaps: mostly short, occasionally long pauses.
    const double u = std::max(rng.UniformUnit(), 1e-12);
    const double scale = rng.UniformUnit() < 0.1 ? o.mean_gap * 8.0 : o.mean_gap * 0.2;
    t += std::floor(-std::log(u) * scale);
    const NodeId src = draw_active();
    NodeId dst = src;
    const auto& mine = contacts[src];
    const double r = rng.UniformUnit();
    if (!mine.empty() && r < 0.55) {
      // Reply within a recent conversation.
      const size_t window = std::min<size_t>(mine.size(), 5);
      dst = mine[mine.size() - 1 - rng.UniformIndex(window)];
    } else if (!mine.empty() && r < 0.75) {
      const auto& theirs = contacts[mine[rng.UniformIndex(mine.size())]];
      if (!theirs.empty()) dst = theirs[rng.UniformIndex(theirs.size())];
    }
    while (dst == src) dst = draw_active();
    events.push_back({src, dst, t, {}});
    contacts[src].push_back(dst);
    contacts[dst].push_back(src);
  }
  return TemporalGraph(std::move(events), o.nodes);
}

}  // namespace g2v
