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

#ifndef G2V_TEMPORAL_GRAPH_HPP_
#define G2V_TEMPORAL_GRAPH_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace g2v {

using NodeId = uint64_t;

// Reserved for placeholder nodes in rendered frames; never a valid event
// endpoint.
inline constexpr NodeId kDummyNode = std::numeric_limits<NodeId>::max();

struct Event {
  NodeId src = 0;
  NodeId dst = 0;
  double t = 0.0;
  std::vector<float> edge_feat;

  bool operator==(const Event&) const = default;
};

// Chronologically ordered interaction log. Immutable once built.
class TemporalGraph {
 public:
  TemporalGraph() = default;

  // Validates ordering, feature widths and ids. num_nodes of 0 means
  // "max id + 1".
  TemporalGraph(std::vector<Event> events, size_t num_nodes = 0,
                size_t node_feat_dim = 0);

  std::span<const Event> events() const { return events_; }
  const Event& event(size_t i) const { return events_[i]; }
  size_t size() const { return events_.size(); }
  size_t num_nodes() const { return num_nodes_; }
  size_t edge_feat_dim() const { return edge_feat_dim_; }
  size_t node_feat_dim() const { return node_feat_dim_; }

  // Node features default to zeros.
  void SetNodeFeature(NodeId node, std::vector<float> feat);
  std::span<const float> NodeFeature(NodeId node) const;

  // Distinct ids appearing as src or dst, ascending.
  std::vector<NodeId> ActiveNodes() const;

 private:
  std::vector<Event> events_;
  size_t num_nodes_ = 0;
  size_t edge_feat_dim_ = 0;
  size_t node_feat_dim_ = 0;
  std::vector<std::vector<float>> node_feat_;
  std::vector<float> zero_node_feat_;
};

struct IngestOptions {
  // Stable-sort rows by timestamp instead of rejecting out-of-order input.
  bool sort = false;
};

// Parses `src,dst,ts[,f0,f1,...]` CSV. Throws Error with kMalformedRow,
// kNonMonotonicTimestamp or kInconsistentFeatureWidth (line numbers are
// 1-based and count the header).
TemporalGraph IngestEvents(std::istream& in, const IngestOptions& options = {});

// Writes the canonical CSV form; IngestEvents(WriteEvents(g)) == g.
void WriteEvents(const TemporalGraph& graph, std::ostream& out);

struct SplitRatios {
  double train = 0.70;
  double val = 0.15;
};

struct SplitSpec {
  size_t train_end_idx = 0;
  size_t val_end_idx = 0;
  std::vector<NodeId> new_node_set;  // sorted
  uint64_t seed = 0;

  bool IsNewNode(NodeId node) const;
  // Training events that survive inductive masking: index < train_end_idx
  // and neither endpoint held out.
  bool IsRetainedTrainEvent(const TemporalGraph& graph, size_t idx) const;
  std::vector<size_t> RetainedTrainEvents(const TemporalGraph& graph) const;
};

inline constexpr double kNewNodeFraction = 0.10;

SplitSpec ChronologicalSplit(const TemporalGraph& graph,
                             const SplitRatios& ratios, uint64_t seed);

struct NeighborEntry {
  NodeId neighbor = 0;
  size_t event_idx = 0;
  double t = 0.0;
};

struct RecentNeighbor {
  NodeId node = 0;
  double t_last = 0.0;

  bool operator==(const RecentNeighbor&) const = default;
};

// Per-node time-sorted adjacency over an undirected view of the log: event
// (u, v, t) lists v under u and u under v.
class NeighborIndex {
 public:
  NeighborIndex() = default;
  explicit NeighborIndex(const TemporalGraph& graph);
  // Only events whose index passes `keep` are indexed.
  NeighborIndex(const TemporalGraph& graph,
                const std::function<bool(size_t)>& keep);

  // Up to `s` distinct 1-hop neighbors of x with interaction time < t,
  // most recent first; ties go to the smaller id. Only k = 1 is supported.
  std::vector<RecentNeighbor> TemporalNeighbors(NodeId x, double t,
                                                size_t s,
                                                int hops = 1) const;

  // The `m` most recent adjacency entries of x strictly before t, newest
  // first (not deduplicated).
  std::vector<NeighborEntry> RecentEvents(NodeId x, double t, size_t m) const;

  // Entries of x with time < t (ascending).
  std::span<const NeighborEntry> History(NodeId x, double t) const;
  // Entries of x with time <= t (ascending).
  std::span<const NeighborEntry> HistoryInclusive(NodeId x, double t) const;

  // min t over events incident on u or v with t < t_star.
  std::optional<double> EarliestIncidentTime(NodeId u, NodeId v,
                                             double t_star) const;

  size_t total_entries() const { return total_entries_; }
  size_t num_nodes() const { return adjacency_.size(); }
  std::span<const NeighborEntry> Adjacency(NodeId x) const;

 private:
  void Build(const TemporalGraph& graph,
             const std::function<bool(size_t)>* keep);

  std::vector<std::vector<NeighborEntry>> adjacency_;
  size_t total_entries_ = 0;
};

}  // namespace g2v

#endif  // G2V_TEMPORAL_GRAPH_HPP_
