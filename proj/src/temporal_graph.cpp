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

#include "g2v/temporal_graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "g2v/error.hpp"
#include "g2v/hash.hpp"

namespace g2v {
namespace {

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
bool ParseNumber(std::string_view text, T& out) {
  text = Trim(text);
  if (text.empty()) return false;
  if constexpr (std::is_floating_point_v<T>) {
    if (text.front() == '+') text.remove_prefix(1);
  }
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

Error RowError(ErrorKind kind, size_t line, const std::string& what) {
  return Error(kind, "line " + std::to_string(line) + ": " + what);
}

template <typename T>
void AppendNumber(std::string& out, T value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

}  // namespace

TemporalGraph::TemporalGraph(std::vector<Event> events, size_t num_nodes,
                             size_t node_feat_dim)
    : events_(std::move(events)), node_feat_dim_(node_feat_dim) {
  NodeId max_id = 0;
  for (size_t i = 0; i < events_.size(); ++i) {
    const Event& e = events_[i];
    if (!std::isfinite(e.t)) {
      throw Error(ErrorKind::kInvalidValue,
                  "event " + std::to_string(i) + " has a non-finite timestamp");
    }
    if (e.src == kDummyNode || e.dst == kDummyNode) {
      throw Error(ErrorKind::kInvalidValue,
                  "event " + std::to_string(i) + " uses the reserved dummy id");
    }
    if (i > 0 && e.t < events_[i - 1].t) {
      throw Error(ErrorKind::kNonMonotonicTimestamp,
                  "event " + std::to_string(i) + " precedes its predecessor");
    }
    if (i == 0) {
      edge_feat_dim_ = e.edge_feat.size();
    } else if (e.edge_feat.size() != edge_feat_dim_) {
      throw Error(ErrorKind::kInconsistentFeatureWidth,
                  "event " + std::to_string(i) + " has " +
                      std::to_string(e.edge_feat.size()) + " features, expected " +
                      std::to_string(edge_feat_dim_));
    }
    max_id = std::max({max_id, e.src, e.dst});
  }
  const size_t implied = events_.empty() ? 0 : static_cast<size_t>(max_id) + 1;
  if (num_nodes != 0 && num_nodes < implied) {
    throw Error(ErrorKind::kInvalidValue,
                "num_nodes " + std::to_string(num_nodes) + " below max id + 1");
  }
  num_nodes_ = num_nodes == 0 ? implied : num_nodes;
  zero_node_feat_.assign(node_feat_dim_, 0.0f);
}

void TemporalGraph::SetNodeFeature(NodeId node, std::vector<float> feat) {
  if (node >= num_nodes_) {
    throw Error(ErrorKind::kInvalidValue, "node id out of range");
  }
  if (feat.size() != node_feat_dim_) {
    throw Error(ErrorKind::kInconsistentFeatureWidth, "node feature width");
  }
  if (node_feat_.size() < num_nodes_) node_feat_.resize(num_nodes_);
  node_feat_[node] = std::move(feat);
}

std::span<const float> TemporalGraph::NodeFeature(NodeId node) const {
  if (node < node_feat_.size() && !node_feat_[node].empty()) {
    return node_feat_[node];
  }
  return zero_node_feat_;
}

std::vector<NodeId> TemporalGraph::ActiveNodes() const {
  std::vector<NodeId> nodes;
  nodes.reserve(events_.size() * 2);
  for (const Event& e : events_) {
    nodes.push_back(e.src);
    nodes.push_back(e.dst);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

TemporalGraph IngestEvents(std::istream& in, const IngestOptions& options) {
  std::string line;
  size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw RowError(ErrorKind::kMalformedRow, 1, "missing header");
  }
  ++line_no;
  const auto header = SplitFields(Trim(line));
  if (header.size() < 3 || Trim(header[0]) != "src" || Trim(header[1]) != "dst" ||
      Trim(header[2]) != "ts") {
    throw RowError(ErrorKind::kMalformedRow, 1, "header must start with src,dst,ts");
  }
  const size_t width = header.size() - 3;

  std::vector<Event> events;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = Trim(line);
    if (row.empty()) continue;
    const auto fields = SplitFields(row);
    if (fields.size() < 3) {
      throw RowError(ErrorKind::kMalformedRow, line_no, "expected at least 3 fields");
    }
    if (fields.size() != 3 + width) {
      throw RowError(ErrorKind::kInconsistentFeatureWidth, line_no,
                     "expected " + std::to_string(width) + " features, got " +
                         std::to_string(fields.size() - 3));
    }
    Event e;
    if (!ParseNumber(fields[0], e.src) || !ParseNumber(fields[1], e.dst) ||
        !ParseNumber(fields[2], e.t) || !std::isfinite(e.t) ||
        e.src == kDummyNode || e.dst == kDummyNode) {
      throw RowError(ErrorKind::kMalformedRow, line_no, "bad src/dst/ts");
    }
    e.edge_feat.resize(width);
    for (size_t j = 0; j < width; ++j) {
      if (!ParseNumber(fields[3 + j], e.edge_feat[j])) {
        throw RowError(ErrorKind::kMalformedRow, line_no,
                       "bad feature column " + std::to_string(j));
      }
    }
    if (!options.sort && !events.empty() && e.t < events.back().t) {
      throw RowError(ErrorKind::kNonMonotonicTimestamp, line_no,
                     "timestamp decreases");
    }
    events.push_back(std::move(e));
  }
  if (options.sort) {
    std::stable_sort(events.begin(), events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
  }
  return TemporalGraph(std::move(events));
}

void WriteEvents(const TemporalGraph& graph, std::ostream& out) {
  std::string buf = "src,dst,ts";
  for (size_t j = 0; j < graph.edge_feat_dim(); ++j) {
    buf += ",f";
    AppendNumber(buf, j);
  }
  buf += '\n';
  for (const Event& e : graph.events()) {
    AppendNumber(buf, e.src);
    buf += ',';
    AppendNumber(buf, e.dst);
    buf += ',';
    AppendNumber(buf, e.t);
    for (float f : e.edge_feat) {
      buf += ',';
      AppendNumber(buf, f);
    }
    buf += '\n';
  }
  out << buf;
}

bool SplitSpec::IsNewNode(NodeId node) const {
  return std::binary_search(new_node_set.begin(), new_node_set.end(), node);
}

bool SplitSpec::IsRetainedTrainEvent(const TemporalGraph& graph, size_t idx) const {
  if (idx >= train_end_idx) return false;
  const Event& e = graph.event(idx);
  return !IsNewNode(e.src) && !IsNewNode(e.dst);
}

std::vector<size_t> SplitSpec::RetainedTrainEvents(const TemporalGraph& graph) const {
  std::vector<size_t> out;
  out.reserve(train_end_idx);
  for (size_t i = 0; i < train_end_idx; ++i) {
    if (IsRetainedTrainEvent(graph, i)) out.push_back(i);
  }
  return out;
}

SplitSpec ChronologicalSplit(const TemporalGraph& graph, const SplitRatios& ratios,
                             uint64_t seed) {
  const size_t n = graph.size();
  if (n < 10) {
    throw Error(ErrorKind::kTooFewEvents,
                "need at least 10 events, got " + std::to_string(n));
  }
  if (ratios.train < 0 || ratios.val < 0 || ratios.train + ratios.val > 1.0) {
    throw Error(ErrorKind::kInvalidValue, "split ratios");
  }
  // The small epsilon keeps e.g. 0.7 * 100 from flooring to 69.
  const auto count = [n](double r) {
    return static_cast<size_t>(std::floor(r * static_cast<double>(n) + 1e-9));
  };
  SplitSpec split;
  split.seed = seed;
  split.train_end_idx = count(ratios.train);
  split.val_end_idx = split.train_end_idx + count(ratios.val);

  std::vector<NodeId> candidates;
  for (size_t i = split.train_end_idx; i < n; ++i) {
    candidates.push_back(graph.event(i).src);
    candidates.push_back(graph.event(i).dst);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  const size_t total = graph.ActiveNodes().size();
  const size_t want = std::min(
      candidates.size(),
      static_cast<size_t>(std::floor(kNewNodeFraction * static_cast<double>(total))));
  Rng rng(seed);
  for (size_t i = 0; i < want; ++i) {
    const size_t j = i + rng.UniformIndex(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(want);
  std::sort(candidates.begin(), candidates.end());
  split.new_node_set = std::move(candidates);
  return split;
}

NeighborIndex::NeighborIndex(const TemporalGraph& graph) { Build(graph, nullptr); }

NeighborIndex::NeighborIndex(const TemporalGraph& graph,
                             const std::function<bool(size_t)>& keep) {
  Build(graph, &keep);
}

void NeighborIndex::Build(const TemporalGraph& graph,
                          const std::function<bool(size_t)>* keep) {
  adjacency_.assign(graph.num_nodes(), {});
  total_entries_ = 0;
  // Events arrive time-sorted, so appending keeps every list sorted by
  // (t, event index).
  for (size_t i = 0; i < graph.size(); ++i) {
    if (keep != nullptr && !(*keep)(i)) continue;
    const Event& e = graph.event(i);
    adjacency_[e.src].push_back({e.dst, i, e.t});
    adjacency_[e.dst].push_back({e.src, i, e.t});
    total_entries_ += 2;
  }
}

std::span<const NeighborEntry> NeighborIndex::Adjacency(NodeId x) const {
  if (x >= adjacency_.size()) return {};
  return adjacency_[x];
}

std::span<const NeighborEntry> NeighborIndex::History(NodeId x, double t) const {
  const auto list = Adjacency(x);
  const auto end = std::lower_bound(
      list.begin(), list.end(), t,
      [](const NeighborEntry& entry, double value) { return entry.t < value; });
  return list.first(static_cast<size_t>(end - list.begin()));
}

std::span<const NeighborEntry> NeighborIndex::HistoryInclusive(NodeId x,
                                                               double t) const {
  const auto list = Adjacency(x);
  const auto end = std::upper_bound(
      list.begin(), list.end(), t,
      [](double value, const NeighborEntry& entry) { return value < entry.t; });
  return list.first(static_cast<size_t>(end - list.begin()));
}

std::vector<RecentNeighbor> NeighborIndex::TemporalNeighbors(NodeId x, double t,
                                                             size_t s,
                                                             int hops) const {
  if (hops != 1) {
    throw Error(ErrorKind::kInvalidValue, "only 1-hop neighborhoods are supported");
  }
  std::vector<RecentNeighbor> found;
  if (s == 0) return found;
  const auto history = History(x, t);
  // Walk newest to oldest. The first sighting of a neighbor is its latest
  // time. Once s neighbors are known, keep scanning only through entries
  // tied with the s-th time so the id tie-break sees every candidate.
  for (auto it = history.rbegin(); it != history.rend(); ++it) {
    if (found.size() >= s && it->t < found[s - 1].t_last) break;
    if (it->neighbor == x) continue;
    const bool seen = std::any_of(found.begin(), found.end(), [&](const RecentNeighbor& r) {
      return r.node == it->neighbor;
    });
    if (!seen) found.push_back({it->neighbor, it->t});
  }
  std::sort(found.begin(), found.end(), [](const RecentNeighbor& a, const RecentNeighbor& b) {
    if (a.t_last != b.t_last) return a.t_last > b.t_last;
    return a.node < b.node;
  });
  if (found.size() > s) found.resize(s);
  return found;
}

std::vector<NeighborEntry> NeighborIndex::RecentEvents(NodeId x, double t,
                                                       size_t m) const {
  const auto history = History(x, t);
  const size_t take = std::min(m, history.size());
  std::vector<NeighborEntry> out(history.rbegin(), history.rbegin() + take);
  return out;
}

std::optional<double> NeighborIndex::EarliestIncidentTime(NodeId u, NodeId v,
                                                          double t_star) const {
  std::optional<double> best;
  for (NodeId x : {u, v}) {
    const auto list = Adjacency(x);
    if (!list.empty() && list.front().t < t_star) {
      best = best ? std::min(*best, list.front().t) : list.front().t;
    }
  }
  return best;
}

}  // namespace g2v
