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

#ifndef G2V_GRAPH_VIDEO_HPP_
#define G2V_GRAPH_VIDEO_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "g2v/raster.hpp"
#include "g2v/temporal_graph.hpp"

namespace g2v {

struct ColorSpec {
  Rgb background{255, 255, 255};
  Rgb endpoint{220, 20, 20};
  Rgb neighbor_u{40, 90, 200};
  Rgb neighbor_v{30, 150, 60};
  Rgb dummy{150, 150, 150};
  // Indexed by normalized edge age, 0 = window start, 255 = t*.
  std::array<Rgb, 256> edge_colormap{};

  // Viridis-like ramp through five control colors, integer interpolated.
  static ColorSpec Default();
};

struct FrameSpec {
  int frames = 16;
  int hops = 1;
  int neighbors = 16;
  int height = 64;
  int width = 64;
  ColorSpec palette = ColorSpec::Default();

  // Throws Error(kInvalidValue) when an invariant is violated.
  void Validate() const;
  std::string CanonicalString() const;
  // FNV-1a-64 of CanonicalString().
  uint64_t ConfigHash() const;

  int endpoint_radius() const { return height / 16; }
  int neighbor_radius() const { return std::max(1, height / 32); }
};

inline constexpr double kWindowEpsilon = 1e-9;

// t_i = t0 + i (t* - t0) / F for i = 1..F, with the last entry exactly t*.
std::vector<double> SliceWindow(double t0, double t_star, int frames);

enum class NodeRole { kEndpoint, kNeighbor, kDummy };
enum class Side { kU, kV };

struct PlacedNode {
  NodeId id = kDummyNode;
  NodeRole role = NodeRole::kDummy;
  Side side = Side::kU;
  int slot = -1;  // -1 for endpoints

  bool operator==(const PlacedNode&) const = default;
};

struct FrameEdge {
  NodeId a = 0;  // a <= b
  NodeId b = 0;
  double t = 0.0;

  bool operator==(const FrameEdge&) const = default;
};

// Nodes are ordered: endpoint u, endpoint v, u-side slots 0..s-1, v-side
// slots 0..s-1. Edges are sorted by (t, a, b).
struct SubgraphFrame {
  double t = 0.0;
  std::vector<PlacedNode> nodes;
  std::vector<FrameEdge> edges;

  const PlacedNode* Find(NodeId id) const;
};

// Builds the frame at t_i. When `previous` (the frame before, same query) is
// given, neighbors that stay on a side keep their slot; newcomers fill the
// free slots in recency order.
SubgraphFrame InduceFrame(NodeId u, NodeId v, double t_i, double t_star,
                          const FrameSpec& spec, const NeighborIndex& index,
                          const SubgraphFrame* previous = nullptr);

// The frame drawn when the pair has no history: endpoints plus dummies.
SubgraphFrame EmptyFrame(NodeId u, NodeId v, const FrameSpec& spec);

// All F frames of the query, in order, with slot stability applied.
std::vector<SubgraphFrame> InduceFrames(NodeId u, NodeId v, double t_star,
                                        const FrameSpec& spec,
                                        const NeighborIndex& index);

// Pixel anchor of an endpoint (slot = -1) or a side slot.
Point NodeAnchor(const FrameSpec& spec, Side side, int slot);

int EdgeColorIndex(double t_edge, double t0, double t_star);

// [3][H][W] bytes.
std::vector<uint8_t> RenderFrame(const SubgraphFrame& frame, double t0,
                                 double t_star, const FrameSpec& spec);

struct VideoKey {
  NodeId u = 0;
  NodeId v = 0;
  double t_star = 0.0;
  uint64_t config_hash = 0;

  bool operator==(const VideoKey& o) const;
};

struct GraphVideo {
  VideoKey key;
  int frames = 0;
  int channels = 3;
  int height = 0;
  int width = 0;
  std::vector<uint8_t> pixels;  // [F][3][H][W]

  size_t frame_bytes() const { return static_cast<size_t>(channels) * height * width; }
  uint8_t At(int f, int c, int y, int x) const {
    return pixels[static_cast<size_t>(f) * frame_bytes() +
                  (static_cast<size_t>(c) * height + y) * width + x];
  }
};

GraphVideo BuildGraphVideo(NodeId u, NodeId v, double t_star,
                           const FrameSpec& spec, const NeighborIndex& index);

// .gvf frame stack: "GVF1", u32 F, C, H, W, u64 config hash, u64 u, u64 v,
// f64 t*, then F*C*H*W bytes. Little-endian.
std::string EncodeGvf(const GraphVideo& video);
GraphVideo DecodeGvf(std::span<const char> bytes);
void WriteGvf(const GraphVideo& video, const std::string& path);
GraphVideo ReadGvf(const std::string& path);

// Inspection only: one RGB PNG of frame f.
void WriteFramePng(const GraphVideo& video, int f, const std::string& path);

}  // namespace g2v

#endif  // G2V_GRAPH_VIDEO_HPP_
