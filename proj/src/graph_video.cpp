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

#include "g2v/graph_video.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "g2v/binary_io.hpp"
#include "g2v/error.hpp"
#include "g2v/hash.hpp"

namespace g2v {
namespace {

constexpr char kGvfMagic[4] = {'G', 'V', 'F', '1'};

std::string RgbString(Rgb c) {
  return std::to_string(c.r) + "," + std::to_string(c.g) + "," + std::to_string(c.b);
}

// Keeps neighbors that were on this side in `previous` at their old slot,
// then fills free slots in recency order.
std::vector<NodeId> AssignSlots(const std::vector<RecentNeighbor>& ranked, Side side,
                                int slots, const SubgraphFrame* previous) {
  std::vector<NodeId> assigned(static_cast<size_t>(slots), kDummyNode);
  std::vector<bool> placed(ranked.size(), false);
  if (previous != nullptr) {
    for (size_t i = 0; i < ranked.size(); ++i) {
      const PlacedNode* old = previous->Find(ranked[i].node);
      if (old != nullptr && old->role == NodeRole::kNeighbor && old->side == side &&
          old->slot >= 0 && old->slot < slots) {
        assigned[old->slot] = ranked[i].node;
        placed[i] = true;
      }
    }
  }
  size_t next_free = 0;
  for (size_t i = 0; i < ranked.size(); ++i) {
    if (placed[i]) continue;
    while (next_free < assigned.size() && assigned[next_free] != kDummyNode) ++next_free;
    if (next_free == assigned.size()) break;
    assigned[next_free] = ranked[i].node;
  }
  return assigned;
}

void AppendSide(SubgraphFrame& frame, const std::vector<NodeId>& slots, Side side) {
  for (size_t j = 0; j < slots.size(); ++j) {
    PlacedNode node;
    node.id = slots[j];
    node.role = slots[j] == kDummyNode ? NodeRole::kDummy : NodeRole::kNeighbor;
    node.side = side;
    node.slot = static_cast<int>(j);
    frame.nodes.push_back(node);
  }
}

}  // namespace

ColorSpec ColorSpec::Default() {
  ColorSpec spec;
  constexpr std::array<Rgb, 5> kStops = {
      Rgb{68, 1, 84}, Rgb{59, 82, 139}, Rgb{33, 145, 140}, Rgb{94, 201, 98},
      Rgb{253, 231, 37}};
  // Four segments over 255 steps; positions 0, 64, 128, 191, 255.
  constexpr std::array<int, 5> kAt = {0, 64, 128, 191, 255};
  for (int i = 0; i < 256; ++i) {
    int seg = 0;
    while (seg < 3 && i > kAt[seg + 1]) ++seg;
    const int span = kAt[seg + 1] - kAt[seg];
    const int off = i - kAt[seg];
    const auto lerp = [&](uint8_t a, uint8_t b) {
      return static_cast<uint8_t>((a * (span - off) + b * off + span / 2) / span);
    };
    const Rgb a = kStops[seg];
    const Rgb b = kStops[seg + 1];
    spec.edge_colormap[i] = {lerp(a.r, b.r), lerp(a.g, b.g), lerp(a.b, b.b)};
  }
  return spec;
}

void FrameSpec::Validate() const {
  const auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kInvalidValue, "frame spec: " + what);
  };
  if (frames < 1) fail("frames must be >= 1");
  if (hops != 1) fail("only hops = 1 is supported");
  if (neighbors < 1) fail("neighbors must be >= 1");
  if (height < 32 || width < 32) fail("height and width must be >= 32");
  const Rgb ep = palette.endpoint;
  if (ep == palette.background) fail("endpoint color equals background");
  for (const Rgb& c : palette.edge_colormap) {
    if (c == ep) fail("endpoint color appears in the edge colormap");
  }
}

std::string FrameSpec::CanonicalString() const {
  std::string cmap;
  for (const Rgb& c : palette.edge_colormap) {
    cmap += static_cast<char>(c.r);
    cmap += static_cast<char>(c.g);
    cmap += static_cast<char>(c.b);
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(cmap)));
  return "g2v-frame/1;F=" + std::to_string(frames) + ";k=" + std::to_string(hops) +
         ";s=" + std::to_string(neighbors) + ";H=" + std::to_string(height) +
         ";W=" + std::to_string(width) + ";bg=" + RgbString(palette.background) +
         ";ep=" + RgbString(palette.endpoint) + ";nu=" + RgbString(palette.neighbor_u) +
         ";nv=" + RgbString(palette.neighbor_v) + ";dm=" + RgbString(palette.dummy) +
         ";cmap=" + hex;
}

uint64_t FrameSpec::ConfigHash() const { return Fnv1a64(CanonicalString()); }

std::vector<double> SliceWindow(double t0, double t_star, int frames) {
  std::vector<double> times(static_cast<size_t>(frames));
  const double step = (t_star - t0) / frames;
  for (int i = 1; i <= frames; ++i) times[i - 1] = t0 + i * step;
  if (frames > 0) times.back() = t_star;
  return times;
}

const PlacedNode* SubgraphFrame::Find(NodeId id) const {
  for (const PlacedNode& n : nodes) {
    if (n.id == id && n.role != NodeRole::kDummy) return &n;
  }
  return nullptr;
}

SubgraphFrame EmptyFrame(NodeId u, NodeId v, const FrameSpec& spec) {
  SubgraphFrame frame;
  frame.nodes.push_back({u, NodeRole::kEndpoint, Side::kU, -1});
  frame.nodes.push_back({v, NodeRole::kEndpoint, Side::kV, -1});
  const std::vector<NodeId> none(static_cast<size_t>(spec.neighbors), kDummyNode);
  AppendSide(frame, none, Side::kU);
  AppendSide(frame, none, Side::kV);
  return frame;
}

SubgraphFrame InduceFrame(NodeId u, NodeId v, double t_i, double t_star,
                          const FrameSpec& spec, const NeighborIndex& index,
                          const SubgraphFrame* previous) {
  const auto s = static_cast<size_t>(spec.neighbors);
  auto ranked_u = index.TemporalNeighbors(u, t_i, s, spec.hops);
  auto ranked_v = index.TemporalNeighbors(v, t_i, s, spec.hops);
  const auto is_endpoint = [&](const RecentNeighbor& r) { return r.node == u || r.node == v; };
  std::erase_if(ranked_u, is_endpoint);
  std::erase_if(ranked_v, is_endpoint);

  // A shared neighbor goes to the side where it interacted most recently;
  // ties go to u.
  std::vector<NodeId> drop_u, drop_v;
  for (const RecentNeighbor& a : ranked_u) {
    for (const RecentNeighbor& b : ranked_v) {
      if (a.node != b.node) continue;
      (a.t_last >= b.t_last ? drop_v : drop_u).push_back(a.node);
    }
  }
  const auto in = [](const std::vector<NodeId>& set, NodeId id) {
    return std::find(set.begin(), set.end(), id) != set.end();
  };
  std::erase_if(ranked_u, [&](const RecentNeighbor& r) { return in(drop_u, r.node); });
  std::erase_if(ranked_v, [&](const RecentNeighbor& r) { return in(drop_v, r.node); });

  SubgraphFrame frame;
  frame.t = t_i;
  frame.nodes.push_back({u, NodeRole::kEndpoint, Side::kU, -1});
  frame.nodes.push_back({v, NodeRole::kEndpoint, Side::kV, -1});
  AppendSide(frame, AssignSlots(ranked_u, Side::kU, spec.neighbors, previous), Side::kU);
  AppendSide(frame, AssignSlots(ranked_v, Side::kV, spec.neighbors, previous), Side::kV);

  std::vector<NodeId> real;
  for (const PlacedNode& n : frame.nodes) {
    if (n.role != NodeRole::kDummy) real.push_back(n.id);
  }
  std::sort(real.begin(), real.end());
  real.erase(std::unique(real.begin(), real.end()), real.end());

  for (NodeId a : real) {
    for (const NeighborEntry& e : index.HistoryInclusive(a, t_i)) {
      if (e.t >= t_star || e.neighbor == a) continue;
      if (!std::binary_search(real.begin(), real.end(), e.neighbor)) continue;
      frame.edges.push_back({std::min(a, e.neighbor), std::max(a, e.neighbor), e.t});
    }
  }
  // Keep only the latest occurrence per pair.
  std::sort(frame.edges.begin(), frame.edges.end(), [](const FrameEdge& x, const FrameEdge& y) {
    if (x.a != y.a) return x.a < y.a;
    if (x.b != y.b) return x.b < y.b;
    return x.t > y.t;
  });
  frame.edges.erase(std::unique(frame.edges.begin(), frame.edges.end(),
                                [](const FrameEdge& x, const FrameEdge& y) {
                                  return x.a == y.a && x.b == y.b;
                                }),
                    frame.edges.end());
  std::sort(frame.edges.begin(), frame.edges.end(), [](const FrameEdge& x, const FrameEdge& y) {
    if (x.t != y.t) return x.t < y.t;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  return frame;
}

std::vector<SubgraphFrame> InduceFrames(NodeId u, NodeId v, double t_star,
                                        const FrameSpec& spec,
                                        const NeighborIndex& index) {
  std::vector<SubgraphFrame> frames;
  frames.reserve(static_cast<size_t>(spec.frames));
  const auto t0 = index.EarliestIncidentTime(u, v, t_star);
  if (!t0) {
    SubgraphFrame empty = EmptyFrame(u, v, spec);
    empty.t = t_star;
    frames.assign(static_cast<size_t>(spec.frames), empty);
    return frames;
  }
  for (double t_i : SliceWindow(*t0, t_star, spec.frames)) {
    const SubgraphFrame* previous = frames.empty() ? nullptr : &frames.back();
    frames.push_back(InduceFrame(u, v, t_i, t_star, spec, index, previous));
  }
  return frames;
}

Point NodeAnchor(const FrameSpec& spec, Side side, int slot) {
  const int w = spec.width;
  const int h = spec.height;
  if (slot < 0) {
    return side == Side::kU ? Point{w / 4, h / 2} : Point{3 * w / 4, h / 2};
  }
  // Slots sit on a circle around the canvas center: u-side on the left arc
  // (110..250 degrees), v-side mirrored on the right.
  const double radius = std::min(w, h) / 2 - spec.neighbor_radius() - 1;
  const double deg = spec.neighbors == 1
                         ? 180.0
                         : 110.0 + 140.0 * slot / (spec.neighbors - 1);
  const double rad = deg * std::numbers::pi / 180.0;
  const double dx = radius * std::cos(rad);
  const double dy = radius * std::sin(rad);
  const int cx = w / 2;
  const int cy = h / 2;
  const int x = static_cast<int>(std::lround(side == Side::kU ? cx + dx : cx - dx));
  const int y = static_cast<int>(std::lround(cy - dy));
  return {x, y};
}

int EdgeColorIndex(double t_edge, double t0, double t_star) {
  const double span = std::max(t_star - t0, kWindowEpsilon);
  const double scaled = std::floor(255.0 * (t_edge - t0) / span);
  return static_cast<int>(std::clamp(scaled, 0.0, 255.0));
}

std::vector<uint8_t> RenderFrame(const SubgraphFrame& frame, double t0,
                                 double t_star, const FrameSpec& spec) {
  const ColorSpec& pal = spec.palette;
  Canvas canvas(spec.width, spec.height, pal.background);
  const auto anchor_of = [&](NodeId id) {
    const PlacedNode* n = frame.Find(id);
    return NodeAnchor(spec, n->side, n->slot);
  };
  for (const FrameEdge& e : frame.edges) {
    canvas.DrawThickLine(anchor_of(e.a), anchor_of(e.b),
                         pal.edge_colormap[EdgeColorIndex(e.t, t0, t_star)]);
  }
  for (const PlacedNode& n : frame.nodes) {
    if (n.role == NodeRole::kEndpoint) continue;
    const Point p = NodeAnchor(spec, n.side, n.slot);
    if (n.role == NodeRole::kDummy) {
      canvas.DrawRing(p, spec.neighbor_radius(), pal.dummy);
    } else {
      canvas.FillDisk(p, spec.neighbor_radius(),
                      n.side == Side::kU ? pal.neighbor_u : pal.neighbor_v);
    }
  }
  for (const PlacedNode& n : frame.nodes) {
    if (n.role != NodeRole::kEndpoint) continue;
    canvas.FillDisk(NodeAnchor(spec, n.side, -1), spec.endpoint_radius(), pal.endpoint);
  }
  return std::move(canvas).TakePixels();
}

bool VideoKey::operator==(const VideoKey& o) const {
  return u == o.u && v == o.v && config_hash == o.config_hash &&
         std::bit_cast<uint64_t>(t_star) == std::bit_cast<uint64_t>(o.t_star);
}

GraphVideo BuildGraphVideo(NodeId u, NodeId v, double t_star, const FrameSpec& spec,
                           const NeighborIndex& index) {
  GraphVideo video;
  video.key = {u, v, t_star, spec.ConfigHash()};
  video.frames = spec.frames;
  video.height = spec.height;
  video.width = spec.width;
  video.pixels.reserve(static_cast<size_t>(spec.frames) * video.frame_bytes());

  const auto t0 = index.EarliestIncidentTime(u, v, t_star);
  if (!t0) {
    const auto frame = RenderFrame(EmptyFrame(u, v, spec), t_star, t_star, spec);
    for (int f = 0; f < spec.frames; ++f) {
      video.pixels.insert(video.pixels.end(), frame.begin(), frame.end());
    }
    return video;
  }
  for (const SubgraphFrame& frame : InduceFrames(u, v, t_star, spec, index)) {
    const auto pixels = RenderFrame(frame, *t0, t_star, spec);
    video.pixels.insert(video.pixels.end(), pixels.begin(), pixels.end());
  }
  return video;
}

std::string EncodeGvf(const GraphVideo& video) {
  std::string out(kGvfMagic, 4);
  io::PutLe(out, static_cast<uint32_t>(video.frames));
  io::PutLe(out, static_cast<uint32_t>(video.channels));
  io::PutLe(out, static_cast<uint32_t>(video.height));
  io::PutLe(out, static_cast<uint32_t>(video.width));
  io::PutLe(out, video.key.config_hash);
  io::PutLe(out, static_cast<uint64_t>(video.key.u));
  io::PutLe(out, static_cast<uint64_t>(video.key.v));
  io::PutLe(out, video.key.t_star);
  out.append(reinterpret_cast<const char*>(video.pixels.data()), video.pixels.size());
  return out;
}

GraphVideo DecodeGvf(std::span<const char> bytes) {
  io::Reader in(bytes, "gvf");
  const auto magic = in.Bytes(4);
  if (std::memcmp(magic.data(), kGvfMagic, 4) != 0) {
    throw Error(ErrorKind::kBadMagic, "not a GVF1 frame stack");
  }
  GraphVideo video;
  video.frames = static_cast<int>(in.Get<uint32_t>());
  video.channels = static_cast<int>(in.Get<uint32_t>());
  video.height = static_cast<int>(in.Get<uint32_t>());
  video.width = static_cast<int>(in.Get<uint32_t>());
  if (video.channels != 3 || video.frames < 1 || video.height < 1 || video.width < 1) {
    throw Error(ErrorKind::kShapeMismatch, "gvf header dimensions");
  }
  video.key.config_hash = in.Get<uint64_t>();
  video.key.u = in.Get<uint64_t>();
  video.key.v = in.Get<uint64_t>();
  video.key.t_star = in.Get<double>();
  const size_t n = static_cast<size_t>(video.frames) * video.frame_bytes();
  const auto payload = in.Bytes(n);
  if (in.remaining() != 0) {
    throw Error(ErrorKind::kShapeMismatch, "gvf has trailing bytes");
  }
  video.pixels.assign(reinterpret_cast<const uint8_t*>(payload.data()),
                      reinterpret_cast<const uint8_t*>(payload.data()) + n);
  return video;
}

void WriteGvf(const GraphVideo& video, const std::string& path) {
  io::WriteFileAtomic(path, EncodeGvf(video));
}

GraphVideo ReadGvf(const std::string& path) { return DecodeGvf(io::ReadFile(path)); }

void WriteFramePng(const GraphVideo& video, int f, const std::string& path) {
  const int h = video.height;
  const int w = video.width;
  std::vector<uint8_t> rgb(static_cast<size_t>(3) * h * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        rgb[(static_cast<size_t>(y) * w + x) * 3 + c] = video.At(f, c, y, x);
      }
    }
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = PNG_FORMAT_RGB;
  if (png_image_write_to_file(&image, path.c_str(), 0, rgb.data(), 0, nullptr) == 0) {
    throw Error(ErrorKind::kIo, "png write failed for " + path + ": " + image.message);
  }
}

}  // namespace g2v
