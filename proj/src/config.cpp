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

#include "g2v/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "g2v/binary_io.hpp"
#include "g2v/error.hpp"
#include "g2v/hash.hpp"

namespace g2v {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void Invalid(std::string_view key, std::string_view value) {
  throw Error(ErrorKind::kInvalidValue, std::string(key) + "=" + std::string(value));
}

template <typename T>
T ParseNumber(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) Invalid(key, value);
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) Invalid(key, value);
  }
  return out;
}

std::string FormatDouble(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct Field {
  std::function<void(RunConfig&, std::string_view, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field Num(T RunConfig::*member) {
  return {[member](RunConfig& c, std::string_view k, std::string_view v) {
            c.*member = ParseNumber<T>(k, v);
          },
          [member](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return FormatDouble(c.*member);
            } else {
              return std::to_string(c.*member);
            }
          }};
}

Field Str(std::string RunConfig::*member) {
  return {[member](RunConfig& c, std::string_view, std::string_view v) { c.*member = v; },
          [member](const RunConfig& c) { return c.*member; }};
}

template <typename E>
Field Enum(E RunConfig::*member, E (*parse)(std::string_view), std::string_view (*name)(E)) {
  return {[=](RunConfig& c, std::string_view k, std::string_view v) {
            try {
              c.*member = parse(v);
            } catch (const Error&) {
              Invalid(k, v);
            }
          },
          [=](const RunConfig& c) { return std::string(name(c.*member)); }};
}

const std::map<std::string, Field, std::less<>>& Fields() {
  static const auto* fields = new std::map<std::string, Field, std::less<>>{
      {"frames", Num(&RunConfig::frames)},
      {"hops", Num(&RunConfig::hops)},
      {"neighbors", Num(&RunConfig::neighbors)},
      {"height", Num(&RunConfig::height)},
      {"width", Num(&RunConfig::width)},
      {"d_vid", Num(&RunConfig::d_vid)},
      {"d_model", Num(&RunConfig::d_model)},
      {"tube_frames", Num(&RunConfig::tube_frames)},
      {"patch", Num(&RunConfig::patch)},
      {"encoder_heads", Num(&RunConfig::encoder_heads)},
      {"encoder_mlp_hidden", Num(&RunConfig::encoder_mlp_hidden)},
      {"encoder_seed", Num(&RunConfig::encoder_seed)},
      {"backbone", Str(&RunConfig::backbone)},
      {"time_dim", Num(&RunConfig::time_dim)},
      {"recent_events", Num(&RunConfig::recent_events)},
      {"node_dim", Num(&RunConfig::node_dim)},
      {"backbone_hidden", Num(&RunConfig::backbone_hidden)},
      {"fusion", Enum(&RunConfig::fusion, &ParseFusionStrategy, &FusionStrategyName)},
      {"alpha", Num(&RunConfig::alpha)},
      {"gate", Enum(&RunConfig::gate, &ParseGateMode, &GateModeName)},
      {"fusion_heads", Num(&RunConfig::fusion_heads)},
      {"ffn_hidden", Num(&RunConfig::ffn_hidden)},
      {"fusion_mlp_hidden", Num(&RunConfig::fusion_mlp_hidden)},
      {"predictor_hidden", Num(&RunConfig::predictor_hidden)},
      {"lr", Num(&RunConfig::lr)},
      {"video_lr", Num(&RunConfig::video_lr)},
      {"grad_scale", Num(&RunConfig::grad_scale)},
      {"batch_size", Num(&RunConfig::batch_size)},
      {"max_epochs", Num(&RunConfig::max_epochs)},
      {"patience", Num(&RunConfig::patience)},
      {"seeds",
       {[](RunConfig& c, std::string_view k, std::string_view v) {
          try {
            c.seeds = ParseSeedList(v);
          } catch (const Error&) {
            Invalid(k, v);
          }
        },
        [](const RunConfig& c) {
          std::string out;
          for (size_t i = 0; i < c.seeds.size(); ++i) {
            if (i != 0) out += ',';
            out += std::to_string(c.seeds[i]);
          }
          return out;
        }}},
      {"train_ratio", Num(&RunConfig::train_ratio)},
      {"val_ratio", Num(&RunConfig::val_ratio)},
      {"split_seed", Num(&RunConfig::split_seed)},
      {"setting", Enum(&RunConfig::setting, &ParseEvalSetting, &EvalSettingName)},
      {"strategy", Enum(&RunConfig::strategy, &ParseNegStrategy, &NegStrategyName)},
      {"gradcheck_h", Num(&RunConfig::gradcheck_h)},
      {"gradcheck_params", Num(&RunConfig::gradcheck_params)},
      {"gradcheck_batch", Num(&RunConfig::gradcheck_batch)},
      {"threads", Num(&RunConfig::threads)},
      {"events", Str(&RunConfig::events)},
      {"embeddings", Str(&RunConfig::embeddings)},
      {"cache_dir", Str(&RunConfig::cache_dir)},
      {"out_dir", Str(&RunConfig::out_dir)},
  };
  return *fields;
}

}  // namespace

std::vector<uint64_t> ParseSeedList(std::string_view text) {
  text = Trim(text);
  std::vector<uint64_t> out;
  if (const auto dots = text.find(".."); dots != std::string_view::npos) {
    const auto lo = ParseNumber<uint64_t>("seeds", Trim(text.substr(0, dots)));
    const auto hi = ParseNumber<uint64_t>("seeds", Trim(text.substr(dots + 2)));
    if (hi < lo || hi - lo > 1000) Invalid("seeds", text);
    for (uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const size_t len = comma == std::string_view::npos ? text.npos : comma - pos;
    const auto item = Trim(text.substr(pos, len));
    out.push_back(ParseNumber<uint64_t>("seeds", item));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

void SetConfigValue(RunConfig& config, std::string_view key, std::string_view value) {
  const auto& fields = Fields();
  const auto it = fields.find(key);
  if (it == fields.end()) throw Error(ErrorKind::kUnknownKey, std::string(key));
  it->second.set(config, key, value);
}

RunConfig ParseConfig(std::string_view text) {
  RunConfig config;
  size_t line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::kUnknownKey,
                  "line " + std::to_string(line_no) + ": expected key=value");
    }
    const auto key = Trim(line.substr(0, eq));
    const auto value = Trim(line.substr(eq + 1));
    const auto& fields = Fields();
    const auto it = fields.find(key);
    if (it == fields.end()) {
      throw Error(ErrorKind::kUnknownKey,
                  "line " + std::to_string(line_no) + ": " + std::string(key));
    }
    it->second.set(config, key, value);
  }
  config.Validate();
  return config;
}

RunConfig LoadConfig(const std::string& path) {
  const std::string text = io::ReadFile(path);
  return ParseConfig(text);
}

void RunConfig::Validate() const {
  const auto check = [this](bool ok, std::string_view key) {
    if (!ok) Invalid(key, Fields().find(key)->second.get(*this));
  };
  check(neighbors >= 1, "neighbors");
  check(hops == 1, "hops");
  check(frames >= 1, "frames");
  check(height >= 32, "height");
  check(width >= 32, "width");
  check(d_vid >= 1, "d_vid");
  check(d_model >= 1, "d_model");
  check(tube_frames >= 1 && frames % tube_frames == 0, "tube_frames");
  check(patch >= 1 && height % patch == 0 && width % patch == 0, "patch");
  check(encoder_heads >= 1 && d_model % encoder_heads == 0, "encoder_heads");
  check(encoder_mlp_hidden >= 1, "encoder_mlp_hidden");
  const auto registered = RegisteredDynamicEncoders();
  check(std::find(registered.begin(), registered.end(), backbone) != registered.end(), "backbone");
  check(time_dim >= 1, "time_dim");
  check(recent_events >= 1, "recent_events");
  check(node_dim >= 1, "node_dim");
  check(backbone_hidden >= 1, "backbone_hidden");
  check(alpha >= 0.0 && alpha <= 1.0, "alpha");
  check(gate == GateMode::kFixed || (alpha > 0.0 && alpha < 1.0), "gate");
  check(fusion_heads >= 1 && node_dim % fusion_heads == 0, "fusion_heads");
  check(ffn_hidden >= 1, "ffn_hidden");
  check(fusion_mlp_hidden >= 1, "fusion_mlp_hidden");
  check(predictor_hidden >= 1, "predictor_hidden");
  check(lr > 0.0, "lr");
  check(video_lr > 0.0, "video_lr");
  check(grad_scale >= 0.0, "grad_scale");
  check(batch_size >= 1, "batch_size");
  check(max_epochs >= 1, "max_epochs");
  check(patience >= 1, "patience");
  check(!seeds.empty(), "seeds");
  check(train_ratio > 0.0 && train_ratio < 1.0, "train_ratio");
  check(val_ratio > 0.0 && train_ratio + val_ratio < 1.0, "val_ratio");
  check(gradcheck_h > 0.0, "gradcheck_h");
  check(gradcheck_params >= 1, "gradcheck_params");
  check(gradcheck_batch >= 1, "gradcheck_batch");
  check(threads >= 1, "threads");
}

std::string RunConfig::ToText() const {
  std::string out;
  for (const auto& [key, field] : Fields()) out += key + "=" + field.get(*this) + "\n";
  return out;
}

uint64_t RunConfig::Hash() const { return Fnv1a64(ToText()); }

FrameSpec RunConfig::Frame() const {
  FrameSpec spec;
  spec.frames = frames;
  spec.hops = hops;
  spec.neighbors = neighbors;
  spec.height = height;
  spec.width = width;
  return spec;
}

EncoderConfig RunConfig::Encoder() const {
  EncoderConfig c;
  c.d_vid = d_vid;
  c.d_model = d_model;
  c.tube_frames = tube_frames;
  c.patch = patch;
  c.heads = encoder_heads;
  c.mlp_hidden = encoder_mlp_hidden;
  c.seed = encoder_seed;
  return c;
}

EncoderSpec RunConfig::Backbone() const { return {time_dim, recent_events, node_dim}; }

SplitRatios RunConfig::Ratios() const { return {train_ratio, val_ratio}; }

ModelConfig RunConfig::Model(uint64_t seed) const {
  ModelConfig m;
  m.backbone_hidden = backbone_hidden;
  m.node_dim = node_dim;
  m.d_vid = d_vid;
  m.fusion = fusion;
  m.fusion_heads = fusion_heads;
  m.ffn_hidden = ffn_hidden;
  m.fusion_mlp_hidden = fusion_mlp_hidden;
  m.predictor_hidden = predictor_hidden;
  m.alpha = alpha;
  m.gate = gate;
  m.seed = seed;
  return m;
}

TrainConfig RunConfig::Train(uint64_t seed) const {
  TrainConfig t;
  t.lr = lr;
  t.video_lr = video_lr;
  t.grad_scale = grad_scale;
  t.batch_size = batch_size;
  t.max_epochs = max_epochs;
  t.patience = patience;
  t.seed = seed;
  return t;
}

PipelineOptions RunConfig::Pipeline() const {
  PipelineOptions p;
  p.backbone = backbone;
  p.encoder_spec = Backbone();
  p.threads = threads;
  return p;
}

}  // namespace g2v
