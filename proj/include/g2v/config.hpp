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

#ifndef G2V_CONFIG_HPP_
#define G2V_CONFIG_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "g2v/evaluation.hpp"
#include "g2v/graph_video.hpp"
#include "g2v/model.hpp"
#include "g2v/pipeline.hpp"
#include "g2v/trainer.hpp"
#include "g2v/video_encoder.hpp"

namespace g2v {

// Every tunable as a flat key=value record. Defaults follow the reference
// hyperparameters (lr 1e-4, batch 200, time dim 100, patience 20, seeds
// 0..4, k = 1, F = 16, s = 16).
struct RunConfig {
  // graph video
  int frames = 16;
  int hops = 1;
  int neighbors = 16;
  int height = 64;
  int width = 64;
  // frozen encoder
  int d_vid = 128;
  int d_model = 128;
  int tube_frames = 2;
  int patch = 8;
  int encoder_heads = 4;
  int encoder_mlp_hidden = 256;
  uint64_t encoder_seed = 0;
  // backbone
  std::string backbone = "mean-mlp";
  int time_dim = 100;
  int recent_events = kDefaultRecentEvents;
  int node_dim = kDefaultNodeDim;
  int backbone_hidden = kDefaultNodeDim;
  // fusion + predictor
  FusionStrategy fusion = FusionStrategy::kAttention;
  double alpha = 0.01;
  GateMode gate = GateMode::kFixed;
  int fusion_heads = 4;
  int ffn_hidden = kDefaultNodeDim;
  int fusion_mlp_hidden = kDefaultNodeDim;
  int predictor_hidden = kDefaultNodeDim;
  // optimisation
  double lr = 1e-4;
  double video_lr = 1e-4;
  double grad_scale = 1.0;
  int batch_size = 200;
  int max_epochs = 100;
  int patience = 20;
  std::vector<uint64_t> seeds = {0, 1, 2, 3, 4};
  // split + evaluation
  double train_ratio = 0.70;
  double val_ratio = 0.15;
  uint64_t split_seed = 0;
  EvalSetting setting = EvalSetting::kTransductive;
  NegStrategy strategy = NegStrategy::kRandom;
  // gradcheck
  double gradcheck_h = 1e-3;
  int gradcheck_params = 200;
  int gradcheck_batch = 8;
  // io
  int threads = 1;
  std::string events;
  std::string embeddings;
  std::string cache_dir;
  std::string out_dir;

  // Throws Error(kInvalidValue) naming the first offending key.
  void Validate() const;
  // Canonical key=value text; ParseConfig(ToText()) reproduces the config.
  std::string ToText() const;
  uint64_t Hash() const;

  FrameSpec Frame() const;
  EncoderConfig Encoder() const;
  EncoderSpec Backbone() const;
  SplitRatios Ratios() const;
  ModelConfig Model(uint64_t seed) const;
  TrainConfig Train(uint64_t seed) const;
  PipelineOptions Pipeline() const;
};

// `#` starts a comment; blank lines are ignored. Throws
// Error(kUnknownKey) with the 1-based line number or Error(kInvalidValue)
// naming the key.
RunConfig ParseConfig(std::string_view text);
RunConfig LoadConfig(const std::string& path);

// Applies one key=value override (used for command-line --set flags).
void SetConfigValue(RunConfig& config, std::string_view key, std::string_view value);

// "0..4" or "0,1,2".
std::vector<uint64_t> ParseSeedList(std::string_view text);

}  // namespace g2v

#endif  // G2V_CONFIG_HPP_
