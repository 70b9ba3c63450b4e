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

#ifndef G2V_VIDEO_ENCODER_HPP_
#define G2V_VIDEO_ENCODER_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "g2v/graph_video.hpp"

namespace g2v {

// Bump whenever the encoder arithmetic or weight generation changes; the
// golden embeddings in the tests are tied to this value.
inline constexpr int kEncoderVersion = 1;

struct EncoderConfig {
  int d_vid = 128;
  int d_model = 128;
  int tube_frames = 2;
  int patch = 8;
  int heads = 4;
  int mlp_hidden = 256;
  uint64_t seed = 0;

  void Validate() const;
  // Throws kShapeMismatch unless frames % tube_frames == 0 and
  // height, width are multiples of patch.
  void CheckCompatible(int frames, int height, int width) const;
  std::string CanonicalString() const;
  uint64_t Hash() const;
};

// Seeded, frozen spatio-temporal transformer standing in for a pretrained
// video backbone. Pipeline per video:
//
//   1. pixels u8 -> f32 / 255
//   2. tubelets of tube_frames x patch x patch, N = (F/ft)(H/p)(W/p) tokens,
//      each flattened in (dt, channel, dy, dx) order; tokens ordered by
//      (t, h, w)
//   3. x = tokens * W_patch + sinusoidal position code of the token index
//   4. x = x + MHSA(x) * W_o   (softmax(q k^T / sqrt(d_head)) per head)
//   5. x = LayerNorm(x), no affine parameters, eps 1e-5
//   6. x = x + relu(x * W_1) * W_2
//   7. e = mean over tokens of x, then e * W_out
//
// Weights come from a single splitmix64 stream seeded with `seed`, drawn in
// the order W_patch, W_q, W_k, W_v, W_o, W_1, W_2, W_out. Every matrix is
// stored [in][out] and filled row-major with uniform(-a, a),
// a = sqrt(6 / (fan_in + fan_out)). All arithmetic is f32 and each output
// element is accumulated in a fixed sequential order, so results are
// bit-reproducible.
class FrozenVideoEncoder {
 public:
  explicit FrozenVideoEncoder(const EncoderConfig& config);

  const EncoderConfig& config() const { return config_; }

  std::vector<float> Encode(const GraphVideo& video) const;
  std::vector<float> Encode(std::span<const uint8_t> pixels, int frames, int height,
                            int width) const;

  // FNV-1a over every weight byte; lets tests prove nothing mutates them.
  uint64_t WeightFingerprint() const;

 private:
  struct Matrix {
    int in = 0;
    int out = 0;
    std::vector<float> w;  // [in][out]
  };

  EncoderConfig config_;
  Matrix patch_;
  Matrix q_, k_, v_, o_;
  Matrix mlp1_, mlp2_;
  Matrix head_;
};

}  // namespace g2v

#endif  // G2V_VIDEO_ENCODER_HPP_
