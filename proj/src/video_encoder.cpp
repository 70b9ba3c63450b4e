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

#include "g2v/video_encoder.hpp"

#include <algorithm>
#include <cmath>

#include "g2v/error.hpp"
#include "g2v/hash.hpp"

namespace g2v {
namespace {

// y[n][j] = sum_k x[n][k] w[k][j], summed over k in order for every element.
void MatMul(std::span<const float> x, int rows, int in, std::span<const float> w, int out,
            std::span<float> y) {
  for (int n = 0; n < rows; ++n) {
    float* yn = y.data() + static_cast<size_t>(n) * out;
    std::fill_n(yn, out, 0.0f);
    const float* xn = x.data() + static_cast<size_t>(n) * in;
    for (int k = 0; k < in; ++k) {
      const float xk = xn[k];
      const float* wk = w.data() + static_cast<size_t>(k) * out;
      for (int j = 0; j < out; ++j) yn[j] += xk * wk[j];
    }
  }
}

}  // namespace

void EncoderConfig::Validate() const {
  const auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kInvalidValue, "encoder config: " + what);
  };
  if (d_vid < 1 || d_model < 1 || mlp_hidden < 1) fail("dimensions must be positive");
  if (tube_frames < 1 || patch < 1) fail("tubelet size must be positive");
  if (heads < 1 || d_model % heads != 0) fail("d_model must be divisible by heads");
}

void EncoderConfig::CheckCompatible(int frames, int height, int width) const {
  if (frames % tube_frames != 0 || height % patch != 0 || width % patch != 0) {
    throw Error(ErrorKind::kShapeMismatch,
                "video " + std::to_string(frames) + "x3x" + std::to_string(height) + "x" +
                    std::to_string(width) + " does not tile into tubelets of " +
                    std::to_string(tube_frames) + "x" + std::to_string(patch) + "x" +
                    std::to_string(patch));
  }
}

std::string EncoderConfig::CanonicalString() const {
  return "g2v-encoder/" + std::to_string(kEncoderVersion) +
         ";d_vid=" + std::to_string(d_vid) + ";d_model=" + std::to_string(d_model) +
         ";ft=" + std::to_string(tube_frames) + ";p=" + std::to_string(patch) +
         ";heads=" + std::to_string(heads) + ";mlp=" + std::to_string(mlp_hidden) +
         ";seed=" + std::to_string(seed);
}

uint64_t EncoderConfig::Hash() const { return Fnv1a64(CanonicalString()); }

FrozenVideoEncoder::FrozenVideoEncoder(const EncoderConfig& config) : config_(config) {
  config_.Validate();
  uint64_t state = config_.seed;
  const auto draw = [&state](int in, int out) {
    Matrix m{in, out, std::vector<float>(static_cast<size_t>(in) * out)};
    const double a = std::sqrt(6.0 / (in + out));
    for (float& w : m.w) {
      const double unit = static_cast<double>(SplitMix64(state) >> 11) * 0x1.0p-53;
      w = static_cast<float>((2.0 * unit - 1.0) * a);
    }
    return m;
  };
  const int token_dim = config_.tube_frames * 3 * config_.patch * config_.patch;
  const int d = config_.d_model;
  patch_ = draw(token_dim, d);
  q_ = draw(d, d);
  k_ = draw(d, d);
  v_ = draw(d, d);
  o_ = draw(d, d);
  mlp1_ = draw(d, config_.mlp_hidden);
  mlp2_ = draw(config_.mlp_hidden, d);
  head_ = draw(d, config_.d_vid);
}

uint64_t FrozenVideoEncoder::WeightFingerprint() const {
  uint64_t h = kFnvOffset;
  for (const Matrix* m : {&patch_, &q_, &k_, &v_, &o_, &mlp1_, &mlp2_, &head_}) {
    h = Fnv1a64(std::as_bytes(std::span<const float>(m->w)), h);
  }
  return h;
}

std::vector<float> FrozenVideoEncoder::Encode(const GraphVideo& video) const {
  if (video.channels != 3) throw Error(ErrorKind::kShapeMismatch, "expected 3 channels");
  return Encode(video.pixels, video.frames, video.height, video.width);
}

std::vector<float> FrozenVideoEncoder::Encode(std::span<const uint8_t> pixels, int frames,
                                              int height, int width) const {
  config_.CheckCompatible(frames, height, width);
  if (pixels.size() != static_cast<size_t>(frames) * 3 * height * width) {
    throw Error(ErrorKind::kShapeMismatch, "pixel buffer size");
  }
  const int ft = config_.tube_frames;
  const int p = config_.patch;
  const int gt = frames / ft;
  const int gh = height / p;
  const int gw = width / p;
  const int n_tokens = gt * gh * gw;
  const int token_dim = ft * 3 * p * p;
  const int d = config_.d_model;
  const int heads = config_.heads;
  const int dh = d / heads;
  const size_t plane = static_cast<size_t>(height) * width;

  std::vector<float> tokens(static_cast<size_t>(n_tokens) * token_dim);
  for (int ti = 0; ti < gt; ++ti) {
    for (int hi = 0; hi < gh; ++hi) {
      for (int wi = 0; wi < gw; ++wi) {
        const int n = (ti * gh + hi) * gw + wi;
        float* tok = tokens.data() + static_cast<size_t>(n) * token_dim;
        int c_out = 0;
        for (int dt = 0; dt < ft; ++dt) {
          const size_t frame_off = static_cast<size_t>(ti * ft + dt) * 3 * plane;
          for (int c = 0; c < 3; ++c) {
            for (int dy = 0; dy < p; ++dy) {
              for (int dx = 0; dx < p; ++dx) {
                const size_t at = frame_off + c * plane +
                                  static_cast<size_t>(hi * p + dy) * width + (wi * p + dx);
                tok[c_out++] = static_cast<float>(pixels[at]) / 255.0f;
              }
            }
          }
        }
      }
    }
  }

  std::vector<float> x(static_cast<size_t>(n_tokens) * d);
  MatMul(tokens, n_tokens, token_dim, patch_.w, d, x);
  // Sinusoidal code of the flattened token index: sin on even features,
  // cos on odd ones, frequency 10000^(-2i/d).
  std::vector<double> freq(static_cast<size_t>(d));
  for (int i = 0; i < d; i += 2) freq[i] = std::pow(10000.0, -static_cast<double>(i) / d);
  for (int n = 0; n < n_tokens; ++n) {
    float* row = x.data() + static_cast<size_t>(n) * d;
    for (int i = 0; i < d; i += 2) {
      row[i] += static_cast<float>(std::sin(n * freq[i]));
      if (i + 1 < d) row[i + 1] += static_cast<float>(std::cos(n * freq[i]));
    }
  }

  // Self-attention.
  const size_t nd = static_cast<size_t>(n_tokens) * d;
  std::vector<float> q(nd), k(nd), v(nd), att(nd, 0.0f);
  MatMul(x, n_tokens, d, q_.w, d, q);
  MatMul(x, n_tokens, d, k_.w, d, k);
  MatMul(x, n_tokens, d, v_.w, d, v);
  const float scale = 1.0f / std::sqrt(static_cast<float>(dh));
  std::vector<float> k_t(static_cast<size_t>(dh) * n_tokens);
  std::vector<float> scores(static_cast<size_t>(n_tokens));
  for (int h = 0; h < heads; ++h) {
    for (int m = 0; m < n_tokens; ++m) {
      for (int c = 0; c < dh; ++c) {
        k_t[static_cast<size_t>(c) * n_tokens + m] = k[static_cast<size_t>(m) * d + h * dh + c];
      }
    }
    for (int n = 0; n < n_tokens; ++n) {
      const float* qn = q.data() + static_cast<size_t>(n) * d + h * dh;
      std::fill(scores.begin(), scores.end(), 0.0f);
      for (int c = 0; c < dh; ++c) {
        const float qc = qn[c];
        const float* kc = k_t.data() + static_cast<size_t>(c) * n_tokens;
        for (int m = 0; m < n_tokens; ++m) scores[m] += qc * kc[m];
      }
      float max_score = -INFINITY;
      for (int m = 0; m < n_tokens; ++m) {
        scores[m] *= scale;
        max_score = std::max(max_score, scores[m]);
      }
      float total = 0.0f;
      for (int m = 0; m < n_tokens; ++m) {
        scores[m] = std::exp(scores[m] - max_score);
        total += scores[m];
      }
      float* out = att.data() + static_cast<size_t>(n) * d + h * dh;
      for (int m = 0; m < n_tokens; ++m) {
        const float a = scores[m] / total;
        const float* vm = v.data() + static_cast<size_t>(m) * d + h * dh;
        for (int c = 0; c < dh; ++c) out[c] += a * vm[c];
      }
    }
  }
  std::vector<float> projected(nd);
  MatMul(att, n_tokens, d, o_.w, d, projected);
  for (size_t i = 0; i < nd; ++i) x[i] += projected[i];

  for (int n = 0; n < n_tokens; ++n) {
    float* row = x.data() + static_cast<size_t>(n) * d;
    float mean = 0.0f;
    for (int i = 0; i < d; ++i) mean += row[i];
    mean /= static_cast<float>(d);
    float var = 0.0f;
    for (int i = 0; i < d; ++i) var += (row[i] - mean) * (row[i] - mean);
    var /= static_cast<float>(d);
    const float inv = 1.0f / std::sqrt(var + 1e-5f);
    for (int i = 0; i < d; ++i) row[i] = (row[i] - mean) * inv;
  }

  std::vector<float> hidden(static_cast<size_t>(n_tokens) * config_.mlp_hidden);
  MatMul(x, n_tokens, d, mlp1_.w, config_.mlp_hidden, hidden);
  for (float& h : hidden) h = std::max(h, 0.0f);
  MatMul(hidden, n_tokens, config_.mlp_hidden, mlp2_.w, d, projected);
  for (size_t i = 0; i < nd; ++i) x[i] += projected[i];

  std::vector<float> pooled(static_cast<size_t>(d), 0.0f);
  for (int n = 0; n < n_tokens; ++n) {
    const float* row = x.data() + static_cast<size_t>(n) * d;
    for (int i = 0; i < d; ++i) pooled[i] += row[i];
  }
  for (float& p_i : pooled) p_i /= static_cast<float>(n_tokens);

  std::vector<float> out(static_cast<size_t>(config_.d_vid));
  MatMul(pooled, 1, d, head_.w, config_.d_vid, out);
  return out;
}

}  // namespace g2v
