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

#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "canonical_videos.hpp"
#include "encoder_golden.hpp"
#include "g2v/error.hpp"
#include "g2v/graph_video.hpp"
#include "g2v/hash.hpp"
#include "test_util.hpp"

namespace g2v {
namespace {

// Plain double-precision reading of the documented pipeline, written without
// reference to the library's loops.
class ReferenceEncoder {
 public:
  explicit ReferenceEncoder(const EncoderConfig& c) : c_(c) {
    uint64_t s = c.seed;
    const int token_dim = c.tube_frames * 3 * c.patch * c.patch;
    const int d = c.d_model;
    w_patch_ = Draw(s, token_dim, d);
    w_q_ = Draw(s, d, d);
    w_k_ = Draw(s, d, d);
    w_v_ = Draw(s, d, d);
    w_o_ = Draw(s, d, d);
    w_1_ = Draw(s, d, c.mlp_hidden);
    w_2_ = Draw(s, c.mlp_hidden, d);
    w_out_ = Draw(s, d, c.d_vid);
  }

  std::vector<double> Encode(const std::vector<uint8_t>& px, int F, int H, int W) const {
    const int ft = c_.tube_frames, p = c_.patch, d = c_.d_model;
    const int gt = F / ft, gh = H / p, gw = W / p;
    const int n = gt * gh * gw;
    Mat tokens(n);
    for (int t = 0; t < gt; ++t) {
      for (int i = 0; i < gh; ++i) {
        for (int j = 0; j < gw; ++j) {
          auto& tok = tokens[(t * gh + i) * gw + j];
          for (int dt = 0; dt < ft; ++dt) {
            for (int ch = 0; ch < 3; ++ch) {
              for (int dy = 0; dy < p; ++dy) {
                for (int dx = 0; dx < p; ++dx) {
                  const size_t at = ((static_cast<size_t>(t * ft + dt) * 3 + ch) * H +
                                     (i * p + dy)) * W + (j * p + dx);
                  tok.push_back(px[at] / 255.0);
                }
              }
            }
          }
        }
      }
    }
    Mat x = Mul(tokens, w_patch_);
    for (int r = 0; r < n; ++r) {
      for (int k = 0; k < d; ++k) {
        const int pair = k - k % 2;
        const double angle = r / std::pow(10000.0, static_cast<double>(pair) / d);
        x[r][k] += (k % 2 == 0) ? std::sin(angle) : std::cos(angle);
      }
    }
    const Mat q = Mul(x, w_q_), kk = Mul(x, w_k_), v = Mul(x, w_v_);
    const int dh = d / c_.heads;
    Mat att(n, std::vector<double>(d, 0.0));
    for (int h = 0; h < c_.heads; ++h) {
      for (int a = 0; a < n; ++a) {
        std::vector<double> logits(n);
        for (int b = 0; b < n; ++b) {
          double dot = 0.0;
          for (int e = 0; e < dh; ++e) dot += q[a][h * dh + e] * kk[b][h * dh + e];
          logits[b] = dot / std::sqrt(static_cast<double>(dh));
        }
        const double top = *std::max_element(logits.begin(), logits.end());
        double z = 0.0;
        for (double& l : logits) z += (l = std::exp(l - top));
        for (int b = 0; b < n; ++b) {
          for (int e = 0; e < dh; ++e) att[a][h * dh + e] += logits[b] / z * v[b][h * dh + e];
        }
      }
    }
    const Mat o = Mul(att, w_o_);
    for (int r = 0; r < n; ++r) {
      for (int k = 0; k < d; ++k) x[r][k] += o[r][k];
      double mean = 0.0, var = 0.0;
      for (double e : x[r]) mean += e / d;
      for (double e : x[r]) var += (e - mean) * (e - mean) / d;
      for (double& e : x[r]) e = (e - mean) / std::sqrt(var + 1e-5);
    }
    Mat hid = Mul(x, w_1_);
    for (auto& row : hid) {
      for (double& e : row) e = std::max(0.0, e);
    }
    const Mat m = Mul(hid, w_2_);
    Mat pooled(1, std::vector<double>(d, 0.0));
    for (int r = 0; r < n; ++r) {
      for (int k = 0; k < d; ++k) pooled[0][k] += (x[r][k] + m[r][k]) / n;
    }
    return Mul(pooled, w_out_)[0];
  }

 private:
  using Mat = std::vector<std::vector<double>>;

  static uint64_t Next(uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static Mat Draw(uint64_t& s, int in, int out) {
    const double a = std::sqrt(6.0 / (in + out));
    Mat m(in, std::vector<double>(out));
    for (auto& row : m) {
      for (double& w : row) {
        const double u = std::ldexp(static_cast<double>(Next(s) >> 11), -53);
        w = static_cast<float>((2.0 * u - 1.0) * a);
      }
    }
    return m;
  }

  static Mat Mul(const Mat& x, const Mat& w) {
    Mat y(x.size(), std::vector<double>(w[0].size(), 0.0));
    for (size_t r = 0; r < x.size(); ++r) {
      for (size_t k = 0; k < w.size(); ++k) {
        for (size_t j = 0; j < w[0].size(); ++j) y[r][j] += x[r][k] * w[k][j];
      }
    }
    return y;
  }

  EncoderConfig c_;
  Mat w_patch_, w_q_, w_k_, w_v_, w_o_, w_1_, w_2_, w_out_;
};

EncoderConfig Small(uint64_t seed = 7) {
  EncoderConfig c;
  c.d_vid = 8;
  c.d_model = 16;
  c.tube_frames = 2;
  c.patch = 4;
  c.heads = 4;
  c.mlp_hidden = 24;
  c.seed = seed;
  return c;
}

std::vector<uint8_t> RandomPixels(size_t n, uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  std::vector<uint8_t> px(n);
  for (auto& b : px) b = static_cast<uint8_t>(byte(gen));
  return px;
}

void ExpectGolden(const std::vector<float>& got, const uint32_t (&want)[128]) {
  ASSERT_EQ(got.size(), 128u);
  for (size_t i = 0; i < 128; ++i) {
    EXPECT_EQ(std::bit_cast<uint32_t>(got[i]), want[i]) << "feature " << i;
  }
}

TEST(SplitMix64, KnownFirstOutputs) {
  uint64_t s = 0;
  EXPECT_EQ(SplitMix64(s), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(SplitMix64(s), 0x6e789e6aa1b965f4ULL);
}

TEST(EncoderConfig, ValidatesDims) {
  EncoderConfig c;
  c.heads = 3;
  EXPECT_EQ(KindOf([&] { c.Validate(); }), ErrorKind::kInvalidValue);
  c = EncoderConfig{};
  c.patch = 0;
  EXPECT_EQ(KindOf([&] { c.Validate(); }), ErrorKind::kInvalidValue);
  EXPECT_NO_THROW(EncoderConfig{}.Validate());
}

TEST(EncoderConfig, CompatibilityWithVideoShape) {
  const EncoderConfig c;
  EXPECT_NO_THROW(c.CheckCompatible(16, 64, 64));
  EXPECT_EQ(KindOf([&] { c.CheckCompatible(15, 64, 64); }), ErrorKind::kShapeMismatch);
  EXPECT_EQ(KindOf([&] { c.CheckCompatible(16, 60, 64); }), ErrorKind::kShapeMismatch);
  EXPECT_EQ(KindOf([&] { c.CheckCompatible(16, 64, 36); }), ErrorKind::kShapeMismatch);
}

TEST(EncoderConfig, HashCoversEveryField) {
  const uint64_t base = EncoderConfig{}.Hash();
  EncoderConfig c;
  c.seed = 1;
  EXPECT_NE(c.Hash(), base);
  c = EncoderConfig{};
  c.mlp_hidden = 128;
  EXPECT_NE(c.Hash(), base);
  c = EncoderConfig{};
  c.d_vid = 64;
  EXPECT_NE(c.Hash(), base);
  EXPECT_EQ(EncoderConfig{}.Hash(), base);
}

TEST(FrozenVideoEncoder, DefaultShape) {
  const FrozenVideoEncoder enc(EncoderConfig{});
  // 16/2 * 64/8 * 64/8 = 512 tokens of 2*3*8*8 = 384 values.
  const auto e = enc.Encode(canonical::Zeros(), 16, 64, 64);
  EXPECT_EQ(e.size(), 128u);
  for (float f : e) EXPECT_TRUE(std::isfinite(f));
}

TEST(FrozenVideoEncoder, RejectsBadShapes) {
  const FrozenVideoEncoder enc(EncoderConfig{});
  EXPECT_EQ(KindOf([&] { enc.Encode(std::vector<uint8_t>(10), 16, 64, 64); }),
            ErrorKind::kShapeMismatch);
  EXPECT_EQ(KindOf([&] { enc.Encode(std::vector<uint8_t>(15 * 3 * 64 * 64), 15, 64, 64); }),
            ErrorKind::kShapeMismatch);
}

TEST(FrozenVideoEncoder, GoldenZeros) {
  ASSERT_EQ(golden::kVersion, kEncoderVersion);
  ExpectGolden(FrozenVideoEncoder(EncoderConfig{}).Encode(canonical::Zeros(), 16, 64, 64),
               golden::kGoldenZeros);
}

TEST(FrozenVideoEncoder, GoldenFull) {
  ExpectGolden(FrozenVideoEncoder(EncoderConfig{}).Encode(canonical::Full(), 16, 64, 64),
               golden::kGoldenFull);
}

TEST(FrozenVideoEncoder, GoldenCheckerboard) {
  ExpectGolden(
      FrozenVideoEncoder(EncoderConfig{}).Encode(canonical::Checkerboard(), 16, 64, 64),
      golden::kGoldenChecker);
}

TEST(FrozenVideoEncoder, GoldensAgreeWithDoubleReference) {
  const ReferenceEncoder ref(EncoderConfig{});
  const FrozenVideoEncoder enc(EncoderConfig{});
  for (const auto& px : {canonical::Zeros(), canonical::Checkerboard()}) {
    const auto got = enc.Encode(px, 16, 64, 64);
    const auto want = ref.Encode(px, 16, 64, 64);
    for (size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-3) << i;
  }
}

TEST(FrozenVideoEncoder, MatchesDoubleReferenceOnRandomVideos) {
  for (uint32_t trial = 0; trial < 5; ++trial) {
    const EncoderConfig c = Small(trial);
    const auto px = RandomPixels(4 * 3 * 12 * 8, trial);
    const auto got = FrozenVideoEncoder(c).Encode(px, 4, 12, 8);
    const auto want = ReferenceEncoder(c).Encode(px, 4, 12, 8);
    ASSERT_EQ(got.size(), want.size());
    for (size_t i = 0; i < got.size(); ++i) {
      EXPECT_NEAR(got[i], want[i], 1e-4 * std::max(1.0, std::fabs(want[i])))
          << "trial " << trial << " feature " << i;
    }
  }
}

TEST(FrozenVideoEncoder, Deterministic) {
  const auto px = RandomPixels(canonical::kBytes, 3);
  const auto a = FrozenVideoEncoder(EncoderConfig{}).Encode(px, 16, 64, 64);
  const auto b = FrozenVideoEncoder(EncoderConfig{}).Encode(px, 16, 64, 64);
  EXPECT_EQ(a, b);
}

TEST(FrozenVideoEncoder, SeedSensitivity) {
  EncoderConfig other;
  other.seed = 1;
  const auto px = canonical::Checkerboard();
  EXPECT_NE(FrozenVideoEncoder(EncoderConfig{}).Encode(px, 16, 64, 64),
            FrozenVideoEncoder(other).Encode(px, 16, 64, 64));
  EXPECT_NE(FrozenVideoEncoder(EncoderConfig{}).WeightFingerprint(),
            FrozenVideoEncoder(other).WeightFingerprint());
}

TEST(FrozenVideoEncoder, NotLinear) {
  const FrozenVideoEncoder enc(EncoderConfig{});
  const auto a = canonical::Checkerboard();
  std::vector<uint8_t> b(canonical::kBytes);
  for (size_t i = 0; i < b.size(); ++i) b[i] = a[i] ? 0 : 255;
  const auto full = canonical::Full();  // a + b
  const auto ea = enc.Encode(a, 16, 64, 64);
  const auto eb = enc.Encode(b, 16, 64, 64);
  const auto eab = enc.Encode(full, 16, 64, 64);
  double gap = 0.0;
  for (size_t i = 0; i < eab.size(); ++i) {
    gap = std::max<double>(gap, std::fabs(ea[i] + eb[i] - eab[i]));
  }
  EXPECT_GT(gap, 1e-2);
}

TEST(FrozenVideoEncoder, SensitiveToContentAndPosition) {
  const FrozenVideoEncoder enc(EncoderConfig{});
  auto px = canonical::Zeros();
  const auto base = enc.Encode(px, 16, 64, 64);
  px[5] = 255;
  const auto early = enc.Encode(px, 16, 64, 64);
  EXPECT_NE(base, early);
  px[5] = 0;
  px[canonical::kBytes - 5] = 255;
  EXPECT_NE(enc.Encode(px, 16, 64, 64), early);
}

TEST(FrozenVideoEncoder, WeightsUntouchedByEncoding) {
  const FrozenVideoEncoder enc(EncoderConfig{});
  const uint64_t before = enc.WeightFingerprint();
  const auto first = enc.Encode(canonical::Checkerboard(), 16, 64, 64);
  for (uint32_t i = 0; i < 3; ++i) enc.Encode(RandomPixels(canonical::kBytes, i), 16, 64, 64);
  EXPECT_EQ(enc.WeightFingerprint(), before);
  EXPECT_EQ(enc.Encode(canonical::Checkerboard(), 16, 64, 64), first);
}

TEST(FrozenVideoEncoder, ConcurrentEncodesAgree) {
  const FrozenVideoEncoder enc(Small());
  const auto px = RandomPixels(4 * 3 * 12 * 8, 11);
  const auto want = enc.Encode(px, 4, 12, 8);
  std::vector<std::vector<float>> got(4);
  std::vector<std::thread> pool;
  for (auto& g : got) pool.emplace_back([&] { g = enc.Encode(px, 4, 12, 8); });
  for (auto& t : pool) t.join();
  for (const auto& g : got) EXPECT_EQ(g, want);
}

TEST(FrozenVideoEncoder, EncodesGraphVideo) {
  GraphVideo video;
  video.frames = 4;
  video.height = 12;
  video.width = 8;
  video.pixels = RandomPixels(4 * 3 * 12 * 8, 2);
  const FrozenVideoEncoder enc(Small());
  EXPECT_EQ(enc.Encode(video), enc.Encode(video.pixels, 4, 12, 8));
  video.channels = 1;
  EXPECT_EQ(KindOf([&] { enc.Encode(video); }), ErrorKind::kShapeMismatch);
}

}  // namespace
}  // namespace g2v
