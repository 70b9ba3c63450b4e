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

#ifndef G2V_HASH_HPP_
#define G2V_HASH_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace g2v {

inline constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr uint64_t Fnv1a64(std::string_view text, uint64_t h = kFnvOffset) {
  for (char c : text) {
    h ^= static_cast<uint8_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

uint64_t Fnv1a64(std::span<const std::byte> bytes, uint64_t h = kFnvOffset);

// CRC-32 (IEEE 802.3, as in zlib/PNG).
uint32_t Crc32(std::span<const std::byte> bytes, uint32_t crc = 0);
inline uint32_t Crc32(std::string_view text) {
  return Crc32(std::as_bytes(std::span<const char>(text.data(), text.size())));
}

template <typename T>
std::span<const std::byte> AsBytes(std::span<const T> values) {
  return std::as_bytes(values);
}

// One step of the splitmix64 generator: advances `state` and returns the
// next output.
constexpr uint64_t SplitMix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Order-dependent combination of two 64-bit values; used to derive
// sub-seeds such as (run seed, batch index).
constexpr uint64_t MixSeed(uint64_t a, uint64_t b) {
  uint64_t state = a ^ (b * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL);
  SplitMix64(state);
  return SplitMix64(state);
}

// Small deterministic generator on top of splitmix64. Unlike the standard
// distributions its output is identical on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t NextU64() { return SplitMix64(state_); }

  // Uniform in [0, n) without modulo bias. n must be positive.
  uint64_t UniformIndex(uint64_t n);

  // Uniform in [0, 1) with 53 bits of resolution.
  double UniformUnit() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  // Uniform in (-a, a) computed in double; callers cast as needed.
  double UniformSymmetric(double a) { return (2.0 * UniformUnit() - 1.0) * a; }

 private:
  uint64_t state_;
};

}  // namespace g2v

#endif  // G2V_HASH_HPP_
