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

#include "g2v/hash.hpp"

#include <zlib.h>

#include <algorithm>
#include <limits>

#include "g2v/error.hpp"

namespace g2v {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMalformedRow: return "MalformedRow";
    case ErrorKind::kNonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorKind::kInconsistentFeatureWidth: return "InconsistentFeatureWidth";
    case ErrorKind::kTooFewEvents: return "TooFewEvents";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kCorruptCacheEntry: return "CorruptCacheEntry";
    case ErrorKind::kBadMagic: return "BadMagic";
    case ErrorKind::kDimMismatch: return "DimMismatch";
    case ErrorKind::kTruncatedFile: return "TruncatedFile";
    case ErrorKind::kNegativeDelta: return "NegativeDelta";
    case ErrorKind::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::kNoPositives: return "NoPositives";
    case ErrorKind::kSingleClass: return "SingleClass";
    case ErrorKind::kEmptyEvalSet: return "EmptyEvalSet";
    case ErrorKind::kUnknownKey: return "UnknownKey";
    case ErrorKind::kInvalidValue: return "InvalidValue";
    case ErrorKind::kMissingEmbedding: return "MissingEmbedding";
    case ErrorKind::kUsage: return "UsageError";
    case ErrorKind::kIo: return "IoError";
  }
  return "Unknown";
}

uint64_t Fnv1a64(std::span<const std::byte> bytes, uint64_t h) {
  for (std::byte b : bytes) {
    h ^= static_cast<uint8_t>(b);
    h *= kFnvPrime;
  }
  return h;
}

uint32_t Crc32(std::span<const std::byte> bytes, uint32_t crc) {
  // zlib takes uInt lengths; feed large buffers in chunks.
  const auto* data = reinterpret_cast<const Bytef*>(bytes.data());
  size_t remaining = bytes.size();
  uLong value = crc;
  while (remaining > 0) {
    const auto chunk = static_cast<uInt>(
        std::min<size_t>(remaining, std::numeric_limits<uInt>::max()));
    value = crc32(value, data, chunk);
    data += chunk;
    remaining -= chunk;
  }
  return static_cast<uint32_t>(value);
}

uint64_t Rng::UniformIndex(uint64_t n) {
  // Rejection sampling on the top of the range keeps every index equally
  // likely.
  const uint64_t limit = std::numeric_limits<uint64_t>::max() -
                         std::numeric_limits<uint64_t>::max() % n;
  uint64_t x;
  do {
    x = NextU64();
  } while (x >= limit);
  return x % n;
}

}  // namespace g2v

#include <filesystem>
#include <fstream>

#include "g2v/binary_io.hpp"

namespace g2v::io {

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return ReadAll(in);
}

void WriteFileAtomic(const std::string& path, std::string_view bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::kIo, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::kIo, "rename " + tmp + ": " + ec.message());
}

}  // namespace g2v::io
