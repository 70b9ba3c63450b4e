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

#ifndef G2V_EMBEDDING_CACHE_HPP_
#define G2V_EMBEDDING_CACHE_HPP_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "g2v/temporal_graph.hpp"

namespace g2v {

struct LinkKey {
  NodeId u = 0;
  NodeId v = 0;
  double t_star = 0.0;
  uint64_t config_hash = 0;

  bool operator==(const LinkKey& o) const;
  bool operator<(const LinkKey& o) const;
};

struct LinkKeyHash {
  size_t operator()(const LinkKey& k) const;
};

// The frozen link embedding: the pair's persistent spatio-temporal summary.
struct LinkEmbedding {
  LinkKey key;
  std::vector<float> vec;
};

// .gve: "GVE1", u32 d_vid, u64 config hash, u64 count, then per record
// u64 u, u64 v, f64 t*, d_vid x f32. Little-endian. All records share the
// header's config hash.
std::string EncodeGve(uint64_t config_hash, size_t d_vid,
                      std::span<const LinkEmbedding> records);

struct GveFile {
  size_t d_vid = 0;
  uint64_t config_hash = 0;
  std::vector<LinkEmbedding> records;
};

// Throws kBadMagic, kTruncatedFile; kDimMismatch when expected_d_vid is
// nonzero and differs from the header.
GveFile DecodeGve(std::span<const char> bytes, size_t expected_d_vid = 0);

// In-memory map of link embeddings, optionally persisted to a directory of
// .gve shards plus a manifest carrying a CRC32 per entry.
//
// Readers proceed concurrently; inserts take an exclusive lock. Concurrent
// misses on one key may both compute; the first insert wins and the values
// are identical anyway.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(size_t d_vid);
  // Loads whatever the directory already holds. Entries whose checksum does
  // not match are quarantined and recomputed on first access.
  EmbeddingCache(size_t d_vid, std::filesystem::path dir);

  EmbeddingCache(EmbeddingCache&& other) noexcept;

  size_t d_vid() const { return d_vid_; }

  std::vector<float> GetOrCompute(const LinkKey& key,
                                  const std::function<std::vector<float>()>& compute);
  std::optional<std::vector<float>> Find(const LinkKey& key) const;
  // Overwrites any existing value.
  void Insert(const LinkKey& key, std::vector<float> vec);

  // Appends entries not yet on disk as a new shard and records them in the
  // manifest. No-op for memory-only caches.
  void Flush();

  size_t size() const;
  uint64_t hits() const { return hits_.load(); }
  uint64_t misses() const { return misses_.load(); }
  uint64_t corrupt_recomputed() const { return corrupt_recomputed_.load(); }
  size_t quarantined() const;

  // Sorted by key for reproducible export.
  std::vector<LinkEmbedding> Entries() const;

 private:
  void Load();

  size_t d_vid_;
  std::optional<std::filesystem::path> dir_;
  mutable std::shared_mutex mu_;
  std::unordered_map<LinkKey, std::vector<float>, LinkKeyHash> map_;
  std::unordered_set<LinkKey, LinkKeyHash> quarantine_;
  std::vector<LinkKey> pending_;
  size_t next_shard_ = 0;
  std::atomic<uint64_t> hits_{0};
  std::atomic<uint64_t> misses_{0};
  std::atomic<uint64_t> corrupt_recomputed_{0};
};

// Loads a .gve file (e.g. one produced by an external encoder) into a cache.
EmbeddingCache ImportEmbeddings(const std::string& path, size_t expected_d_vid);

// Writes all entries carrying `config_hash` as one .gve file.
void ExportEmbeddings(const EmbeddingCache& cache, uint64_t config_hash,
                      const std::string& path);

}  // namespace g2v

#endif  // G2V_EMBEDDING_CACHE_HPP_
