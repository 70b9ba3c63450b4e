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

#include "g2v/embedding_cache.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "g2v/binary_io.hpp"
#include "g2v/error.hpp"
#include "g2v/hash.hpp"

namespace g2v {
namespace {

constexpr char kGveMagic[4] = {'G', 'V', 'E', '1'};
constexpr const char* kManifest = "manifest.txt";

uint32_t VectorCrc(std::span<const float> vec) { return Crc32(std::as_bytes(vec)); }

std::string Hex(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

bool LinkKey::operator==(const LinkKey& o) const {
  return u == o.u && v == o.v && config_hash == o.config_hash &&
         std::bit_cast<uint64_t>(t_star) == std::bit_cast<uint64_t>(o.t_star);
}

bool LinkKey::operator<(const LinkKey& o) const {
  if (config_hash != o.config_hash) return config_hash < o.config_hash;
  if (t_star != o.t_star) return t_star < o.t_star;
  if (u != o.u) return u < o.u;
  return v < o.v;
}

size_t LinkKeyHash::operator()(const LinkKey& k) const {
  uint64_t h = MixSeed(k.u, k.v);
  h = MixSeed(h, std::bit_cast<uint64_t>(k.t_star));
  return static_cast<size_t>(MixSeed(h, k.config_hash));
}

std::string EncodeGve(uint64_t config_hash, size_t d_vid,
                      std::span<const LinkEmbedding> records) {
  std::string out(kGveMagic, 4);
  io::PutLe(out, static_cast<uint32_t>(d_vid));
  io::PutLe(out, config_hash);
  io::PutLe(out, static_cast<uint64_t>(records.size()));
  for (const LinkEmbedding& r : records) {
    if (r.vec.size() != d_vid) {
      throw Error(ErrorKind::kDimMismatch, "record width differs from d_vid");
    }
    io::PutLe(out, static_cast<uint64_t>(r.key.u));
    io::PutLe(out, static_cast<uint64_t>(r.key.v));
    io::PutLe(out, r.key.t_star);
    io::PutFloats(out, r.vec);
  }
  return out;
}

GveFile DecodeGve(std::span<const char> bytes, size_t expected_d_vid) {
  io::Reader in(bytes, "gve");
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kGveMagic, 4) != 0) {
    throw Error(ErrorKind::kBadMagic, "not a GVE1 embedding file");
  }
  in.Bytes(4);
  GveFile file;
  file.d_vid = in.Get<uint32_t>();
  if (expected_d_vid != 0 && file.d_vid != expected_d_vid) {
    throw Error(ErrorKind::kDimMismatch, "file d_vid " + std::to_string(file.d_vid) +
                                             ", run expects " +
                                             std::to_string(expected_d_vid));
  }
  file.config_hash = in.Get<uint64_t>();
  const uint64_t count = in.Get<uint64_t>();
  const size_t record_bytes = 24 + 4 * file.d_vid;
  if (count > in.remaining() / record_bytes) {
    throw Error(ErrorKind::kTruncatedFile,
                "header declares " + std::to_string(count) + " records, payload holds " +
                    std::to_string(in.remaining() / record_bytes));
  }
  file.records.resize(count);
  for (LinkEmbedding& r : file.records) {
    r.key.u = in.Get<uint64_t>();
    r.key.v = in.Get<uint64_t>();
    r.key.t_star = in.Get<double>();
    r.key.config_hash = file.config_hash;
    r.vec.resize(file.d_vid);
    for (float& f : r.vec) f = in.Get<float>();
  }
  return file;
}

EmbeddingCache::EmbeddingCache(size_t d_vid) : d_vid_(d_vid) {}

EmbeddingCache::EmbeddingCache(size_t d_vid, std::filesystem::path dir)
    : d_vid_(d_vid), dir_(std::move(dir)) {
  std::filesystem::create_directories(*dir_);
  Load();
}

EmbeddingCache::EmbeddingCache(EmbeddingCache&& other) noexcept
    : d_vid_(other.d_vid_),
      dir_(std::move(other.dir_)),
      map_(std::move(other.map_)),
      quarantine_(std::move(other.quarantine_)),
      pending_(std::move(other.pending_)),
      next_shard_(other.next_shard_),
      hits_(other.hits_.load()),
      misses_(other.misses_.load()),
      corrupt_recomputed_(other.corrupt_recomputed_.load()) {}

void EmbeddingCache::Load() {
  const auto manifest_path = *dir_ / kManifest;
  if (!std::filesystem::exists(manifest_path)) return;
  std::ifstream manifest(manifest_path);
  // Manifest line: shard u v t_bits config_hash crc32, all hex except ids.
  struct Line {
    std::string shard;
    LinkKey key;
    uint32_t crc = 0;
  };
  std::vector<Line> lines;
  std::string text;
  while (std::getline(manifest, text)) {
    if (text.empty()) continue;
    std::istringstream row(text);
    Line line;
    std::string t_bits, hash, crc;
    if (!(row >> line.shard >> line.key.u >> line.key.v >> t_bits >> hash >> crc)) {
      continue;
    }
    line.key.t_star = std::bit_cast<double>(std::stoull(t_bits, nullptr, 16));
    line.key.config_hash = std::stoull(hash, nullptr, 16);
    line.crc = static_cast<uint32_t>(std::stoul(crc, nullptr, 16));
    lines.push_back(std::move(line));
  }

  std::map<std::string, std::unordered_map<LinkKey, std::vector<float>, LinkKeyHash>> shards;
  for (const Line& line : lines) {
    if (shards.count(line.shard)) continue;
    auto& records = shards[line.shard];
    try {
      const GveFile file = DecodeGve(io::ReadFile((*dir_ / line.shard).string()), d_vid_);
      for (const LinkEmbedding& r : file.records) records[r.key] = r.vec;
    } catch (const Error&) {
      // Unreadable shard: every entry it should hold fails its checksum below.
    }
    const std::string stem = line.shard.substr(0, line.shard.find('.'));
    if (stem.rfind("shard-", 0) == 0) {
      next_shard_ = std::max(next_shard_, std::stoul(stem.substr(6)) + 1);
    }
  }
  // Later manifest lines supersede earlier ones for the same key.
  for (const Line& line : lines) {
    const auto& records = shards[line.shard];
    const auto it = records.find(line.key);
    if (it != records.end() && VectorCrc(it->second) == line.crc) {
      map_[line.key] = it->second;
      quarantine_.erase(line.key);
    } else {
      map_.erase(line.key);
      quarantine_.insert(line.key);
    }
  }
}

std::optional<std::vector<float>> EmbeddingCache::Find(const LinkKey& key) const {
  std::shared_lock lock(mu_);
  const auto it = map_.find(key);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

std::vector<float> EmbeddingCache::GetOrCompute(
    const LinkKey& key, const std::function<std::vector<float>()>& compute) {
  bool corrupt = false;
  {
    std::shared_lock lock(mu_);
    const auto it = map_.find(key);
    if (it != map_.end()) {
      ++hits_;
      return it->second;
    }
    corrupt = quarantine_.count(key) > 0;
  }
  ++misses_;
  std::vector<float> vec = compute();
  if (vec.size() != d_vid_) {
    throw Error(ErrorKind::kDimMismatch, "computed embedding has width " +
                                             std::to_string(vec.size()));
  }
  std::unique_lock lock(mu_);
  const auto [it, inserted] = map_.emplace(key, vec);
  if (inserted) {
    pending_.push_back(key);
    if (corrupt && quarantine_.erase(key) > 0) ++corrupt_recomputed_;
  }
  return it->second;
}

void EmbeddingCache::Insert(const LinkKey& key, std::vector<float> vec) {
  if (vec.size() != d_vid_) throw Error(ErrorKind::kDimMismatch, "embedding width");
  std::unique_lock lock(mu_);
  map_[key] = std::move(vec);
  quarantine_.erase(key);
  pending_.push_back(key);
}

void EmbeddingCache::Flush() {
  if (!dir_) return;
  std::unique_lock lock(mu_);
  if (pending_.empty()) return;
  std::sort(pending_.begin(), pending_.end());
  pending_.erase(std::unique(pending_.begin(), pending_.end()), pending_.end());
  // One shard per config hash so each shard is a valid .gve file.
  std::map<uint64_t, std::vector<LinkEmbedding>> groups;
  for (const LinkKey& key : pending_) groups[key.config_hash].push_back({key, map_.at(key)});
  std::string manifest_lines;
  for (const auto& [hash, records] : groups) {
    const std::string name = "shard-" + std::to_string(next_shard_++) + ".gve";
    io::WriteFileAtomic((*dir_ / name).string(), EncodeGve(hash, d_vid_, records));
    for (const LinkEmbedding& r : records) {
      manifest_lines += name + " " + std::to_string(r.key.u) + " " + std::to_string(r.key.v) +
                        " " + Hex(std::bit_cast<uint64_t>(r.key.t_star)) + " " + Hex(hash) +
                        " " + Hex(VectorCrc(r.vec)) + "\n";
    }
  }
  std::ofstream manifest(*dir_ / kManifest, std::ios::app);
  manifest << manifest_lines;
  if (!manifest) throw Error(ErrorKind::kIo, "cannot append to cache manifest");
  pending_.clear();
}

size_t EmbeddingCache::size() const {
  std::shared_lock lock(mu_);
  return map_.size();
}

size_t EmbeddingCache::quarantined() const {
  std::shared_lock lock(mu_);
  return quarantine_.size();
}

std::vector<LinkEmbedding> EmbeddingCache::Entries() const {
  std::shared_lock lock(mu_);
  std::vector<LinkEmbedding> out;
  out.reserve(map_.size());
  for (const auto& [key, vec] : map_) out.push_back({key, vec});
  std::sort(out.begin(), out.end(),
            [](const LinkEmbedding& a, const LinkEmbedding& b) { return a.key < b.key; });
  return out;
}

EmbeddingCache ImportEmbeddings(const std::string& path, size_t expected_d_vid) {
  GveFile file = DecodeGve(io::ReadFile(path), expected_d_vid);
  EmbeddingCache cache(file.d_vid);
  for (LinkEmbedding& r : file.records) {
    for (float f : r.vec) {
      if (!std::isfinite(f)) throw Error(ErrorKind::kInvalidValue, "non-finite embedding");
    }
    cache.Insert(r.key, std::move(r.vec));
  }
  return cache;
}

void ExportEmbeddings(const EmbeddingCache& cache, uint64_t config_hash,
                      const std::string& path) {
  std::vector<LinkEmbedding> records;
  for (LinkEmbedding& r : cache.Entries()) {
    if (r.key.config_hash == config_hash) records.push_back(std::move(r));
  }
  io::WriteFileAtomic(path, EncodeGve(config_hash, cache.d_vid(), records));
}

}  // namespace g2v
