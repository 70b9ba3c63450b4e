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

#include "g2v/checkpoint.hpp"

#include <cstring>

#include "g2v/binary_io.hpp"
#include "g2v/error.hpp"
#include "g2v/hash.hpp"

namespace g2v {
namespace {

constexpr char kMagic[4] = {'G', '2', 'V', 'M'};

std::span<const char> Verified(std::span<const char> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorKind::kBadMagic, "not a G2VM checkpoint");
  }
  if (bytes.size() < 12) throw Error(ErrorKind::kTruncatedFile, "checkpoint too short");
  const auto body = bytes.first(bytes.size() - 4);
  io::Reader tail(bytes.last(4), "checkpoint");
  if (tail.Get<uint32_t>() != Crc32(std::as_bytes(body))) {
    throw Error(ErrorKind::kCorruptCacheEntry, "checkpoint checksum mismatch");
  }
  return body;
}

std::string ReadConfigString(io::Reader& in) {
  const auto magic = in.Bytes(4);
  (void)magic;
  const uint32_t version = in.Get<uint32_t>();
  if (version != kCheckpointVersion) {
    throw Error(ErrorKind::kShapeMismatch, "checkpoint version " + std::to_string(version));
  }
  const uint32_t len = in.Get<uint32_t>();
  const auto text = in.Bytes(len);
  return std::string(text.data(), text.size());
}

}  // namespace

std::string EncodeCheckpoint(const LinkModel<float>& model) {
  std::string out(kMagic, 4);
  io::PutLe(out, kCheckpointVersion);
  const std::string config = model.config().CanonicalString();
  io::PutLe(out, static_cast<uint32_t>(config.size()));
  out += config;
  uint32_t count = 0;
  model.ForEachParam([&](const std::string&, const Param<float>&) { ++count; });
  io::PutLe(out, count);
  model.ForEachParam([&](const std::string& name, const Param<float>& p) {
    io::PutLe(out, static_cast<uint32_t>(name.size()));
    out += name;
    io::PutLe(out, static_cast<uint32_t>(p.value.rows()));
    io::PutLe(out, static_cast<uint32_t>(p.value.cols()));
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) io::PutLe(out, p.value(r, c));
    }
  });
  io::PutLe(out, Crc32(std::as_bytes(std::span<const char>(out))));
  return out;
}

LinkModel<float> DecodeCheckpoint(std::span<const char> bytes, const ModelConfig& config) {
  io::Reader in(Verified(bytes), "checkpoint");
  const std::string stored = ReadConfigString(in);
  if (stored != config.CanonicalString()) {
    throw Error(ErrorKind::kShapeMismatch,
                "checkpoint was written for a different model configuration");
  }
  LinkModel<float> model(config);
  const uint32_t count = in.Get<uint32_t>();
  uint32_t seen = 0;
  model.ForEachParam([&](const std::string& name, Param<float>& p) {
    if (seen++ >= count) throw Error(ErrorKind::kShapeMismatch, "missing tensor " + name);
    const uint32_t len = in.Get<uint32_t>();
    const auto stored_name = in.Bytes(len);
    const uint32_t rows = in.Get<uint32_t>();
    const uint32_t cols = in.Get<uint32_t>();
    if (std::string(stored_name.data(), stored_name.size()) != name ||
        rows != p.value.rows() || cols != p.value.cols()) {
      throw Error(ErrorKind::kShapeMismatch, "tensor mismatch at " + name);
    }
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) p.value(r, c) = in.Get<float>();
    }
  });
  if (seen != count) throw Error(ErrorKind::kShapeMismatch, "unexpected extra tensors");
  return model;
}


void SaveCheckpoint(const LinkModel<float>& model, const std::string& path) {
  io::WriteFileAtomic(path, EncodeCheckpoint(model));
}

LinkModel<float> LoadCheckpoint(const std::string& path, const ModelConfig& config) {
  return DecodeCheckpoint(io::ReadFile(path), config);
}

}  // namespace g2v
