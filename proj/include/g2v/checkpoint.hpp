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

#ifndef G2V_CHECKPOINT_HPP_
#define G2V_CHECKPOINT_HPP_

#include <span>
#include <string>

#include "g2v/model.hpp"

namespace g2v {

inline constexpr uint32_t kCheckpointVersion = 1;

// Binary checkpoint: "G2VM", u32 version, u32 length + model config string,
// u32 tensor count, then per tensor u32 name length + name, u32 rows,
// u32 cols, rows*cols f32 (row-major); finally a CRC32 of all preceding
// bytes. Little-endian.
std::string EncodeCheckpoint(const LinkModel<float>& model);
// Throws kBadMagic, kTruncatedFile, kCorruptCacheEntry (CRC mismatch) or
// kShapeMismatch.
LinkModel<float> DecodeCheckpoint(std::span<const char> bytes, const ModelConfig& config);

void SaveCheckpoint(const LinkModel<float>& model, const std::string& path);
LinkModel<float> LoadCheckpoint(const std::string& path, const ModelConfig& config);

}  // namespace g2v

#endif  // G2V_CHECKPOINT_HPP_
