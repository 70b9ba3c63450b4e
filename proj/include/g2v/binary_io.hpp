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

#ifndef G2V_BINARY_IO_HPP_
#define G2V_BINARY_IO_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "g2v/error.hpp"

// Little-endian primitives shared by the .gvf/.gve/checkpoint formats.
namespace g2v::io {

template <typename T>
void PutLe(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T> && (sizeof(T) == 4 || sizeof(T) == 8));
  using U = std::conditional_t<sizeof(T) == 4, uint32_t, uint64_t>;
  const U bits = std::bit_cast<U>(value);
  for (size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
}

inline void PutFloats(std::string& out, std::span<const float> values) {
  for (float f : values) PutLe(out, f);
}

// Cursor over an in-memory buffer; every read checks bounds and throws
// kTruncatedFile on underflow.
class Reader {
 public:
  explicit Reader(std::span<const char> data, std::string what = "file")
      : data_(data), what_(std::move(what)) {}

  template <typename T>
  T Get() {
    using U = std::conditional_t<sizeof(T) == 4, uint32_t, uint64_t>;
    Need(sizeof(T));
    U bits = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<U>(static_cast<uint8_t>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return std::bit_cast<T>(bits);
  }

  std::span<const char> Bytes(size_t n) {
    Need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  size_t position() const { return pos_; }
  size_t remaining() const { return data_.size() - pos_; }

 private:
  void Need(size_t n) const {
    if (data_.size() - pos_ < n) {
      throw Error(ErrorKind::kTruncatedFile,
                  what_ + ": needs " + std::to_string(n) + " bytes at offset " +
                      std::to_string(pos_) + ", only " +
                      std::to_string(data_.size() - pos_) + " left");
    }
  }

  std::span<const char> data_;
  size_t pos_ = 0;
  std::string what_;
};

inline std::string ReadAll(std::istream& in) {
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string ReadFile(const std::string& path);
// Writes via a temporary sibling and rename so readers never see a partial
// file.
void WriteFileAtomic(const std::string& path, std::string_view bytes);

}  // namespace g2v::io

#endif  // G2V_BINARY_IO_HPP_
