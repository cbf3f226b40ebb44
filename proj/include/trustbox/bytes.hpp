// Copyright 2026 The Trustbox Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRUSTBOX_BYTES_HPP
#define TRUSTBOX_BYTES_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trustbox {

using Bytes = std::vector<uint8_t>;
using ByteSpan = std::span<const uint8_t>;

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline std::string to_string(ByteSpan b) {
  return std::string(b.begin(), b.end());
}

inline void append(Bytes& out, ByteSpan data) {
  out.insert(out.end(), data.begin(), data.end());
}

inline void append_u8(Bytes& out, uint8_t v) { out.push_back(v); }

inline void append_u16(Bytes& out, uint16_t v) {
  out.push_back(uint8_t(v >> 8));
  out.push_back(uint8_t(v));
}

inline void append_u32(Bytes& out, uint32_t v) {
  out.push_back(uint8_t(v >> 24));
  out.push_back(uint8_t(v >> 16));
  out.push_back(uint8_t(v >> 8));
  out.push_back(uint8_t(v));
}

inline void append_u64(Bytes& out, uint64_t v) {
  append_u32(out, uint32_t(v >> 32));
  append_u32(out, uint32_t(v));
}

// Big-endian reads; callers are responsible for bounds.
inline uint16_t read_u16(ByteSpan b) {
  return uint16_t(b[0]) << 8 | b[1];
}

inline uint32_t read_u32(ByteSpan b) {
  return uint32_t(b[0]) << 24 | uint32_t(b[1]) << 16 | uint32_t(b[2]) << 8 |
         b[3];
}

inline uint64_t read_u64(ByteSpan b) {
  return uint64_t(read_u32(b)) << 32 | read_u32(b.subspan(4));
}

std::string to_hex(ByteSpan b);
Bytes from_hex(std::string_view hex);

// True if `needle` occurs as a contiguous subsequence of `haystack`.
bool contains(ByteSpan haystack, ByteSpan needle);

}  // namespace trustbox

#endif  // TRUSTBOX_BYTES_HPP
