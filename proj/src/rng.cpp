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

#include "trustbox/rng.hpp"

#include <cstring>

#include "trustbox/crypto.hpp"

namespace trustbox {

DetRng::DetRng(uint64_t seed) {
  Bytes material;
  material.reserve(16);
  append_u64(material, seed);
  material.insert(material.end(), {'d', 'r', 'n', 'g'});
  key_ = crypto::hash(material).bytes;
}

void DetRng::refill() {
  Bytes block(key_.begin(), key_.end());
  append_u64(block, counter_++);
  buf_ = crypto::hash(block).bytes;
  pos_ = 0;
}

void DetRng::fill(uint8_t* out, size_t n) {
  while (n > 0) {
    if (pos_ == buf_.size()) refill();
    size_t take = std::min(n, buf_.size() - pos_);
    std::memcpy(out, buf_.data() + pos_, take);
    pos_ += take;
    out += take;
    n -= take;
  }
}

Bytes DetRng::bytes(size_t n) {
  Bytes out(n);
  fill(out.data(), n);
  return out;
}

std::array<uint8_t, 32> DetRng::block32() {
  std::array<uint8_t, 32> out;
  fill(out.data(), out.size());
  return out;
}

uint64_t DetRng::next_u64() {
  uint8_t b[8];
  fill(b, sizeof b);
  return read_u64(ByteSpan(b, 8));
}

uint64_t DetRng::below(uint64_t bound) {
  // Rejection sampling keeps the distribution exact.
  uint64_t limit = bound * (UINT64_MAX / bound);
  uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit && limit != 0);
  return v % bound;
}

DetRng DetRng::fork() { return DetRng(next_u64()); }

}  // namespace trustbox
