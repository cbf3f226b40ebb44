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

#ifndef TRUSTBOX_RNG_HPP
#define TRUSTBOX_RNG_HPP

#include <array>
#include <cstdint>

#include "trustbox/bytes.hpp"

namespace trustbox {

// Deterministic byte generator (hash counter construction). All randomness
// in a simulation flows through one of these so that equal seeds reproduce
// equal transcripts bit for bit. Not a secure RNG and not meant to be one.
class DetRng {
 public:
  explicit DetRng(uint64_t seed);

  void fill(uint8_t* out, size_t n);
  Bytes bytes(size_t n);
  std::array<uint8_t, 32> block32();
  uint64_t next_u64();
  // Uniform in [0, bound); bound must be nonzero.
  uint64_t below(uint64_t bound);

  // Independent child stream; advances this generator once.
  DetRng fork();

 private:
  void refill();

  std::array<uint8_t, 32> key_;
  std::array<uint8_t, 32> buf_;
  uint64_t counter_ = 0;
  size_t pos_ = 32;  // forces refill on first use
};

}  // namespace trustbox

#endif  // TRUSTBOX_RNG_HPP
