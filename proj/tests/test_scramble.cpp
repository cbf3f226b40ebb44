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

#include <doctest.h>

#include <set>

#include "trustbox/kernels.hpp"
#include "trustbox/rng.hpp"
#include "trustbox/scramble.hpp"

using namespace trustbox;
using namespace trustbox::scramble;

namespace {

// Independent checksum oracle for control words.
uint8_t sum3(uint8_t a, uint8_t b, uint8_t c) { return uint8_t(a + b + c); }

}  // namespace

TEST_CASE("control word checksum layout") {
  ControlWord cw = cw_new(Bytes{0x01, 0x02, 0x03, 0x10, 0x20, 0x30});
  CHECK(cw.bytes == std::array<uint8_t, 8>{0x01, 0x02, 0x03, 0x06, 0x10, 0x20,
                                           0x30, 0x60});

  ControlWord zero = cw_new(Bytes(6, 0x00));
  CHECK(zero.bytes == std::array<uint8_t, 8>{});

  ControlWord wrap = cw_new(Bytes{0xFF, 0xFF, 0xFF, 0x00, 0x00, 0x00});
  CHECK(wrap.bytes[3] == 0xFD);
  CHECK(wrap.bytes[7] == 0x00);
}

TEST_CASE("checksum invariant holds for every constructed word") {
  DetRng rng(20);
  for (int i = 0; i < 2000; ++i) {
    Bytes entropy = rng.bytes(6);
    ControlWord cw = cw_new(entropy);
    CHECK(cw.checksums_valid());
    CHECK(cw.bytes[3] == sum3(cw.bytes[0], cw.bytes[1], cw.bytes[2]));
    CHECK(cw.bytes[7] == sum3(cw.bytes[4], cw.bytes[5], cw.bytes[6]));
  }
  // Derived words satisfy it too.
  Bytes secret = rng.bytes(16);
  for (uint32_t p = 0; p < 100; ++p)
    CHECK(derive_cw(secret, 7, p).checksums_valid());
}

TEST_CASE("scramble/descramble round trip") {
  DetRng rng(21);
  ControlWord cw = cw_new(rng.bytes(6));
  TransportPacket pkt = make_clear_packet(99, 0x0101, 100, 0);
  TransportPacket s = scramble::scramble(cw, pkt);
  CHECK(s.scrambled);
  CHECK(s.payload != pkt.payload);
  CHECK(descramble(cw, s) == pkt);
}

TEST_CASE("descrambling under a perturbed control word mismatches") {
  DetRng rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    Bytes entropy = rng.bytes(6);
    ControlWord cw = cw_new(entropy);
    TransportPacket pkt = make_clear_packet(500 + trial, 0x0202, 100, trial);
    TransportPacket s = scramble::scramble(cw, pkt);
    for (size_t e = 0; e < kEntropyBytes; ++e) {
      Bytes wrong = entropy;
      wrong[e] ^= 0x5A;
      TransportPacket d = descramble(cw_new(wrong), s);
      CHECK(d.payload != pkt.payload);
    }
  }
}

TEST_CASE("scrambled-flag state machine") {
  DetRng rng(23);
  ControlWord cw = cw_new(rng.bytes(6));
  TransportPacket pkt = make_clear_packet(1, 1, 100, 0);
  TransportPacket s = scramble::scramble(cw, pkt);
  CHECK_THROWS_AS(scramble::scramble(cw, s), Error);
  CHECK_THROWS_AS(descramble(cw, pkt), Error);
}

TEST_CASE("derived words are deterministic and collision free across periods") {
  DetRng rng(24);
  Bytes secret = rng.bytes(16);
  CHECK(derive_cw(secret, 42, 7) == derive_cw(secret, 42, 7));

  std::set<std::array<uint8_t, 8>> seen;
  for (uint32_t p = 0; p < 10000; ++p) seen.insert(derive_cw(secret, 42, p).bytes);
  CHECK(seen.size() == 10000);
}

TEST_CASE("distinct secrets give distinct words") {
  DetRng rng(25);
  std::set<std::array<uint8_t, 8>> seen;
  for (int s = 0; s < 100; ++s) {
    Bytes secret = rng.bytes(16);
    seen.insert(derive_cw(secret, 42, 3).bytes);
  }
  CHECK(seen.size() == 100);
}

TEST_CASE("head end and box derive identical words independently") {
  DetRng rng(26);
  Bytes secret = rng.bytes(16);
  for (uint32_t p = 0; p < 64; ++p) {
    ControlWord head_end = derive_cw(secret, 0x0303, p);
    ControlWord box = derive_cw(secret, 0x0303, p);
    CHECK(head_end == box);
  }
}

TEST_CASE("10^4 packet stream with rotating words reconstructs exactly") {
  DetRng rng(27);
  Bytes secret = rng.bytes(16);
  const uint32_t period_packets = 100;
  auto clear = make_clear_stream(4242, 0x0404, period_packets, 10000);
  auto scrambled = scramble_stream(secret, clear);

  // The receiver recomputes the word at every period boundary.
  uint32_t current_period = UINT32_MAX;
  ControlWord cw;
  for (size_t i = 0; i < scrambled.size(); ++i) {
    if (scrambled[i].period_index != current_period) {
      current_period = scrambled[i].period_index;
      cw = derive_cw(secret, 0x0404, current_period);
    }
    CHECK(descramble(cw, scrambled[i]) == clear[i]);
  }
}

TEST_CASE("stream fixture save/load round trip") {
  auto clear = make_clear_stream(7, 0x0505, 10, 25);
  Bytes file = save_stream(clear);
  auto loaded = load_stream(file);
  CHECK(loaded == clear);

  Bytes truncated(file.begin(), file.end() - 3);
  CHECK_THROWS_AS(load_stream(truncated), Error);
}

TEST_CASE("xor kernel variants agree on random buffers") {
  DetRng rng(28);
  auto fn = kernels::xor_bytes_dispatch();
  INFO("active kernel: ", kernels::active_xor_kernel());
  for (int trial = 0; trial < 200; ++trial) {
    size_t n = rng.below(512);
    size_t offset = rng.below(8);
    Bytes a = rng.bytes(n + offset);
    Bytes b = rng.bytes(n + offset);
    Bytes expect = a;
    kernels::xor_bytes_scalar(expect.data() + offset, b.data() + offset, n);
    Bytes got = a;
    fn(got.data() + offset, b.data() + offset, n);
    CHECK(got == expect);
  }
}

#if defined(__x86_64__)
TEST_CASE("avx2 kernel matches scalar when available") {
  if (!__builtin_cpu_supports("avx2")) return;
  DetRng rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    size_t n = rng.below(1024);
    Bytes a = rng.bytes(n), b = rng.bytes(n);
    Bytes expect = a, got = a;
    kernels::xor_bytes_scalar(expect.data(), b.data(), n);
    kernels::xor_bytes_avx2(got.data(), b.data(), n);
    CHECK(got == expect);
  }
}
#endif
