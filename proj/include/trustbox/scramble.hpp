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

#ifndef TRUSTBOX_SCRAMBLE_HPP
#define TRUSTBOX_SCRAMBLE_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "trustbox/bytes.hpp"
#include "trustbox/crypto.hpp"
#include "trustbox/wire.hpp"

namespace trustbox::scramble {

constexpr size_t kPayloadSize = 184;
constexpr size_t kEntropyBytes = 6;
// One control word per this many packets unless a stream overrides it.
constexpr uint32_t kDefaultPeriodPackets = 100;

// 8-byte scrambling key: six entropy bytes with a running-sum checksum byte
// after each group of three (positions 3 and 7).
struct ControlWord {
  std::array<uint8_t, 8> bytes{};

  auto operator<=>(const ControlWord&) const = default;
  bool checksums_valid() const;
};

// Builds the word from 6 entropy bytes, filling in both checksum bytes.
ControlWord cw_new(ByteSpan entropy6);

// Shared derivation: head end and box compute identical words from the same
// entitlement secret for every (stream, period). Entropy is the first six
// bytes of hash(secret | stream_id | period_index).
ControlWord derive_cw(ByteSpan secret16, uint16_t stream_id,
                      uint32_t period_index);

struct TransportPacket {
  uint16_t stream_id = 0;
  uint32_t period_index = 0;
  bool scrambled = false;
  std::array<uint8_t, kPayloadSize> payload{};

  bool operator==(const TransportPacket&) const = default;

  wire::WireMessage to_wire() const;
  static TransportPacket from_wire(const wire::WireMessage& msg);
};

// Keystream cipher behind a narrow seam so a different scrambling algorithm
// can be swapped in without touching callers.
TransportPacket scramble(const ControlWord& cw, const TransportPacket& pkt);
TransportPacket descramble(const ControlWord& cw, const TransportPacket& pkt);

// Deterministic content source; the head end and the verdict checks both
// regenerate the same original bytes from (content_seed, index).
TransportPacket make_clear_packet(uint64_t content_seed, uint16_t stream_id,
                                  uint32_t period_packets, uint32_t index);

std::vector<TransportPacket> make_clear_stream(uint64_t content_seed,
                                               uint16_t stream_id,
                                               uint32_t period_packets,
                                               uint32_t count);

// Head-end pipeline: scramble every packet under its period's derived word.
std::vector<TransportPacket> scramble_stream(
    ByteSpan secret16, const std::vector<TransportPacket>& clear);

// Stream fixture files: a flat sequence of length-prefixed encoded packets.
Bytes save_stream(const std::vector<TransportPacket>& packets);
std::vector<TransportPacket> load_stream(ByteSpan data);

}  // namespace trustbox::scramble

#endif  // TRUSTBOX_SCRAMBLE_HPP
