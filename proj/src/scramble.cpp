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

#include "trustbox/scramble.hpp"

#include <cstring>

#include "trustbox/errors.hpp"
#include "trustbox/kernels.hpp"
#include "trustbox/rng.hpp"

namespace trustbox::scramble {

namespace {

uint8_t group_checksum(const uint8_t* g) {
  return uint8_t(g[0] + g[1] + g[2]);
}

// Keystream block i = hash(cw | stream_id | period_index | i); blocks are
// concatenated and XORed over the payload.
void apply_keystream(const ControlWord& cw, uint16_t stream_id,
                     uint32_t period_index,
                     std::array<uint8_t, kPayloadSize>& payload) {
  Bytes seed;
  seed.reserve(8 + 2 + 4 + 4);
  append(seed, ByteSpan(cw.bytes.data(), cw.bytes.size()));
  append_u16(seed, stream_id);
  append_u32(seed, period_index);
  size_t counter_at = seed.size();
  seed.resize(counter_at + 4);

  std::array<uint8_t, kPayloadSize> stream;
  size_t filled = 0;
  uint32_t counter = 0;
  while (filled < kPayloadSize) {
    seed[counter_at] = uint8_t(counter >> 24);
    seed[counter_at + 1] = uint8_t(counter >> 16);
    seed[counter_at + 2] = uint8_t(counter >> 8);
    seed[counter_at + 3] = uint8_t(counter);
    crypto::Digest block = crypto::hash(seed);
    size_t take = std::min(block.bytes.size(), kPayloadSize - filled);
    std::memcpy(stream.data() + filled, block.bytes.data(), take);
    filled += take;
    ++counter;
  }
  kernels::xor_bytes(payload.data(), stream.data(), kPayloadSize);
}

}  // namespace

bool ControlWord::checksums_valid() const {
  return bytes[3] == group_checksum(bytes.data()) &&
         bytes[7] == group_checksum(bytes.data() + 4);
}

ControlWord cw_new(ByteSpan entropy6) {
  if (entropy6.size() != kEntropyBytes)
    throw std::invalid_argument("control word entropy must be 6 bytes");
  ControlWord cw;
  cw.bytes[0] = entropy6[0];
  cw.bytes[1] = entropy6[1];
  cw.bytes[2] = entropy6[2];
  cw.bytes[3] = group_checksum(cw.bytes.data());
  cw.bytes[4] = entropy6[3];
  cw.bytes[5] = entropy6[4];
  cw.bytes[6] = entropy6[5];
  cw.bytes[7] = group_checksum(cw.bytes.data() + 4);
  return cw;
}

ControlWord derive_cw(ByteSpan secret16, uint16_t stream_id,
                      uint32_t period_index) {
  Bytes material;
  material.reserve(secret16.size() + 6);
  append(material, secret16);
  append_u16(material, stream_id);
  append_u32(material, period_index);
  crypto::Digest d = crypto::hash(material);
  return cw_new(ByteSpan(d.bytes.data(), kEntropyBytes));
}

wire::WireMessage TransportPacket::to_wire() const {
  return wire::MsgWriter(wire::MsgType::TransportPacket)
      .add_u16(stream_id)
      .add_u32(period_index)
      .add_u8(scrambled ? 1 : 0)
      .add(ByteSpan(payload.data(), payload.size()))
      .take();
}

TransportPacket TransportPacket::from_wire(const wire::WireMessage& msg) {
  wire::MsgReader r(msg, wire::MsgType::TransportPacket, 4);
  TransportPacket pkt;
  pkt.stream_id = r.u16(0);
  pkt.period_index = r.u32(1);
  pkt.scrambled = r.u8(2) != 0;
  auto payload = r.fixed(3, kPayloadSize);
  std::memcpy(pkt.payload.data(), payload.data(), kPayloadSize);
  return pkt;
}

TransportPacket scramble(const ControlWord& cw, const TransportPacket& pkt) {
  if (pkt.scrambled) raise(ErrorCode::FlagStateError, "already scrambled");
  TransportPacket out = pkt;
  apply_keystream(cw, pkt.stream_id, pkt.period_index, out.payload);
  out.scrambled = true;
  return out;
}

TransportPacket descramble(const ControlWord& cw, const TransportPacket& pkt) {
  if (!pkt.scrambled) raise(ErrorCode::FlagStateError, "not scrambled");
  TransportPacket out = pkt;
  apply_keystream(cw, pkt.stream_id, pkt.period_index, out.payload);
  out.scrambled = false;
  return out;
}

TransportPacket make_clear_packet(uint64_t content_seed, uint16_t stream_id,
                                  uint32_t period_packets, uint32_t index) {
  TransportPacket pkt;
  pkt.stream_id = stream_id;
  pkt.period_index = index / period_packets;
  DetRng rng(content_seed ^ (uint64_t(stream_id) << 32) ^ index);
  rng.fill(pkt.payload.data(), pkt.payload.size());
  return pkt;
}

std::vector<TransportPacket> make_clear_stream(uint64_t content_seed,
                                               uint16_t stream_id,
                                               uint32_t period_packets,
                                               uint32_t count) {
  std::vector<TransportPacket> out;
  out.reserve(count);
  for (uint32_t i = 0; i < count; ++i)
    out.push_back(make_clear_packet(content_seed, stream_id, period_packets, i));
  return out;
}

std::vector<TransportPacket> scramble_stream(
    ByteSpan secret16, const std::vector<TransportPacket>& clear) {
  std::vector<TransportPacket> out;
  out.reserve(clear.size());
  for (const auto& pkt : clear) {
    ControlWord cw = derive_cw(secret16, pkt.stream_id, pkt.period_index);
    out.push_back(scramble(cw, pkt));
  }
  return out;
}

Bytes save_stream(const std::vector<TransportPacket>& packets) {
  Bytes out;
  for (const auto& pkt : packets) {
    Bytes frame = wire::encode(pkt.to_wire());
    append_u32(out, uint32_t(frame.size()));
    append(out, frame);
  }
  return out;
}

std::vector<TransportPacket> load_stream(ByteSpan data) {
  std::vector<TransportPacket> out;
  size_t pos = 0;
  while (pos < data.size()) {
    if (data.size() - pos < 4)
      raise(ErrorCode::MalformedMessage, "truncated stream frame");
    uint32_t len = read_u32(data.subspan(pos));
    pos += 4;
    if (data.size() - pos < len)
      raise(ErrorCode::MalformedMessage, "stream frame exceeds input");
    out.push_back(
        TransportPacket::from_wire(wire::decode(data.subspan(pos, len))));
    pos += len;
  }
  return out;
}

}  // namespace trustbox::scramble
