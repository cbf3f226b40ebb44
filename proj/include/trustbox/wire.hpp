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

#ifndef TRUSTBOX_WIRE_HPP
#define TRUSTBOX_WIRE_HPP

#include <cstdint>
#include <string_view>
#include <vector>

#include "trustbox/bytes.hpp"
#include "trustbox/errors.hpp"

namespace trustbox::wire {

// Every structure and protocol message in the system is a WireMessage: a
// one-byte type tag followed by an ordered list of length-prefixed byte
// strings (4-byte big-endian lengths). Field order per type is fixed and
// documented in docs/wire_format.md. Signed structures carry the signature
// as their final field; the signing input is the encoding with that field
// omitted (see signing_input).
enum class MsgType : uint8_t {
  Raw = 0x01,

  // structures
  EkCredential = 0x10,
  PlatformCredential = 0x11,
  IdentityBinding = 0x12,
  AikCredential = 0x13,
  Quote = 0x14,
  SealedBlob = 0x15,
  BootLog = 0x16,
  MeasurementEvent = 0x17,
  BindKeyCertificate = 0x18,
  ServiceOffer = 0x19,
  SubscriptionSelection = 0x1A,
  DepositVoucher = 0x1B,
  TimestampToken = 0x1C,
  ConsumptionRecord = 0x1D,
  OnlinePermit = 0x1E,
  DeviceDescription = 0x1F,
  UpdatePackage = 0x20,
  TransportPacket = 0x21,
  TpmSnapshot = 0x22,
  RegistrationReceipt = 0x23,
  ValidityResponse = 0x24,
  ProviderVoucher = 0x25,
  ServiceEntry = 0x26,
  AuditToken = 0x27,
  EntitlementGrant = 0x28,

  // protocol messages
  EnrollRequest = 0x40,
  EnrollChallenge = 0x41,
  EnrollResponse = 0x42,
  EnrollCertificate = 0x43,
  ErrorReply = 0x44,
  ValidityQuery = 0x45,
  RegisterRequest = 0x46,
  AttestChallenge = 0x47,
  AttestReport = 0x48,
  TopUpRequest = 0x49,
  VoucherDelivery = 0x4A,
  ConsumptionBatch = 0x4B,
  PullRequest = 0x4C,
  SettleAck = 0x4D,
  UpdateRequest = 0x4E,
  UpdateDelivery = 0x4F,
  PermitRequest = 0x50,
  RevealRequest = 0x51,
  RevealResponse = 0x52,
  VouchQuery = 0x53,
  RelayTo = 0x54,
  RelayFrom = 0x55,
  TimestampRequest = 0x56,
  ContractRequest = 0x57,
  ContractAck = 0x58,
  RegistrationAck = 0x59,
  EntitlementDelivery = 0x5A,
  PermitGrant = 0x5B,
};

bool known_type(uint8_t tag);
std::string_view type_name(MsgType t);

struct WireMessage {
  MsgType type = MsgType::Raw;
  std::vector<Bytes> fields;

  bool operator==(const WireMessage&) const = default;
};

// Canonical encoding: tag byte, then per field a 4-byte big-endian length
// prefix and the raw bytes. decode() rejects unknown tags, truncated
// prefixes and trailing bytes with MalformedMessage.
Bytes encode(const WireMessage& msg);
WireMessage decode(ByteSpan data);

// Encoding of `msg` with its final field removed: the canonical signing
// input for all protocol signatures.
Bytes signing_input(const WireMessage& msg);

// Convenience writer with typed appends.
class MsgWriter {
 public:
  explicit MsgWriter(MsgType type) { msg_.type = type; }

  MsgWriter& add(ByteSpan raw) {
    msg_.fields.emplace_back(raw.begin(), raw.end());
    return *this;
  }
  MsgWriter& add(const Bytes& raw) { return add(ByteSpan(raw)); }
  MsgWriter& add_str(std::string_view s) { return add(to_bytes(s)); }
  MsgWriter& add_u8(uint8_t v) {
    msg_.fields.push_back({v});
    return *this;
  }
  MsgWriter& add_u16(uint16_t v) {
    Bytes b;
    append_u16(b, v);
    return add(b);
  }
  MsgWriter& add_u32(uint32_t v) {
    Bytes b;
    append_u32(b, v);
    return add(b);
  }
  MsgWriter& add_u64(uint64_t v) {
    Bytes b;
    append_u64(b, v);
    return add(b);
  }

  WireMessage take() { return std::move(msg_); }
  Bytes encoded() const { return encode(msg_); }

 private:
  WireMessage msg_;
};

// Checked reader; every accessor throws MalformedMessage on shape errors so
// decoders stay terse.
class MsgReader {
 public:
  MsgReader(const WireMessage& msg, MsgType expect, size_t min_fields);
  // The reader only borrows the message; a temporary would dangle.
  MsgReader(WireMessage&&, MsgType, size_t) = delete;

  size_t size() const { return msg_.fields.size(); }
  ByteSpan field(size_t i) const;
  Bytes field_vec(size_t i) const;
  std::string str(size_t i) const;
  uint8_t u8(size_t i) const;
  uint16_t u16(size_t i) const;
  uint32_t u32(size_t i) const;
  uint64_t u64(size_t i) const;
  // Fixed-size field check.
  ByteSpan fixed(size_t i, size_t n) const;

 private:
  const WireMessage& msg_;
};

}  // namespace trustbox::wire

#endif  // TRUSTBOX_WIRE_HPP
