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

#include "trustbox/wire.hpp"

namespace trustbox::wire {

namespace {

struct TypeName {
  MsgType type;
  std::string_view name;
};

constexpr TypeName kTypeNames[] = {
    {MsgType::Raw, "Raw"},
    {MsgType::EkCredential, "EkCredential"},
    {MsgType::PlatformCredential, "PlatformCredential"},
    {MsgType::IdentityBinding, "IdentityBinding"},
    {MsgType::AikCredential, "AikCredential"},
    {MsgType::Quote, "Quote"},
    {MsgType::SealedBlob, "SealedBlob"},
    {MsgType::BootLog, "BootLog"},
    {MsgType::MeasurementEvent, "MeasurementEvent"},
    {MsgType::BindKeyCertificate, "BindKeyCertificate"},
    {MsgType::ServiceOffer, "ServiceOffer"},
    {MsgType::SubscriptionSelection, "SubscriptionSelection"},
    {MsgType::DepositVoucher, "DepositVoucher"},
    {MsgType::TimestampToken, "TimestampToken"},
    {MsgType::ConsumptionRecord, "ConsumptionRecord"},
    {MsgType::OnlinePermit, "OnlinePermit"},
    {MsgType::DeviceDescription, "DeviceDescription"},
    {MsgType::UpdatePackage, "UpdatePackage"},
    {MsgType::TransportPacket, "TransportPacket"},
    {MsgType::TpmSnapshot, "TpmSnapshot"},
    {MsgType::RegistrationReceipt, "RegistrationReceipt"},
    {MsgType::ValidityResponse, "ValidityResponse"},
    {MsgType::ProviderVoucher, "ProviderVoucher"},
    {MsgType::ServiceEntry, "ServiceEntry"},
    {MsgType::AuditToken, "AuditToken"},
    {MsgType::EntitlementGrant, "EntitlementGrant"},
    {MsgType::EnrollRequest, "EnrollRequest"},
    {MsgType::EnrollChallenge, "EnrollChallenge"},
    {MsgType::EnrollResponse, "EnrollResponse"},
    {MsgType::EnrollCertificate, "EnrollCertificate"},
    {MsgType::ErrorReply, "ErrorReply"},
    {MsgType::ValidityQuery, "ValidityQuery"},
    {MsgType::RegisterRequest, "RegisterRequest"},
    {MsgType::AttestChallenge, "AttestChallenge"},
    {MsgType::AttestReport, "AttestReport"},
    {MsgType::TopUpRequest, "TopUpRequest"},
    {MsgType::VoucherDelivery, "VoucherDelivery"},
    {MsgType::ConsumptionBatch, "ConsumptionBatch"},
    {MsgType::PullRequest, "PullRequest"},
    {MsgType::SettleAck, "SettleAck"},
    {MsgType::UpdateRequest, "UpdateRequest"},
    {MsgType::UpdateDelivery, "UpdateDelivery"},
    {MsgType::PermitRequest, "PermitRequest"},
    {MsgType::RevealRequest, "RevealRequest"},
    {MsgType::RevealResponse, "RevealResponse"},
    {MsgType::VouchQuery, "VouchQuery"},
    {MsgType::RelayTo, "RelayTo"},
    {MsgType::RelayFrom, "RelayFrom"},
    {MsgType::TimestampRequest, "TimestampRequest"},
    {MsgType::ContractRequest, "ContractRequest"},
    {MsgType::ContractAck, "ContractAck"},
    {MsgType::RegistrationAck, "RegistrationAck"},
    {MsgType::EntitlementDelivery, "EntitlementDelivery"},
    {MsgType::PermitGrant, "PermitGrant"},
};

}  // namespace

bool known_type(uint8_t tag) {
  for (const auto& e : kTypeNames) {
    if (uint8_t(e.type) == tag) return true;
  }
  return false;
}

std::string_view type_name(MsgType t) {
  for (const auto& e : kTypeNames) {
    if (e.type == t) return e.name;
  }
  return "UnknownType";
}

Bytes encode(const WireMessage& msg) {
  size_t total = 1;
  for (const auto& f : msg.fields) total += 4 + f.size();
  Bytes out;
  out.reserve(total);
  out.push_back(uint8_t(msg.type));
  for (const auto& f : msg.fields) {
    append_u32(out, uint32_t(f.size()));
    append(out, f);
  }
  return out;
}

WireMessage decode(ByteSpan data) {
  if (data.empty()) raise(ErrorCode::MalformedMessage, "empty input");
  if (!known_type(data[0]))
    raise(ErrorCode::MalformedMessage, "unknown msg_type");
  WireMessage msg;
  msg.type = MsgType(data[0]);
  size_t pos = 1;
  while (pos < data.size()) {
    if (data.size() - pos < 4)
      raise(ErrorCode::MalformedMessage, "truncated length prefix");
    uint32_t len = read_u32(data.subspan(pos));
    pos += 4;
    if (data.size() - pos < len)
      raise(ErrorCode::MalformedMessage, "length prefix exceeds input");
    msg.fields.emplace_back(data.begin() + pos, data.begin() + pos + len);
    pos += len;
  }
  return msg;
}

Bytes signing_input(const WireMessage& msg) {
  WireMessage unsigned_part = msg;
  if (!unsigned_part.fields.empty()) unsigned_part.fields.pop_back();
  return encode(unsigned_part);
}

MsgReader::MsgReader(const WireMessage& msg, MsgType expect, size_t min_fields)
    : msg_(msg) {
  if (msg.type != expect)
    raise(ErrorCode::MalformedMessage,
          std::string("expected ") + std::string(type_name(expect)) +
              ", got " + std::string(type_name(msg.type)));
  if (msg.fields.size() < min_fields)
    raise(ErrorCode::MalformedMessage, "missing fields");
}

ByteSpan MsgReader::field(size_t i) const {
  if (i >= msg_.fields.size())
    raise(ErrorCode::MalformedMessage, "field index out of range");
  return msg_.fields[i];
}

Bytes MsgReader::field_vec(size_t i) const {
  auto f = field(i);
  return Bytes(f.begin(), f.end());
}

std::string MsgReader::str(size_t i) const { return to_string(field(i)); }

uint8_t MsgReader::u8(size_t i) const { return fixed(i, 1)[0]; }

uint16_t MsgReader::u16(size_t i) const { return read_u16(fixed(i, 2)); }

uint32_t MsgReader::u32(size_t i) const { return read_u32(fixed(i, 4)); }

uint64_t MsgReader::u64(size_t i) const { return read_u64(fixed(i, 8)); }

ByteSpan MsgReader::fixed(size_t i, size_t n) const {
  auto f = field(i);
  if (f.size() != n) raise(ErrorCode::MalformedMessage, "bad field size");
  return f;
}

}  // namespace trustbox::wire
