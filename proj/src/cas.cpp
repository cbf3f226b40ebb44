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

#include "trustbox/cas.hpp"

#include "trustbox/errors.hpp"

namespace trustbox::cas {

using wire::MsgReader;
using wire::MsgType;
using wire::MsgWriter;

void UsageConstraints::validate() const {
  if (valid_from >= valid_until)
    raise(ErrorCode::MalformedMessage, "empty validity window");
}

wire::WireMessage EntitlementGrant::to_wire() const {
  return MsgWriter(MsgType::EntitlementGrant)
      .add_str(cas_id)
      .add_u16(stream_id)
      .add_u64(uint64_t(constraints.valid_from))
      .add_u64(uint64_t(constraints.valid_until))
      .add_u32(constraints.daily_max)
      .add_u32(constraints.allowed_hours)
      .add_u8(online_gated ? 1 : 0)
      .add(encrypted_secret)
      .add(issuer_signature)
      .take();
}

EntitlementGrant EntitlementGrant::from_wire(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::EntitlementGrant, 9);
  EntitlementGrant g;
  g.cas_id = r.str(0);
  g.stream_id = r.u16(1);
  g.constraints.valid_from = int64_t(r.u64(2));
  g.constraints.valid_until = int64_t(r.u64(3));
  g.constraints.daily_max = r.u32(4);
  g.constraints.allowed_hours = r.u32(5);
  g.online_gated = r.u8(6) != 0;
  g.encrypted_secret = r.field_vec(7);
  g.issuer_signature = r.field_vec(8);
  return g;
}

bool EntitlementGrant::verify(ByteSpan issuer_pub) const {
  return crypto::verify(issuer_pub, wire::signing_input(to_wire()),
                        issuer_signature);
}

wire::WireMessage OnlinePermit::to_wire() const {
  return MsgWriter(MsgType::OnlinePermit)
      .add_str(identity_label)
      .add_u16(stream_id)
      .add_u32(period_from)
      .add_u32(period_to)
      .add(ByteSpan(nonce.data(), nonce.size()))
      .add(provider_signature)
      .take();
}

OnlinePermit OnlinePermit::from_wire(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::OnlinePermit, 6);
  OnlinePermit p;
  p.identity_label = r.str(0);
  p.stream_id = r.u16(1);
  p.period_from = r.u32(2);
  p.period_to = r.u32(3);
  auto n = r.fixed(4, 32);
  std::copy(n.begin(), n.end(), p.nonce.begin());
  p.provider_signature = r.field_vec(5);
  return p;
}

bool OnlinePermit::verify(ByteSpan provider_pub) const {
  return crypto::verify(provider_pub, wire::signing_input(to_wire()),
                        provider_signature);
}

void CasInstance::install(tpm::TpmState& t, const EntitlementGrant& grant,
                          ByteSpan secret16, ByteSpan issuer_pub,
                          DetRng& rng) {
  if (grant.cas_id != cas_id_)
    throw std::invalid_argument("grant routed to the wrong instance");
  if (!grant.verify(issuer_pub)) raise(ErrorCode::BadIssuerSignature);
  grant.constraints.validate();
  if (secret16.size() != kSecretLen)
    raise(ErrorCode::SealFailure, "secret must be 16 bytes");

  Entitlement e;
  e.grant = grant;
  e.sealed_secret = t.seal_to_current(secret16, kSealSelection, rng);
  entitlements_[grant.stream_id] = std::move(e);
}

scramble::ControlWord CasInstance::request_cw(
    tpm::TpmState& t, uint16_t stream_id, uint32_t period_index, int64_t now,
    const std::string& own_label, const std::optional<OnlinePermit>& permit,
    ByteSpan provider_pub) {
  auto it = entitlements_.find(stream_id);
  if (it == entitlements_.end())
    raise(ErrorCode::NoEntitlement,
          cas_id_ + " has no entitlement for this stream");
  const Entitlement& e = it->second;

  // Unseal first: no constraint evaluation on a tampered platform.
  crypto::SecureBuffer secret(t.unseal(e.sealed_secret));

  const UsageConstraints& c = e.grant.constraints;
  if (now < c.valid_from || now >= c.valid_until)
    raise(ErrorCode::Expired, "outside validity window");
  if (!c.hour_allowed(now)) raise(ErrorCode::OutsideAllowedHours);

  int64_t day = day_of(now);
  if (c.daily_max > 0) {
    auto cnt = day_counters_.find({stream_id, day});
    if (cnt != day_counters_.end() && cnt->second >= c.daily_max)
      raise(ErrorCode::DailyCapExceeded);
  }

  if (e.grant.online_gated) {
    bool ok = permit.has_value() && permit->stream_id == stream_id &&
              permit->identity_label == own_label &&
              period_index >= permit->period_from &&
              period_index <= permit->period_to &&
              permit->verify(provider_pub);
    if (!ok) raise(ErrorCode::PermitRequired);
  }

  scramble::ControlWord cw =
      scramble::derive_cw(secret.span(), stream_id, period_index);
  ++day_counters_[{stream_id, day}];
  ++successful_requests_;
  return cw;
}

uint32_t CasInstance::day_count(uint16_t stream_id, int64_t day) const {
  auto it = day_counters_.find({stream_id, day});
  return it == day_counters_.end() ? 0 : it->second;
}

}  // namespace trustbox::cas
