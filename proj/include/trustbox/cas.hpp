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

#ifndef TRUSTBOX_CAS_HPP
#define TRUSTBOX_CAS_HPP

#include <map>
#include <optional>
#include <string>

#include "trustbox/scramble.hpp"
#include "trustbox/tpm.hpp"

namespace trustbox::cas {

constexpr int64_t kSecondsPerDay = 86400;
constexpr size_t kSecretLen = 16;
// Registers an entitlement secret is sealed against; includes the register
// the replaceable descrambling module extends, so firmware updates void
// earlier seals.
inline const tpm::PcrSelection kSealSelection = {0, 1, 2, 3};

inline int64_t day_of(int64_t t) { return t / kSecondsPerDay; }
inline int hour_of(int64_t t) { return int((t % kSecondsPerDay) / 3600); }

// Validity window plus optional daily and hour-of-day limits.
struct UsageConstraints {
  int64_t valid_from = 0;
  int64_t valid_until = 0;
  uint32_t daily_max = 0;      // 0 = no cap
  uint32_t allowed_hours = 0;  // bitmask of permitted hours; 0 = any

  // Throws MalformedMessage when the window is empty or inverted.
  void validate() const;
  bool hour_allowed(int64_t now) const {
    return allowed_hours == 0 || (allowed_hours >> hour_of(now)) & 1;
  }
};

// Provider-issued entitlement as it travels: the control-word secret is
// encrypted to the receiving device's certified bind key and the whole
// structure carries the issuer's signature.
struct EntitlementGrant {
  std::string cas_id;
  uint16_t stream_id = 0;
  UsageConstraints constraints;
  bool online_gated = false;
  Bytes encrypted_secret;
  Bytes issuer_signature;

  wire::WireMessage to_wire() const;
  static EntitlementGrant from_wire(const wire::WireMessage& msg);
  bool verify(ByteSpan issuer_pub) const;
};

// Short-lived provider permission for online-gated entitlements, covering an
// explicit crypto-period range.
struct OnlinePermit {
  std::string identity_label;
  uint16_t stream_id = 0;
  uint32_t period_from = 0;
  uint32_t period_to = 0;  // inclusive
  std::array<uint8_t, 32> nonce{};
  Bytes provider_signature;

  wire::WireMessage to_wire() const;
  static OnlinePermit from_wire(const wire::WireMessage& msg);
  bool verify(ByteSpan provider_pub) const;
};

// One virtualized access-control module. Entitlements of one instance never
// satisfy requests against another; the secret exists unsealed only inside
// request_cw and is wiped before it returns.
class CasInstance {
 public:
  CasInstance() = default;
  explicit CasInstance(std::string cas_id) : cas_id_(std::move(cas_id)) {}

  const std::string& cas_id() const { return cas_id_; }

  // Verifies the issuer, seals the secret to the current register state and
  // lists the credential. Replaces any earlier entitlement for the stream.
  void install(tpm::TpmState& t, const EntitlementGrant& grant,
               ByteSpan secret16, ByteSpan issuer_pub, DetRng& rng);

  // The permission gauntlet: unseal, window, hours, daily cap, online
  // permit; on success derives the control word and counts the period.
  scramble::ControlWord request_cw(tpm::TpmState& t, uint16_t stream_id,
                                   uint32_t period_index, int64_t now,
                                   const std::string& own_label,
                                   const std::optional<OnlinePermit>& permit,
                                   ByteSpan provider_pub);

  bool has_entitlement(uint16_t stream_id) const {
    return entitlements_.contains(stream_id);
  }
  uint32_t day_count(uint16_t stream_id, int64_t day) const;
  uint64_t successful_requests() const { return successful_requests_; }

 private:
  struct Entitlement {
    EntitlementGrant grant;
    tpm::SealedBlob sealed_secret;
  };

  std::string cas_id_;
  std::map<uint16_t, Entitlement> entitlements_;
  std::map<std::pair<uint16_t, int64_t>, uint32_t> day_counters_;
  uint64_t successful_requests_ = 0;
};

}  // namespace trustbox::cas

#endif  // TRUSTBOX_CAS_HPP
