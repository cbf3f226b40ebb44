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

#ifndef TRUSTBOX_PROVIDERS_HPP
#define TRUSTBOX_PROVIDERS_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "trustbox/boot.hpp"
#include "trustbox/cas.hpp"
#include "trustbox/pca.hpp"
#include "trustbox/scramble.hpp"

namespace trustbox::providers {

using crypto::KeyPair;

enum class ChargingModel : uint8_t {
  Prepaid = 1,
  Postpaid = 2,
  ConstrainedKey = 4,
};

struct ServiceEntry {
  uint16_t stream_id = 0;
  std::string description;
  uint8_t models_mask = 0;  // ChargingModel bits
  uint32_t tariff = 0;      // units per crypto period

  wire::WireMessage to_wire() const;
  static ServiceEntry from_wire(const wire::WireMessage& msg);
};

struct ServiceOffer {
  std::string offer_id;
  std::vector<ServiceEntry> services;
  Bytes provider_signature;

  wire::WireMessage to_wire() const;
  static ServiceOffer from_wire(const wire::WireMessage& msg);
  bool verify(ByteSpan provider_pub) const;
  const ServiceEntry* find(uint16_t stream_id) const;
};

struct SubscriptionSelection {
  std::string offer_id;
  uint16_t stream_id = 0;
  ChargingModel model = ChargingModel::Prepaid;
  std::string identity_label;
  Bytes aik_signature;

  wire::WireMessage to_wire() const;
  static SubscriptionSelection from_wire(const wire::WireMessage& msg);
  bool verify(ByteSpan aik_pub) const;
};

struct RegistrationReceipt {
  std::string identity_label;
  std::string offer_id;
  uint16_t stream_id = 0;
  uint8_t model = 0;
  Bytes provider_signature;

  wire::WireMessage to_wire() const;
  static RegistrationReceipt from_wire(const wire::WireMessage& msg);
  bool verify(ByteSpan provider_pub) const;
};

struct DepositVoucher {
  uint64_t amount = 0;
  std::array<uint8_t, 32> nonce{};
  std::string beneficiary;
  Bytes charging_signature;

  wire::WireMessage to_wire() const;
  static DepositVoucher from_wire(const wire::WireMessage& msg);
  bool verify(ByteSpan charging_pub) const;
};

struct TimestampToken {
  int64_t time = 0;
  crypto::Digest subject_digest;
  Bytes authority_signature;

  wire::WireMessage to_wire() const;
  static TimestampToken from_wire(const wire::WireMessage& msg);
  bool verify(ByteSpan authority_pub) const;
};

// Device self-description sent with an update request; chosen schema:
// model, hardware revision, installed firmware version, request nonce.
struct DeviceDescription {
  std::string model;
  std::string hw_revision;
  std::string fw_version;
  std::array<uint8_t, 32> nonce{};
  Bytes aik_signature;

  wire::WireMessage to_wire() const;
  static DeviceDescription from_wire(const wire::WireMessage& msg);
  bool verify(ByteSpan aik_pub) const;
};

struct UpdatePackage {
  Bytes firmware;
  std::array<uint8_t, 32> device_nonce{};
  std::string version;
  Bytes service_signature;

  wire::WireMessage to_wire() const;
  static UpdatePackage from_wire(const wire::WireMessage& msg);
  bool verify(ByteSpan service_pub) const;
};

// Attestation gate shared by every provider-side party: checks the
// credential, the quote signature, the nonce, the log replay and the
// reference configuration. Throws Untrusted (or RevokedCredential when a
// validity answer is supplied and not Good).
void require_trusted(const pca::AikCredential& cred, ByteSpan pca_pub,
                     const boot::ReferenceTable& reference,
                     const tpm::Quote& quote, const boot::BootLog& log,
                     ByteSpan challenge_nonce,
                     const std::optional<pca::SignedValidity>& validity);

// Verifies the aik credential / bind certificate chain; returns the bind
// public key to encrypt to. Throws `chain_error` on any broken link.
Bytes certified_bind_key(const pca::AikCredential& cred,
                         const pca::BindKeyCertificate& cert, ByteSpan pca_pub,
                         ErrorCode chain_error);

// Online time-stamping authority.
class TimeAuthority {
 public:
  static TimeAuthority create(DetRng& parent_rng);
  const Bytes& public_key() const { return sign_.public_bytes(); }
  TimestampToken timestamp(const crypto::Digest& subject, int64_t now) const;

 private:
  KeyPair sign_;
};

// Content vendor: publishes offers, registers subscribers, runs the head
// end, issues entitlements and online permits.
class ServiceProvider {
 public:
  static ServiceProvider create(const std::string& name, DetRng& parent_rng,
                                Bytes pca_pub);

  const std::string& name() const { return name_; }
  const Bytes& public_key() const { return sign_.public_bytes(); }
  boot::ReferenceTable& reference() { return reference_; }

  void set_offer(const std::string& offer_id,
                 std::vector<ServiceEntry> services);
  const ServiceOffer& offer() const { return offer_; }

  // head end
  void add_stream(uint16_t stream_id, uint32_t period_packets,
                  uint64_t content_seed, DetRng& rng);
  ByteSpan stream_secret(uint16_t stream_id) const;
  uint32_t stream_period_packets(uint16_t stream_id) const;
  // Clear and scrambled packets for [first, first+count).
  std::vector<scramble::TransportPacket> original_packets(uint16_t stream_id,
                                                          uint32_t first,
                                                          uint32_t count) const;
  std::vector<scramble::TransportPacket> broadcast(uint16_t stream_id,
                                                   uint32_t first,
                                                   uint32_t count) const;

  RegistrationReceipt register_box(const pca::AikCredential& cred,
                                   const pca::BindKeyCertificate& bind_cert,
                                   const SubscriptionSelection& selection,
                                   const pca::SignedValidity& validity,
                                   const tpm::Quote& quote,
                                   const boot::BootLog& log,
                                   ByteSpan challenge_nonce);
  bool is_subscriber(const std::string& label) const {
    return subscribers_.contains(label);
  }

  // Builds a signed grant whose secret only the subscriber's device can
  // recover. Requires a fresh Trusted attestation.
  cas::EntitlementGrant issue_entitlement(const std::string& label,
                                          uint16_t stream_id,
                                          const cas::UsageConstraints& c,
                                          bool online_gated,
                                          const tpm::Quote& quote,
                                          const boot::BootLog& log,
                                          ByteSpan challenge_nonce);

  void acl_add(const std::string& label) { acl_.insert(label); }
  cas::OnlinePermit grant_online_permit(const pca::AikCredential& cred,
                                        uint16_t stream_id,
                                        uint32_t period_from,
                                        uint32_t period_to,
                                        const pca::SignedValidity& validity);

 private:
  std::string name_;
  DetRng rng_{0};
  KeyPair sign_;
  Bytes pca_pub_;
  ServiceOffer offer_;
  boot::ReferenceTable reference_;
  std::set<std::string> acl_;

  struct Subscriber {
    pca::AikCredential credential;
    pca::BindKeyCertificate bind_cert;
    SubscriptionSelection selection;
  };
  std::map<std::string, Subscriber> subscribers_;

  struct Stream {
    Bytes secret;  // 16-byte entitlement secret, shared via grants
    uint32_t period_packets = scramble::kDefaultPeriodPackets;
    uint64_t content_seed = 0;
  };
  std::map<uint16_t, Stream> streams_;
};

// Deposit and settlement party.
class ChargingProvider {
 public:
  static ChargingProvider create(const std::string& name, DetRng& parent_rng,
                                 Bytes pca_pub, Bytes time_authority_pub);

  const std::string& name() const { return name_; }
  const Bytes& sign_public() const { return sign_.public_bytes(); }
  const Bytes& enc_public() const { return enc_.public_bytes(); }
  boot::ReferenceTable& reference() { return reference_; }

  // The business relation gate: only pre-authorized labels get vouchers.
  void authorize(const std::string& label) { contracts_ok_.insert(label); }

  // Registers the identity for postpaid settlement (stores the key needed
  // to verify record signatures).
  void add_contract(const pca::AikCredential& cred,
                    const pca::BindKeyCertificate& bind_cert);
  bool has_contract(const std::string& label) const {
    return contracts_.contains(label);
  }

  struct IssuedVoucher {
    DepositVoucher voucher;
    Bytes ciphertext;  // encrypted to the device's certified bind key
  };
  IssuedVoucher top_up(const pca::AikCredential& cred,
                       const pca::BindKeyCertificate& bind_cert,
                       uint64_t amount, const tpm::Quote& quote,
                       const boot::BootLog& log, ByteSpan challenge_nonce);

  struct Invoice {
    std::map<std::string, uint64_t> totals;
    std::vector<std::pair<size_t, ErrorCode>> rejects;
    std::vector<crypto::Digest> accepted_ct_digests;
  };
  // Decrypts and verifies each record; duplicates (same record nonce) are
  // acknowledged but counted once.
  Invoice settle(const std::vector<Bytes>& record_cts);

  uint64_t invoiced_total(const std::string& label) const;

  wire::WireMessage make_pull_request();

 private:
  std::string name_;
  DetRng rng_{0};
  KeyPair sign_;
  KeyPair enc_;
  Bytes pca_pub_;
  Bytes time_pub_;
  boot::ReferenceTable reference_;
  std::set<std::string> contracts_ok_;

  struct Contract {
    Bytes aik_pub;
    Bytes bind_pub;
  };
  std::map<std::string, Contract> contracts_;
  std::set<Bytes> seen_record_nonces_;
  std::map<std::string, uint64_t> ledger_;
};

// Firmware distribution party.
class UpdateService {
 public:
  static UpdateService create(const std::string& name, DetRng& parent_rng,
                              Bytes pca_pub);

  const std::string& name() const { return name_; }
  const Bytes& public_key() const { return sign_.public_bytes(); }

  void add_firmware(const std::string& model, const std::string& version,
                    Bytes image);
  bool has_firmware(const std::string& model) const {
    return firmware_.contains(model);
  }

  // Selects the image by the description block, echoes the device nonce,
  // signs and encrypts to the certified bind key.
  Bytes build_update(const pca::AikCredential& cred,
                     const pca::BindKeyCertificate& bind_cert,
                     const DeviceDescription& dddb);

 private:
  std::string name_;
  DetRng rng_{0};
  KeyPair sign_;
  Bytes pca_pub_;
  struct Firmware {
    std::string version;
    Bytes image;
  };
  std::map<std::string, Firmware> firmware_;
};

}  // namespace trustbox::providers

#endif  // TRUSTBOX_PROVIDERS_HPP
