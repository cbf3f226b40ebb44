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

#ifndef TRUSTBOX_BOX_HPP
#define TRUSTBOX_BOX_HPP

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trustbox/boot.hpp"
#include "trustbox/cas.hpp"
#include "trustbox/pca.hpp"
#include "trustbox/providers.hpp"

namespace trustbox::pca {
class PcaService;
}

namespace trustbox::stb {

// Watermark tag region inside every 184-byte payload.
constexpr size_t kTagOffset = 152;
constexpr size_t kTagLen = 32;
// Name of the measured component the update protocol replaces.
inline constexpr std::string_view kFirmwareComponent = "cas-module";

enum class ChargingMode : uint8_t { Prepaid = 1, Postpaid = 2 };

// Metering entry. Travels and rests encrypted to the charging provider;
// the signature covers every plaintext field including the time token.
struct ConsumptionRecord {
  std::array<uint8_t, 32> record_nonce{};
  std::string identity_label;
  uint16_t stream_id = 0;
  uint32_t period_index = 0;
  uint32_t units = 0;
  providers::TimestampToken token;
  Bytes aik_signature;

  wire::WireMessage to_wire() const;
  static ConsumptionRecord from_wire(const wire::WireMessage& msg);
};

// Record awaiting its timestamp token.
struct PendingRecord {
  std::array<uint8_t, 32> record_nonce{};
  uint16_t stream_id = 0;
  uint32_t period_index = 0;
  uint32_t units = 0;
};

// Bytes the time authority must certify for a pending record.
crypto::Digest record_core_digest(const PendingRecord& rec,
                                  const std::string& identity_label);

// Keys a box leaves the factory with (or learns via operator vouching).
struct TrustRoots {
  Bytes pca_sign_pub;
  Bytes pca_enc_pub;
  Bytes charging_sign_pub;
  Bytes charging_enc_pub;
  Bytes update_sign_pub;
  Bytes time_sign_pub;
  std::map<std::string, Bytes> provider_roots;  // pre-installed per provider
  bool mno_vouched = false;  // provider keys come from operator vouchers
};

struct WatchResult {
  Bytes output;  // concatenated descrambled payloads
  uint32_t periods_played = 0;
  uint32_t packets_played = 0;
  ErrorCode status = ErrorCode::None;  // None == ran to the end

  bool complete() const { return status == ErrorCode::None; }
};

// True when the buffers agree everywhere outside the per-packet tag region.
bool equal_outside_tag(ByteSpan original, ByteSpan tagged);

// The trusted set-top box: one device, one identity, any number of
// access-control instances. Construction runs the measured boot.
class SetTopBox {
 public:
  SetTopBox(std::string name, tpm::TpmState t,
            std::vector<boot::BootImage> images, TrustRoots roots,
            uint64_t initial_deposit, DetRng rng);

  const std::string& name() const { return name_; }
  tpm::TpmState& tpm() { return tpm_; }
  const tpm::TpmState& tpm() const { return tpm_; }
  const boot::BootLog& boot_log() const { return boot_log_; }
  int64_t clock() const { return clock_; }
  void set_clock(int64_t now) { clock_ = std::max(clock_, now); }

  // -- enrollment ----------------------------------------------------------
  pca::EnrollRequest begin_enrollment(const std::string& customer_id);
  Bytes answer_challenge(ByteSpan challenge_ct);
  pca::AikCredential finish_enrollment(ByteSpan activation_blob);
  // Direct (in-process) ownership flow; the network flow drives the same
  // steps through the message adapters.
  pca::AikCredential take_ownership_online(pca::PcaService& authority,
                                           const std::string& customer_id);

  bool enrolled() const { return credential_.has_value(); }
  const pca::AikCredential& credential() const;
  const std::string& identity_label() const { return aik_label_; }
  const std::string& customer_id() const { return customer_id_; }

  // -- bind key ------------------------------------------------------------
  pca::BindKeyCertificate certify_bind_key();
  const pca::BindKeyCertificate& bind_certificate() const;
  Bytes unbind(ByteSpan ct) const;

  // -- provider trust ------------------------------------------------------
  Bytes provider_key(const std::string& provider_name) const;
  void accept_provider_voucher(const wire::WireMessage& voucher);

  // -- attestation ---------------------------------------------------------
  tpm::Quote make_quote(const tpm::PcrSelection& selection,
                        ByteSpan nonce) const;

  // -- registration --------------------------------------------------------
  providers::SubscriptionSelection make_selection(
      const providers::ServiceOffer& offer, const std::string& provider_name,
      uint16_t stream_id, providers::ChargingModel model);
  void accept_receipt(const providers::RegistrationReceipt& receipt,
                      const std::string& provider_name);
  bool registered(uint16_t stream_id) const {
    return registrations_.contains(stream_id);
  }
  uint32_t tariff(uint16_t stream_id) const;

  // -- entitlements --------------------------------------------------------
  void install_entitlement(const cas::EntitlementGrant& grant,
                           const std::string& provider_name);
  void store_permit(const cas::OnlinePermit& permit,
                    const std::string& provider_name);
  cas::CasInstance& cas_instance(const std::string& cas_id);
  bool has_cas(const std::string& cas_id) const {
    return cas_instances_.contains(cas_id);
  }
  const std::map<std::string, cas::CasInstance>& cas_instances() const {
    return cas_instances_;
  }

  // -- playback ------------------------------------------------------------
  WatchResult watch(const std::vector<scramble::TransportPacket>& packets,
                    const std::string& cas_id, ChargingMode mode);
  Bytes watermark(ByteSpan descrambled, uint16_t stream_id) const;

  // -- deposit -------------------------------------------------------------
  uint64_t deposit() const { return deposit_; }
  uint64_t apply_top_up(ByteSpan voucher_ct);

  // -- consumption ---------------------------------------------------------
  bool has_unstamped() const { return !pending_records_.empty(); }
  const PendingRecord& next_unstamped() const;
  void finalize_record(const providers::TimestampToken& token);
  // All records not yet acknowledged (marks them transferred).
  std::vector<Bytes> collect_records();
  std::vector<Bytes> answer_pull(const wire::WireMessage& pull_request);
  void mark_acked(const std::vector<crypto::Digest>& ct_digests);
  uint64_t metered_units() const { return metered_units_; }
  size_t unacked_records() const { return stored_records_.size(); }

  // -- firmware update -----------------------------------------------------
  providers::DeviceDescription make_update_request(
      const std::string& hw_revision = "rev-a");
  void apply_update(ByteSpan package_ct);
  const std::string& firmware_version() const { return firmware_version_; }

  // test and scenario support
  std::vector<Bytes> private_material() const {
    return tpm_.private_material();
  }

 private:
  void require_enrolled() const;
  uint64_t charge_period(uint16_t stream_id);

  std::string name_;
  tpm::TpmState tpm_;
  std::vector<boot::BootImage> images_;
  boot::BootLog boot_log_;
  TrustRoots roots_;
  DetRng rng_;

  Bytes owner_auth_;
  std::string aik_label_;
  std::string customer_id_;
  std::optional<pca::AikCredential> credential_;
  std::string bind_label_;
  std::optional<pca::BindKeyCertificate> bind_cert_;
  std::map<std::string, Bytes> vouched_providers_;

  struct Registration {
    std::string provider_name;
    std::string offer_id;
    providers::ChargingModel model = providers::ChargingModel::Prepaid;
    uint32_t tariff = 0;
  };
  std::map<uint16_t, Registration> registrations_;
  std::map<uint16_t, Registration> pending_selections_;

  std::map<std::string, cas::CasInstance> cas_instances_;
  std::map<std::pair<std::string, uint16_t>, cas::OnlinePermit> permits_;

  uint64_t deposit_ = 0;
  uint64_t metered_units_ = 0;
  std::deque<PendingRecord> pending_records_;

  struct StoredRecord {
    Bytes ciphertext;
    crypto::Digest ct_digest;
    bool transferred = false;
  };
  std::vector<StoredRecord> stored_records_;

  std::optional<std::array<uint8_t, 32>> pending_update_nonce_;
  std::string firmware_version_ = "fw-1.0";
  int64_t clock_ = 0;
};

}  // namespace trustbox::stb

#endif  // TRUSTBOX_BOX_HPP
