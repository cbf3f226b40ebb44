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

#ifndef TRUSTBOX_TPM_HPP
#define TRUSTBOX_TPM_HPP

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "trustbox/crypto.hpp"
#include "trustbox/wire.hpp"

namespace trustbox::tpm {

constexpr size_t kNumPcrs = 16;
constexpr size_t kOwnerAuthLen = 20;
constexpr size_t kNonceLen = 32;

using crypto::Digest;
using crypto::KeyPair;
using PcrSelection = std::vector<uint8_t>;

// Manufacture-time assertion that the holder of the private endorsement key
// is a genuine module. Carries both endorsement public halves: the signing
// half proves identity, the decryption half receives material only this
// device can open.
struct EkCredential {
  Bytes ek_sign_pub;
  Bytes ek_decrypt_pub;
  std::string manufacturer_id;
  std::string model;
  Bytes signature;

  wire::WireMessage to_wire() const;
  static EkCredential from_wire(const wire::WireMessage& msg);
  bool verify(ByteSpan manufacturer_root) const;
};

struct PlatformCredential {
  std::string manufacturer_id;
  std::string model;
  Bytes signature;

  wire::WireMessage to_wire() const;
  static PlatformCredential from_wire(const wire::WireMessage& msg);
  bool verify(ByteSpan manufacturer_root) const;
};

// Signed report of selected register values, echoing the verifier's nonce.
struct Quote {
  PcrSelection selection;
  std::vector<Digest> pcr_values;
  std::array<uint8_t, kNonceLen> external_nonce{};
  Bytes signature;

  wire::WireMessage to_wire() const;
  static Quote from_wire(const wire::WireMessage& msg);
  bool verify(ByteSpan aik_pub) const;
};

// Payload locked to a register state: recoverable only on the sealing
// device and only while the targeted registers hold the expected values.
struct SealedBlob {
  PcrSelection selection;
  std::vector<Digest> expected;
  Bytes ciphertext;
  Digest integrity_tag;

  wire::WireMessage to_wire() const;
  static SealedBlob from_wire(const wire::WireMessage& msg);
};

// Software trust anchor for one device. Operations on one instance are
// serialized by the caller; distinct instances are fully independent.
// The endorsement material is fixed at manufacture; aik and bind private
// halves never leave the structure.
class TpmState {
 public:
  TpmState() = default;

  // ownership
  void take_ownership(ByteSpan auth20);
  bool owned() const { return owner_auth_.has_value(); }

  // identity lifecycle
  struct IdentityResult {
    Bytes aik_pub;
    Bytes identity_binding;  // encoded IdentityBinding
  };
  IdentityResult make_identity(ByteSpan auth, const std::string& label,
                               DetRng& rng);
  // Opens the issuer's activation blob; returns the enclosed credential
  // bytes. Fails with DecryptFailure for a blob built for another device and
  // UnknownLabel when the blob names a label this device did not create.
  Bytes activate_identity(const std::string& label, ByteSpan activation_blob);
  bool aik_active(const std::string& label) const;
  const Bytes& aik_public(const std::string& label) const;
  // In-device signing by an identity key; the private half stays shielded.
  Bytes aik_sign(const std::string& label, ByteSpan data) const;

  // registers
  Digest pcr_extend(size_t index, const Digest& measurement);
  Digest pcr_value(size_t index) const;
  const std::array<Digest, kNumPcrs>& pcrs() const { return pcrs_; }
  void pcr_reset();

  Quote quote(const std::string& aik_label, const PcrSelection& selection,
              ByteSpan nonce32) const;

  // sealing
  SealedBlob seal(ByteSpan payload, const PcrSelection& selection,
                  const std::vector<Digest>& target_values, DetRng& rng) const;
  SealedBlob seal_to_current(ByteSpan payload, const PcrSelection& selection,
                             DetRng& rng) const;
  Bytes unseal(const SealedBlob& blob) const;

  // binding
  Bytes bind_key_create(ByteSpan auth, const std::string& label, DetRng& rng);
  const Bytes& bind_public(const std::string& label) const;
  Bytes unbind(ByteSpan auth, const std::string& label, ByteSpan ct) const;

  // replay cache
  bool consume_nonce(ByteSpan nonce32);
  void set_nonce_cache_persistent(bool persistent) {
    nonce_cache_persistent_ = persistent;
  }

  // Reboot: registers return to reset values; the nonce cache survives
  // unless configured otherwise.
  void power_cycle();

  // endorsement surface
  const EkCredential& ek_credential() const { return ek_credential_; }
  const PlatformCredential& platform_credential() const {
    return platform_credential_;
  }
  // Decrypts material addressed to the endorsement decryption key (issuer
  // challenges during identity enrollment).
  Bytes endorsement_decrypt(ByteSpan ct) const;

  // Full-state snapshot for scenario fixtures. Contains private seeds and
  // is flagged as such; it must never travel as a protocol message.
  wire::WireMessage export_state() const;
  static TpmState import_state(const wire::WireMessage& msg);

  // test support: every private seed held by this device
  std::vector<Bytes> private_material() const;

 private:
  friend struct Manufacturer;

  KeyPair ek_sign_;
  KeyPair ek_decrypt_;
  EkCredential ek_credential_;
  PlatformCredential platform_credential_;
  KeyPair storage_key_;  // per-device sealing key
  std::optional<std::array<uint8_t, kOwnerAuthLen>> owner_auth_;
  std::array<Digest, kNumPcrs> pcrs_{};

  struct AikSlot {
    KeyPair key;
    bool active = false;
  };
  std::map<std::string, AikSlot> aiks_;
  std::map<std::string, KeyPair> bind_keys_;
  std::set<Bytes> nonce_cache_;
  bool nonce_cache_persistent_ = true;

  void check_owner(ByteSpan auth) const;
};

// Issues endorsement material; stands in for the production line.
struct Manufacturer {
  std::string id;
  KeyPair root;

  static Manufacturer create(const std::string& id, DetRng& rng);
  TpmState make_tpm(const std::string& model, DetRng& rng) const;
  const Bytes& root_public() const { return root.public_bytes(); }
};

}  // namespace trustbox::tpm

#endif  // TRUSTBOX_TPM_HPP
