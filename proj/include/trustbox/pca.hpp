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

#ifndef TRUSTBOX_PCA_HPP
#define TRUSTBOX_PCA_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trustbox/tpm.hpp"

namespace trustbox::pca {

using crypto::KeyPair;

// Pseudonymous identity token: binds an identity key to a platform without
// naming the endorsement key or the customer. Anyone holding the issuer's
// public key can check it.
struct AikCredential {
  std::string identity_label;
  Bytes aik_pub;
  std::string manufacturer_id;
  std::string model;
  std::string scheme_label;  // compatibility label, e.g. "rsa-1024"
  int64_t issued_at = 0;
  Bytes pca_signature;

  bool operator==(const AikCredential&) const = default;

  wire::WireMessage to_wire() const;
  static AikCredential from_wire(const wire::WireMessage& msg);
  bool verify(ByteSpan pca_pub) const;
};

// Identity-key endorsement of a device bind key: providers encrypt vouchers,
// entitlement secrets and update images to the certified key.
struct BindKeyCertificate {
  std::string bind_label;
  Bytes bind_pub;
  std::string identity_label;
  Bytes aik_signature;

  wire::WireMessage to_wire() const;
  static BindKeyCertificate from_wire(const wire::WireMessage& msg);
  bool verify(ByteSpan aik_pub) const;
};

enum class ValidityStatus : uint8_t { Good = 0, Revoked = 1, Unknown = 2 };

std::string_view validity_status_name(ValidityStatus s);

struct SignedValidity {
  std::string identity_label;
  ValidityStatus status = ValidityStatus::Unknown;
  std::array<uint8_t, 32> query_nonce{};
  Bytes signature;

  wire::WireMessage to_wire() const;
  static SignedValidity from_wire(const wire::WireMessage& msg);
  bool verify(ByteSpan pca_pub) const;
};

// First enrollment message. The platform credentials and the customer
// binding travel inside an envelope only the identity authority can open, so
// endorsement material never appears in a transcript in the clear.
struct EnrollRequest {
  std::string label;
  Bytes aik_pub;
  Bytes identity_binding;  // encoded IdentityBinding
  Bytes sealed_credentials;

  wire::WireMessage to_wire() const;
  static EnrollRequest from_wire(const wire::WireMessage& msg);
};

// Privacy CA / identity provider. Issues identity credentials after a
// two-round exchange, answers validity queries, vouches for provider keys
// when acting as the network operator, and escrows the customer binding for
// audited fraud cases.
class PcaService {
 public:
  static PcaService create(DetRng& parent_rng,
                           std::vector<Bytes> manufacturer_roots,
                           Bytes auditor_sign_pub, Bytes auditor_enc_pub);

  const Bytes& sign_public() const { return sign_.public_bytes(); }
  const Bytes& enc_public() const { return enc_.public_bytes(); }

  // Phase one: verify offered credentials and the identity self-binding,
  // then reply with a nonce only the genuine platform can recover. The nonce
  // round closes the gap between credential verification and credential
  // release; without it a relay could graft a foreign identity key onto a
  // genuine platform.
  Bytes begin_enrollment(const EnrollRequest& request);

  // Phase two: on a correct nonce signature, release the credential inside
  // an activation blob addressed to the enrolling platform, and write the
  // escrow record.
  Bytes complete_enrollment(const std::string& label, ByteSpan response_sig,
                            int64_t now);

  SignedValidity check_validity(const std::string& label,
                                ByteSpan query_nonce) const;
  void revoke(const std::string& label);

  // Audited identity escrow. The token must be signed by the configured
  // auditor; the response is encrypted to the auditor so the customer
  // binding never crosses the network in the clear.
  Bytes reveal_identity(const std::string& label,
                        const wire::WireMessage& token);
  const std::vector<std::string>& audit_log() const { return audit_log_; }

  // Operator vouching for provider keys, replacing pre-installed roots.
  void register_provider(const std::string& name, ByteSpan provider_sign_pub);
  wire::WireMessage vouch_provider(const std::string& name);

  size_t issued_count() const { return issued_.size(); }
  bool has_pending(const std::string& label) const {
    return pending_.contains(label);
  }

 private:
  PcaService() = default;

  DetRng rng_{0};
  KeyPair sign_;
  KeyPair enc_;
  std::vector<Bytes> manufacturer_roots_;
  Bytes auditor_sign_pub_;
  Bytes auditor_enc_pub_;

  struct Issued {
    Bytes aik_pub;
    ValidityStatus status = ValidityStatus::Good;
    crypto::Digest endorsement_digest;
    std::string customer_id;
  };
  std::map<std::string, Issued> issued_;

  struct Pending {
    EnrollRequest request;
    std::string manufacturer_id;
    std::string model;
    std::string customer_id;
    crypto::Digest endorsement_digest;
    Bytes ek_decrypt_pub;
    std::array<uint8_t, 32> challenge{};
  };
  std::map<std::string, Pending> pending_;

  std::vector<std::string> audit_log_;
  std::map<std::string, Bytes> provider_registry_;
};

// Canonical bytes a platform signs to answer an enrollment challenge.
Bytes enrollment_response_payload(const std::string& label, ByteSpan nonce32);

// Plaintext carried inside EnrollRequest::sealed_credentials.
Bytes pack_enrollment_credentials(const tpm::EkCredential& ekc,
                                  const tpm::PlatformCredential& pc,
                                  const std::string& customer_id);

}  // namespace trustbox::pca

#endif  // TRUSTBOX_PCA_HPP
