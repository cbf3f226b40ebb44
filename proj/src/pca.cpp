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

#include "trustbox/pca.hpp"

#include <algorithm>

#include "trustbox/errors.hpp"

namespace trustbox::pca {

using wire::MsgReader;
using wire::MsgType;
using wire::MsgWriter;

wire::WireMessage AikCredential::to_wire() const {
  return MsgWriter(MsgType::AikCredential)
      .add_str(identity_label)
      .add(aik_pub)
      .add_str(manufacturer_id)
      .add_str(model)
      .add_str(scheme_label)
      .add_u64(uint64_t(issued_at))
      .add(pca_signature)
      .take();
}

AikCredential AikCredential::from_wire(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::AikCredential, 7);
  AikCredential c;
  c.identity_label = r.str(0);
  c.aik_pub = r.field_vec(1);
  c.manufacturer_id = r.str(2);
  c.model = r.str(3);
  c.scheme_label = r.str(4);
  c.issued_at = int64_t(r.u64(5));
  c.pca_signature = r.field_vec(6);
  return c;
}

bool AikCredential::verify(ByteSpan pca_pub) const {
  return crypto::verify(pca_pub, wire::signing_input(to_wire()), pca_signature);
}

wire::WireMessage BindKeyCertificate::to_wire() const {
  return MsgWriter(MsgType::BindKeyCertificate)
      .add_str(bind_label)
      .add(bind_pub)
      .add_str(identity_label)
      .add(aik_signature)
      .take();
}

BindKeyCertificate BindKeyCertificate::from_wire(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::BindKeyCertificate, 4);
  BindKeyCertificate c;
  c.bind_label = r.str(0);
  c.bind_pub = r.field_vec(1);
  c.identity_label = r.str(2);
  c.aik_signature = r.field_vec(3);
  return c;
}

bool BindKeyCertificate::verify(ByteSpan aik_pub) const {
  return crypto::verify(aik_pub, wire::signing_input(to_wire()), aik_signature);
}

std::string_view validity_status_name(ValidityStatus s) {
  switch (s) {
    case ValidityStatus::Good:
      return "Good";
    case ValidityStatus::Revoked:
      return "Revoked";
    case ValidityStatus::Unknown:
      return "Unknown";
  }
  return "Unknown";
}

wire::WireMessage SignedValidity::to_wire() const {
  return MsgWriter(MsgType::ValidityResponse)
      .add_str(identity_label)
      .add_u8(uint8_t(status))
      .add(ByteSpan(query_nonce.data(), query_nonce.size()))
      .add(signature)
      .take();
}

SignedValidity SignedValidity::from_wire(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::ValidityResponse, 4);
  SignedValidity v;
  v.identity_label = r.str(0);
  uint8_t s = r.u8(1);
  if (s > 2) raise(ErrorCode::MalformedMessage, "validity status");
  v.status = ValidityStatus(s);
  auto n = r.fixed(2, 32);
  std::copy(n.begin(), n.end(), v.query_nonce.begin());
  v.signature = r.field_vec(3);
  return v;
}

bool SignedValidity::verify(ByteSpan pca_pub) const {
  return crypto::verify(pca_pub, wire::signing_input(to_wire()), signature);
}

wire::WireMessage EnrollRequest::to_wire() const {
  return MsgWriter(MsgType::EnrollRequest)
      .add_str(label)
      .add(aik_pub)
      .add(identity_binding)
      .add(sealed_credentials)
      .take();
}

EnrollRequest EnrollRequest::from_wire(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::EnrollRequest, 4);
  EnrollRequest req;
  req.label = r.str(0);
  req.aik_pub = r.field_vec(1);
  req.identity_binding = r.field_vec(2);
  req.sealed_credentials = r.field_vec(3);
  return req;
}

Bytes enrollment_response_payload(const std::string& label, ByteSpan nonce32) {
  return MsgWriter(MsgType::Raw).add_str(label).add(nonce32).encoded();
}

Bytes pack_enrollment_credentials(const tpm::EkCredential& ekc,
                                  const tpm::PlatformCredential& pc,
                                  const std::string& customer_id) {
  return MsgWriter(MsgType::Raw)
      .add(wire::encode(ekc.to_wire()))
      .add(wire::encode(pc.to_wire()))
      .add_str(customer_id)
      .encoded();
}

PcaService PcaService::create(DetRng& parent_rng,
                              std::vector<Bytes> manufacturer_roots,
                              Bytes auditor_sign_pub, Bytes auditor_enc_pub) {
  PcaService s;
  s.rng_ = parent_rng.fork();
  s.sign_ = KeyPair::generate(crypto::KeyUsage::Sign, s.rng_);
  s.enc_ = KeyPair::generate(crypto::KeyUsage::Decrypt, s.rng_);
  s.manufacturer_roots_ = std::move(manufacturer_roots);
  s.auditor_sign_pub_ = std::move(auditor_sign_pub);
  s.auditor_enc_pub_ = std::move(auditor_enc_pub);
  return s;
}

Bytes PcaService::begin_enrollment(const EnrollRequest& request) {
  // Open the credential envelope.
  Bytes plain;
  try {
    plain = crypto::decrypt(enc_, request.sealed_credentials);
  } catch (const Error&) {
    raise(ErrorCode::BadEkCredential, "credential envelope unreadable");
  }
  tpm::EkCredential ekc;
  tpm::PlatformCredential pc;
  std::string customer_id;
  try {
    wire::WireMessage env = wire::decode(plain);
    MsgReader r(env, MsgType::Raw, 3);
    ekc = tpm::EkCredential::from_wire(wire::decode(r.field(0)));
    pc = tpm::PlatformCredential::from_wire(wire::decode(r.field(1)));
    customer_id = r.str(2);
  } catch (const Error&) {
    raise(ErrorCode::BadEkCredential, "credential envelope malformed");
  }

  bool root_ok = false;
  for (const auto& root : manufacturer_roots_)
    root_ok = root_ok || (ekc.verify(root) && pc.verify(root));
  if (!root_ok) raise(ErrorCode::BadEkCredential, "unknown manufacturer root");

  // Proof of possession: the offered identity key must have signed its own
  // label and public half.
  bool binding_ok = false;
  try {
    wire::WireMessage binding = wire::decode(request.identity_binding);
    MsgReader r(binding, MsgType::IdentityBinding, 3);
    binding_ok = r.str(0) == request.label &&
                 r.field_vec(1) == request.aik_pub &&
                 crypto::verify(request.aik_pub, wire::signing_input(binding),
                                r.field(2));
  } catch (const Error&) {
    binding_ok = false;
  }
  if (!binding_ok) raise(ErrorCode::BadAikBinding, request.label);

  if (issued_.contains(request.label) || pending_.contains(request.label))
    raise(ErrorCode::DuplicateLabel, request.label);

  Pending p;
  p.request = request;
  p.manufacturer_id = ekc.manufacturer_id;
  p.model = ekc.model;
  p.customer_id = customer_id;
  p.endorsement_digest = crypto::hash(ekc.ek_sign_pub);
  p.ek_decrypt_pub = ekc.ek_decrypt_pub;
  p.challenge = rng_.block32();

  Bytes challenge_plain = MsgWriter(MsgType::Raw)
                              .add_str(request.label)
                              .add(ByteSpan(p.challenge.data(), 32))
                              .encoded();
  Bytes ct = crypto::encrypt_to(p.ek_decrypt_pub, challenge_plain, rng_);
  pending_.emplace(request.label, std::move(p));
  return ct;
}

Bytes PcaService::complete_enrollment(const std::string& label,
                                      ByteSpan response_sig, int64_t now) {
  auto it = pending_.find(label);
  if (it == pending_.end())
    raise(ErrorCode::ChallengeFailed, "no enrollment in progress");
  Pending p = std::move(it->second);
  pending_.erase(it);  // one attempt per challenge

  Bytes payload = enrollment_response_payload(
      label, ByteSpan(p.challenge.data(), p.challenge.size()));
  if (!crypto::verify(p.request.aik_pub, payload, response_sig))
    raise(ErrorCode::ChallengeFailed, label);

  AikCredential cred;
  cred.identity_label = label;
  cred.aik_pub = p.request.aik_pub;
  cred.manufacturer_id = p.manufacturer_id;
  cred.model = p.model;
  cred.scheme_label = std::string(crypto::kCompatSchemeLabel);
  cred.issued_at = now;
  cred.pca_signature =
      crypto::sign(sign_, wire::signing_input(cred.to_wire()));

  Issued rec;
  rec.aik_pub = p.request.aik_pub;
  rec.status = ValidityStatus::Good;
  rec.endorsement_digest = p.endorsement_digest;
  rec.customer_id = p.customer_id;
  issued_.emplace(label, std::move(rec));

  Bytes activation = MsgWriter(MsgType::Raw)
                         .add_str(label)
                         .add(wire::encode(cred.to_wire()))
                         .encoded();
  return crypto::encrypt_to(p.ek_decrypt_pub, activation, rng_);
}

SignedValidity PcaService::check_validity(const std::string& label,
                                          ByteSpan query_nonce) const {
  SignedValidity v;
  v.identity_label = label;
  auto it = issued_.find(label);
  v.status = it == issued_.end() ? ValidityStatus::Unknown : it->second.status;
  if (query_nonce.size() == v.query_nonce.size())
    std::copy(query_nonce.begin(), query_nonce.end(), v.query_nonce.begin());
  v.signature = crypto::sign(sign_, wire::signing_input(v.to_wire()));
  return v;
}

void PcaService::revoke(const std::string& label) {
  auto it = issued_.find(label);
  if (it == issued_.end()) raise(ErrorCode::Unknown, label);
  it->second.status = ValidityStatus::Revoked;
}

Bytes PcaService::reveal_identity(const std::string& label,
                                  const wire::WireMessage& token) {
  MsgReader r(token, MsgType::AuditToken, 3);
  if (r.str(0) != label ||
      !crypto::verify(auditor_sign_pub_, wire::signing_input(token),
                      r.field(2))) {
    raise(ErrorCode::Unauthorized, "audit token");
  }
  auto it = issued_.find(label);
  if (it == issued_.end()) raise(ErrorCode::Unknown, label);
  audit_log_.push_back("reveal " + label);
  return crypto::encrypt_to(auditor_enc_pub_,
                            to_bytes(it->second.customer_id), rng_);
}

void PcaService::register_provider(const std::string& name,
                                   ByteSpan provider_sign_pub) {
  provider_registry_[name] = Bytes(provider_sign_pub.begin(),
                                   provider_sign_pub.end());
}

wire::WireMessage PcaService::vouch_provider(const std::string& name) {
  auto it = provider_registry_.find(name);
  if (it == provider_registry_.end()) raise(ErrorCode::Unknown, name);
  MsgWriter w(MsgType::ProviderVoucher);
  w.add_str(name).add(it->second);
  wire::WireMessage msg = w.take();
  msg.fields.push_back(crypto::sign(sign_, wire::encode(msg)));
  return msg;
}

}  // namespace trustbox::pca
