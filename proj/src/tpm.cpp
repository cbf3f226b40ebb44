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

#include "trustbox/tpm.hpp"

#include <algorithm>
#include <cstring>

#include "trustbox/errors.hpp"

namespace trustbox::tpm {

using wire::MsgReader;
using wire::MsgType;
using wire::MsgWriter;

// ---------------------------------------------------------------------------
// credentials

wire::WireMessage EkCredential::to_wire() const {
  return MsgWriter(MsgType::EkCredential)
      .add(ek_sign_pub)
      .add(ek_decrypt_pub)
      .add_str(manufacturer_id)
      .add_str(model)
      .add(signature)
      .take();
}

EkCredential EkCredential::from_wire(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::EkCredential, 5);
  EkCredential c;
  c.ek_sign_pub = r.field_vec(0);
  c.ek_decrypt_pub = r.field_vec(1);
  c.manufacturer_id = r.str(2);
  c.model = r.str(3);
  c.signature = r.field_vec(4);
  return c;
}

bool EkCredential::verify(ByteSpan manufacturer_root) const {
  return crypto::verify(manufacturer_root, wire::signing_input(to_wire()),
                        signature);
}

wire::WireMessage PlatformCredential::to_wire() const {
  return MsgWriter(MsgType::PlatformCredential)
      .add_str(manufacturer_id)
      .add_str(model)
      .add(signature)
      .take();
}

PlatformCredential PlatformCredential::from_wire(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::PlatformCredential, 3);
  PlatformCredential c;
  c.manufacturer_id = r.str(0);
  c.model = r.str(1);
  c.signature = r.field_vec(2);
  return c;
}

bool PlatformCredential::verify(ByteSpan manufacturer_root) const {
  return crypto::verify(manufacturer_root, wire::signing_input(to_wire()),
                        signature);
}

// ---------------------------------------------------------------------------
// quote

static Bytes digests_concat(const std::vector<Digest>& values) {
  Bytes out;
  out.reserve(values.size() * 32);
  for (const auto& d : values) append(out, d.span());
  return out;
}

static std::vector<Digest> digests_split(ByteSpan raw) {
  if (raw.size() % 32 != 0)
    raise(ErrorCode::MalformedMessage, "digest list length");
  std::vector<Digest> out;
  out.reserve(raw.size() / 32);
  for (size_t i = 0; i < raw.size(); i += 32)
    out.push_back(Digest::from(raw.subspan(i, 32)));
  return out;
}

wire::WireMessage Quote::to_wire() const {
  return MsgWriter(MsgType::Quote)
      .add(selection)
      .add(digests_concat(pcr_values))
      .add(ByteSpan(external_nonce.data(), external_nonce.size()))
      .add(signature)
      .take();
}

Quote Quote::from_wire(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::Quote, 4);
  Quote q;
  auto sel = r.field(0);
  q.selection.assign(sel.begin(), sel.end());
  q.pcr_values = digests_split(r.field(1));
  if (q.pcr_values.size() != q.selection.size())
    raise(ErrorCode::MalformedMessage, "selection/value count mismatch");
  auto nonce = r.fixed(2, kNonceLen);
  std::copy(nonce.begin(), nonce.end(), q.external_nonce.begin());
  q.signature = r.field_vec(3);
  return q;
}

bool Quote::verify(ByteSpan aik_pub) const {
  return crypto::verify(aik_pub, wire::signing_input(to_wire()), signature);
}

// ---------------------------------------------------------------------------
// sealed blob

wire::WireMessage SealedBlob::to_wire() const {
  return MsgWriter(MsgType::SealedBlob)
      .add(selection)
      .add(digests_concat(expected))
      .add(ciphertext)
      .add(integrity_tag.span())
      .take();
}

SealedBlob SealedBlob::from_wire(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::SealedBlob, 4);
  SealedBlob b;
  auto sel = r.field(0);
  b.selection.assign(sel.begin(), sel.end());
  b.expected = digests_split(r.field(1));
  if (b.expected.size() != b.selection.size())
    raise(ErrorCode::MalformedMessage, "selection/value count mismatch");
  b.ciphertext = r.field_vec(2);
  b.integrity_tag = Digest::from(r.fixed(3, 32));
  return b;
}

// ---------------------------------------------------------------------------
// TpmState

void TpmState::check_owner(ByteSpan auth) const {
  if (!owner_auth_ || auth.size() != kOwnerAuthLen ||
      !std::equal(auth.begin(), auth.end(), owner_auth_->begin())) {
    raise(ErrorCode::AuthMismatch, "owner authorization");
  }
}

void TpmState::take_ownership(ByteSpan auth20) {
  if (owner_auth_) raise(ErrorCode::AlreadyOwned);
  if (auth20.size() != kOwnerAuthLen)
    raise(ErrorCode::AuthLengthInvalid, "owner secret must be 160 bits");
  std::array<uint8_t, kOwnerAuthLen> a;
  std::copy(auth20.begin(), auth20.end(), a.begin());
  owner_auth_ = a;
}

TpmState::IdentityResult TpmState::make_identity(ByteSpan auth,
                                                 const std::string& label,
                                                 DetRng& rng) {
  check_owner(auth);
  if (aiks_.contains(label)) raise(ErrorCode::DuplicateLabel, label);
  AikSlot slot;
  slot.key = KeyPair::generate(crypto::KeyUsage::Sign, rng);

  // Self-binding: the fresh key signs over its own label and public half,
  // proving possession to the issuing authority.
  MsgWriter binding(MsgType::IdentityBinding);
  binding.add_str(label).add(slot.key.public_bytes());
  wire::WireMessage msg = binding.take();
  Bytes sig = crypto::sign(slot.key, wire::encode(msg));
  msg.fields.push_back(sig);

  IdentityResult result{slot.key.public_bytes(), wire::encode(msg)};
  aiks_.emplace(label, std::move(slot));
  return result;
}

Bytes TpmState::activate_identity(const std::string& label,
                                  ByteSpan activation_blob) {
  Bytes plain = crypto::decrypt(ek_decrypt_, activation_blob);
  wire::WireMessage inner = wire::decode(plain);
  MsgReader r(inner, MsgType::Raw, 2);
  std::string named = r.str(0);
  auto it = aiks_.find(named);
  if (named != label || it == aiks_.end())
    raise(ErrorCode::UnknownLabel, named);
  it->second.active = true;
  return r.field_vec(1);
}

bool TpmState::aik_active(const std::string& label) const {
  auto it = aiks_.find(label);
  return it != aiks_.end() && it->second.active;
}

const Bytes& TpmState::aik_public(const std::string& label) const {
  auto it = aiks_.find(label);
  if (it == aiks_.end()) raise(ErrorCode::UnknownLabel, label);
  return it->second.key.public_bytes();
}

Bytes TpmState::aik_sign(const std::string& label, ByteSpan data) const {
  auto it = aiks_.find(label);
  if (it == aiks_.end()) raise(ErrorCode::UnknownLabel, label);
  return crypto::sign(it->second.key, data);
}

Digest TpmState::pcr_extend(size_t index, const Digest& measurement) {
  if (index >= kNumPcrs) raise(ErrorCode::IndexOutOfRange);
  pcrs_[index] = crypto::hash2(pcrs_[index].span(), measurement.span());
  return pcrs_[index];
}

Digest TpmState::pcr_value(size_t index) const {
  if (index >= kNumPcrs) raise(ErrorCode::IndexOutOfRange);
  return pcrs_[index];
}

void TpmState::pcr_reset() { pcrs_.fill(Digest{}); }

Quote TpmState::quote(const std::string& aik_label,
                      const PcrSelection& selection, ByteSpan nonce32) const {
  auto it = aiks_.find(aik_label);
  if (it == aiks_.end() || !it->second.active)
    raise(ErrorCode::InactiveAik, aik_label);
  if (nonce32.size() != kNonceLen)
    raise(ErrorCode::MalformedMessage, "quote nonce must be 32 bytes");
  Quote q;
  q.selection = selection;
  for (uint8_t idx : selection) q.pcr_values.push_back(pcr_value(idx));
  std::copy(nonce32.begin(), nonce32.end(), q.external_nonce.begin());
  q.signature = crypto::sign(it->second.key, wire::signing_input(q.to_wire()));
  return q;
}

SealedBlob TpmState::seal(ByteSpan payload, const PcrSelection& selection,
                          const std::vector<Digest>& target_values,
                          DetRng& rng) const {
  if (selection.size() != target_values.size())
    raise(ErrorCode::SealFailure, "selection/value count mismatch");
  for (uint8_t idx : selection)
    if (idx >= kNumPcrs) raise(ErrorCode::IndexOutOfRange);
  SealedBlob blob;
  blob.selection = selection;
  blob.expected = target_values;
  blob.ciphertext = crypto::encrypt_to(storage_key_.public_bytes(), payload, rng);
  blob.integrity_tag = crypto::hash(payload);
  return blob;
}

SealedBlob TpmState::seal_to_current(ByteSpan payload,
                                     const PcrSelection& selection,
                                     DetRng& rng) const {
  std::vector<Digest> current;
  for (uint8_t idx : selection) current.push_back(pcr_value(idx));
  return seal(payload, selection, current, rng);
}

Bytes TpmState::unseal(const SealedBlob& blob) const {
  Bytes plain;
  try {
    plain = crypto::decrypt(storage_key_, blob.ciphertext);
  } catch (const Error&) {
    raise(ErrorCode::ForeignBlob, "sealed by a different device");
  }
  if (crypto::hash(plain) != blob.integrity_tag)
    raise(ErrorCode::ForeignBlob, "integrity tag mismatch");
  for (size_t i = 0; i < blob.selection.size(); ++i) {
    if (pcr_value(blob.selection[i]) != blob.expected[i])
      raise(ErrorCode::StateMismatch, "register state changed");
  }
  return plain;
}

Bytes TpmState::bind_key_create(ByteSpan auth, const std::string& label,
                                DetRng& rng) {
  check_owner(auth);
  if (bind_keys_.contains(label)) raise(ErrorCode::DuplicateLabel, label);
  KeyPair key = KeyPair::generate(crypto::KeyUsage::Decrypt, rng);
  Bytes pub = key.public_bytes();
  bind_keys_.emplace(label, std::move(key));
  return pub;
}

const Bytes& TpmState::bind_public(const std::string& label) const {
  auto it = bind_keys_.find(label);
  if (it == bind_keys_.end()) raise(ErrorCode::UnknownLabel, label);
  return it->second.public_bytes();
}

Bytes TpmState::unbind(ByteSpan auth, const std::string& label,
                       ByteSpan ct) const {
  check_owner(auth);
  auto it = bind_keys_.find(label);
  if (it == bind_keys_.end()) raise(ErrorCode::UnknownLabel, label);
  return crypto::decrypt(it->second, ct);
}

bool TpmState::consume_nonce(ByteSpan nonce32) {
  Bytes n(nonce32.begin(), nonce32.end());
  return nonce_cache_.insert(std::move(n)).second;
}

void TpmState::power_cycle() {
  pcr_reset();
  if (!nonce_cache_persistent_) nonce_cache_.clear();
}

Bytes TpmState::endorsement_decrypt(ByteSpan ct) const {
  return crypto::decrypt(ek_decrypt_, ct);
}

// ---------------------------------------------------------------------------
// snapshot

wire::WireMessage TpmState::export_state() const {
  MsgWriter w(MsgType::TpmSnapshot);
  w.add_str("PRIVATE");  // marker: contains key seeds, keep out of transcripts
  w.add(ByteSpan(ek_sign_.secret_seed()));
  w.add(ByteSpan(ek_decrypt_.secret_seed()));
  w.add(wire::encode(ek_credential_.to_wire()));
  w.add(wire::encode(platform_credential_.to_wire()));
  w.add(ByteSpan(storage_key_.secret_seed()));
  w.add(owner_auth_ ? Bytes(owner_auth_->begin(), owner_auth_->end()) : Bytes{});
  Bytes pcrs;
  for (const auto& d : pcrs_) append(pcrs, d.span());
  w.add(pcrs);
  w.add_u8(nonce_cache_persistent_ ? 1 : 0);

  w.add_u32(uint32_t(aiks_.size()));
  for (const auto& [label, slot] : aiks_) {
    w.add_str(label);
    w.add(ByteSpan(slot.key.secret_seed()));
    w.add_u8(slot.active ? 1 : 0);
  }
  w.add_u32(uint32_t(bind_keys_.size()));
  for (const auto& [label, key] : bind_keys_) {
    w.add_str(label);
    w.add(ByteSpan(key.secret_seed()));
  }
  w.add_u32(uint32_t(nonce_cache_.size()));
  for (const auto& n : nonce_cache_) w.add(n);
  return w.take();
}

TpmState TpmState::import_state(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::TpmSnapshot, 9);
  if (r.str(0) != "PRIVATE")
    raise(ErrorCode::MalformedMessage, "missing private marker");
  TpmState t;
  t.ek_sign_ = KeyPair::from_seed(crypto::KeyUsage::Sign, r.fixed(1, 32));
  t.ek_decrypt_ = KeyPair::from_seed(crypto::KeyUsage::Decrypt, r.fixed(2, 32));
  t.ek_credential_ = EkCredential::from_wire(wire::decode(r.field(3)));
  t.platform_credential_ =
      PlatformCredential::from_wire(wire::decode(r.field(4)));
  t.storage_key_ = KeyPair::from_seed(crypto::KeyUsage::Decrypt, r.fixed(5, 32));
  auto auth = r.field(6);
  if (!auth.empty()) {
    if (auth.size() != kOwnerAuthLen)
      raise(ErrorCode::MalformedMessage, "owner auth length");
    std::array<uint8_t, kOwnerAuthLen> a;
    std::copy(auth.begin(), auth.end(), a.begin());
    t.owner_auth_ = a;
  }
  auto pcrs = r.fixed(7, kNumPcrs * 32);
  for (size_t i = 0; i < kNumPcrs; ++i)
    t.pcrs_[i] = Digest::from(pcrs.subspan(i * 32, 32));
  t.nonce_cache_persistent_ = r.u8(8) != 0;

  size_t pos = 9;
  uint32_t naiks = r.u32(pos++);
  for (uint32_t i = 0; i < naiks; ++i) {
    std::string label = r.str(pos++);
    KeyPair key = KeyPair::from_seed(crypto::KeyUsage::Sign, r.fixed(pos++, 32));
    bool active = r.u8(pos++) != 0;
    t.aiks_.emplace(label, AikSlot{std::move(key), active});
  }
  uint32_t nbind = r.u32(pos++);
  for (uint32_t i = 0; i < nbind; ++i) {
    std::string label = r.str(pos++);
    t.bind_keys_.emplace(
        label, KeyPair::from_seed(crypto::KeyUsage::Decrypt, r.fixed(pos++, 32)));
  }
  uint32_t nnonces = r.u32(pos++);
  for (uint32_t i = 0; i < nnonces; ++i)
    t.nonce_cache_.insert(r.field_vec(pos++));
  return t;
}

std::vector<Bytes> TpmState::private_material() const {
  std::vector<Bytes> out;
  auto push_seed = [&out](const KeyPair& k) {
    out.emplace_back(k.secret_seed().begin(), k.secret_seed().end());
  };
  push_seed(ek_sign_);
  push_seed(ek_decrypt_);
  push_seed(storage_key_);
  for (const auto& [_, slot] : aiks_) push_seed(slot.key);
  for (const auto& [_, key] : bind_keys_) push_seed(key);
  if (owner_auth_)
    out.emplace_back(owner_auth_->begin(), owner_auth_->end());
  return out;
}

// ---------------------------------------------------------------------------
// manufacturer

Manufacturer Manufacturer::create(const std::string& id, DetRng& rng) {
  Manufacturer m;
  m.id = id;
  m.root = KeyPair::generate(crypto::KeyUsage::Sign, rng);
  return m;
}

TpmState Manufacturer::make_tpm(const std::string& model, DetRng& rng) const {
  TpmState t;
  t.ek_sign_ = KeyPair::generate(crypto::KeyUsage::Sign, rng);
  t.ek_decrypt_ = KeyPair::generate(crypto::KeyUsage::Decrypt, rng);
  t.storage_key_ = KeyPair::generate(crypto::KeyUsage::Decrypt, rng);

  t.ek_credential_.ek_sign_pub = t.ek_sign_.public_bytes();
  t.ek_credential_.ek_decrypt_pub = t.ek_decrypt_.public_bytes();
  t.ek_credential_.manufacturer_id = id;
  t.ek_credential_.model = model;
  t.ek_credential_.signature = crypto::sign(
      root, wire::signing_input(t.ek_credential_.to_wire()));

  t.platform_credential_.manufacturer_id = id;
  t.platform_credential_.model = model;
  t.platform_credential_.signature = crypto::sign(
      root, wire::signing_input(t.platform_credential_.to_wire()));
  return t;
}

}  // namespace trustbox::tpm
