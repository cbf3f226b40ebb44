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

#include "trustbox/providers.hpp"

#include <algorithm>

#include "trustbox/errors.hpp"

namespace trustbox::providers {

using wire::MsgReader;
using wire::MsgType;
using wire::MsgWriter;

// ---------------------------------------------------------------------------
// structures

wire::WireMessage ServiceEntry::to_wire() const {
  return MsgWriter(MsgType::ServiceEntry)
      .add_u16(stream_id)
      .add_str(description)
      .add_u8(models_mask)
      .add_u32(tariff)
      .take();
}

ServiceEntry ServiceEntry::from_wire(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::ServiceEntry, 4);
  ServiceEntry e;
  e.stream_id = r.u16(0);
  e.description = r.str(1);
  e.models_mask = r.u8(2);
  e.tariff = r.u32(3);
  return e;
}

wire::WireMessage ServiceOffer::to_wire() const {
  MsgWriter w(MsgType::ServiceOffer);
  w.add_str(offer_id);
  for (const auto& s : services) w.add(wire::encode(s.to_wire()));
  w.add(provider_signature);
  return w.take();
}

ServiceOffer ServiceOffer::from_wire(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::ServiceOffer, 2);
  ServiceOffer o;
  o.offer_id = r.str(0);
  for (size_t i = 1; i + 1 < r.size(); ++i)
    o.services.push_back(ServiceEntry::from_wire(wire::decode(r.field(i))));
  o.provider_signature = r.field_vec(r.size() - 1);
  return o;
}

bool ServiceOffer::verify(ByteSpan provider_pub) const {
  return crypto::verify(provider_pub, wire::signing_input(to_wire()),
                        provider_signature);
}

const ServiceEntry* ServiceOffer::find(uint16_t stream_id) const {
  for (const auto& s : services)
    if (s.stream_id == stream_id) return &s;
  return nullptr;
}

wire::WireMessage SubscriptionSelection::to_wire() const {
  return MsgWriter(MsgType::SubscriptionSelection)
      .add_str(offer_id)
      .add_u16(stream_id)
      .add_u8(uint8_t(model))
      .add_str(identity_label)
      .add(aik_signature)
      .take();
}

SubscriptionSelection SubscriptionSelection::from_wire(
    const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::SubscriptionSelection, 5);
  SubscriptionSelection s;
  s.offer_id = r.str(0);
  s.stream_id = r.u16(1);
  s.model = ChargingModel(r.u8(2));
  s.identity_label = r.str(3);
  s.aik_signature = r.field_vec(4);
  return s;
}

bool SubscriptionSelection::verify(ByteSpan aik_pub) const {
  return crypto::verify(aik_pub, wire::signing_input(to_wire()),
                        aik_signature);
}

wire::WireMessage RegistrationReceipt::to_wire() const {
  return MsgWriter(MsgType::RegistrationReceipt)
      .add_str(identity_label)
      .add_str(offer_id)
      .add_u16(stream_id)
      .add_u8(model)
      .add(provider_signature)
      .take();
}

RegistrationReceipt RegistrationReceipt::from_wire(
    const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::RegistrationReceipt, 5);
  RegistrationReceipt rec;
  rec.identity_label = r.str(0);
  rec.offer_id = r.str(1);
  rec.stream_id = r.u16(2);
  rec.model = r.u8(3);
  rec.provider_signature = r.field_vec(4);
  return rec;
}

bool RegistrationReceipt::verify(ByteSpan provider_pub) const {
  return crypto::verify(provider_pub, wire::signing_input(to_wire()),
                        provider_signature);
}

wire::WireMessage DepositVoucher::to_wire() const {
  return MsgWriter(MsgType::DepositVoucher)
      .add_u64(amount)
      .add(ByteSpan(nonce.data(), nonce.size()))
      .add_str(beneficiary)
      .add(charging_signature)
      .take();
}

DepositVoucher DepositVoucher::from_wire(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::DepositVoucher, 4);
  DepositVoucher v;
  v.amount = r.u64(0);
  auto n = r.fixed(1, 32);
  std::copy(n.begin(), n.end(), v.nonce.begin());
  v.beneficiary = r.str(2);
  v.charging_signature = r.field_vec(3);
  return v;
}

bool DepositVoucher::verify(ByteSpan charging_pub) const {
  return crypto::verify(charging_pub, wire::signing_input(to_wire()),
                        charging_signature);
}

wire::WireMessage TimestampToken::to_wire() const {
  return MsgWriter(MsgType::TimestampToken)
      .add_u64(uint64_t(time))
      .add(subject_digest.span())
      .add(authority_signature)
      .take();
}

TimestampToken TimestampToken::from_wire(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::TimestampToken, 3);
  TimestampToken t;
  t.time = int64_t(r.u64(0));
  t.subject_digest = crypto::Digest::from(r.fixed(1, 32));
  t.authority_signature = r.field_vec(2);
  return t;
}

bool TimestampToken::verify(ByteSpan authority_pub) const {
  return crypto::verify(authority_pub, wire::signing_input(to_wire()),
                        authority_signature);
}

wire::WireMessage DeviceDescription::to_wire() const {
  return MsgWriter(MsgType::DeviceDescription)
      .add_str(model)
      .add_str(hw_revision)
      .add_str(fw_version)
      .add(ByteSpan(nonce.data(), nonce.size()))
      .add(aik_signature)
      .take();
}

DeviceDescription DeviceDescription::from_wire(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::DeviceDescription, 5);
  DeviceDescription d;
  d.model = r.str(0);
  d.hw_revision = r.str(1);
  d.fw_version = r.str(2);
  auto n = r.fixed(3, 32);
  std::copy(n.begin(), n.end(), d.nonce.begin());
  d.aik_signature = r.field_vec(4);
  return d;
}

bool DeviceDescription::verify(ByteSpan aik_pub) const {
  return crypto::verify(aik_pub, wire::signing_input(to_wire()),
                        aik_signature);
}

wire::WireMessage UpdatePackage::to_wire() const {
  return MsgWriter(MsgType::UpdatePackage)
      .add(firmware)
      .add(ByteSpan(device_nonce.data(), device_nonce.size()))
      .add_str(version)
      .add(service_signature)
      .take();
}

UpdatePackage UpdatePackage::from_wire(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::UpdatePackage, 4);
  UpdatePackage p;
  p.firmware = r.field_vec(0);
  auto n = r.fixed(1, 32);
  std::copy(n.begin(), n.end(), p.device_nonce.begin());
  p.version = r.str(2);
  p.service_signature = r.field_vec(3);
  return p;
}

bool UpdatePackage::verify(ByteSpan service_pub) const {
  return crypto::verify(service_pub, wire::signing_input(to_wire()),
                        service_signature);
}

// ---------------------------------------------------------------------------
// shared gates

void require_trusted(const pca::AikCredential& cred, ByteSpan pca_pub,
                     const boot::ReferenceTable& reference,
                     const tpm::Quote& quote, const boot::BootLog& log,
                     ByteSpan challenge_nonce,
                     const std::optional<pca::SignedValidity>& validity) {
  if (!cred.verify(pca_pub))
    raise(ErrorCode::Untrusted, "identity credential does not verify");
  if (validity) {
    if (!validity->verify(pca_pub) ||
        validity->identity_label != cred.identity_label)
      raise(ErrorCode::Untrusted, "validity answer does not verify");
    if (validity->status != pca::ValidityStatus::Good)
      raise(ErrorCode::RevokedCredential, cred.identity_label);
  }
  if (!quote.verify(cred.aik_pub))
    raise(ErrorCode::Untrusted, "quote signature");
  boot::Verdict v = boot::verify_log(log, reference, quote, challenge_nonce);
  if (!v.trusted)
    raise(ErrorCode::Untrusted,
          std::string(boot::verdict_reason_name(v.reason)));
}

Bytes certified_bind_key(const pca::AikCredential& cred,
                         const pca::BindKeyCertificate& cert, ByteSpan pca_pub,
                         ErrorCode chain_error) {
  if (!cred.verify(pca_pub) || !cert.verify(cred.aik_pub) ||
      cert.identity_label != cred.identity_label) {
    raise(chain_error, "bind key certificate chain");
  }
  return cert.bind_pub;
}

// ---------------------------------------------------------------------------
// time authority

TimeAuthority TimeAuthority::create(DetRng& parent_rng) {
  TimeAuthority t;
  DetRng rng = parent_rng.fork();
  t.sign_ = KeyPair::generate(crypto::KeyUsage::Sign, rng);
  return t;
}

TimestampToken TimeAuthority::timestamp(const crypto::Digest& subject,
                                        int64_t now) const {
  TimestampToken t;
  t.time = now;
  t.subject_digest = subject;
  t.authority_signature =
      crypto::sign(sign_, wire::signing_input(t.to_wire()));
  return t;
}

// ---------------------------------------------------------------------------
// service provider

ServiceProvider ServiceProvider::create(const std::string& name,
                                        DetRng& parent_rng, Bytes pca_pub) {
  ServiceProvider p;
  p.name_ = name;
  p.rng_ = parent_rng.fork();
  p.sign_ = KeyPair::generate(crypto::KeyUsage::Sign, p.rng_);
  p.pca_pub_ = std::move(pca_pub);
  return p;
}

void ServiceProvider::set_offer(const std::string& offer_id,
                                std::vector<ServiceEntry> services) {
  offer_.offer_id = offer_id;
  offer_.services = std::move(services);
  offer_.provider_signature.clear();
  offer_.provider_signature =
      crypto::sign(sign_, wire::signing_input(offer_.to_wire()));
}

void ServiceProvider::add_stream(uint16_t stream_id, uint32_t period_packets,
                                 uint64_t content_seed, DetRng& rng) {
  Stream s;
  s.secret = rng.bytes(cas::kSecretLen);
  s.period_packets = period_packets;
  s.content_seed = content_seed;
  streams_[stream_id] = std::move(s);
}

ByteSpan ServiceProvider::stream_secret(uint16_t stream_id) const {
  auto it = streams_.find(stream_id);
  if (it == streams_.end()) raise(ErrorCode::Unknown, "no such stream");
  return it->second.secret;
}

uint32_t ServiceProvider::stream_period_packets(uint16_t stream_id) const {
  auto it = streams_.find(stream_id);
  if (it == streams_.end()) raise(ErrorCode::Unknown, "no such stream");
  return it->second.period_packets;
}

std::vector<scramble::TransportPacket> ServiceProvider::original_packets(
    uint16_t stream_id, uint32_t first, uint32_t count) const {
  auto it = streams_.find(stream_id);
  if (it == streams_.end()) raise(ErrorCode::Unknown, "no such stream");
  std::vector<scramble::TransportPacket> out;
  out.reserve(count);
  for (uint32_t i = 0; i < count; ++i)
    out.push_back(scramble::make_clear_packet(
        it->second.content_seed, stream_id, it->second.period_packets,
        first + i));
  return out;
}

std::vector<scramble::TransportPacket> ServiceProvider::broadcast(
    uint16_t stream_id, uint32_t first, uint32_t count) const {
  auto it = streams_.find(stream_id);
  if (it == streams_.end()) raise(ErrorCode::Unknown, "no such stream");
  return scramble::scramble_stream(it->second.secret,
                                   original_packets(stream_id, first, count));
}

RegistrationReceipt ServiceProvider::register_box(
    const pca::AikCredential& cred, const pca::BindKeyCertificate& bind_cert,
    const SubscriptionSelection& selection, const pca::SignedValidity& validity,
    const tpm::Quote& quote, const boot::BootLog& log,
    ByteSpan challenge_nonce) {
  require_trusted(cred, pca_pub_, reference_, quote, log, challenge_nonce,
                  validity);
  if (!selection.verify(cred.aik_pub) ||
      selection.identity_label != cred.identity_label)
    raise(ErrorCode::BadSelectionSignature, selection.identity_label);

  const ServiceEntry* entry = offer_.find(selection.stream_id);
  if (selection.offer_id != offer_.offer_id || entry == nullptr ||
      (entry->models_mask & uint8_t(selection.model)) == 0)
    raise(ErrorCode::ConfigError, "selection does not match the offer");

  certified_bind_key(cred, bind_cert, pca_pub_, ErrorCode::Untrusted);

  subscribers_[cred.identity_label] = Subscriber{cred, bind_cert, selection};

  RegistrationReceipt receipt;
  receipt.identity_label = cred.identity_label;
  receipt.offer_id = selection.offer_id;
  receipt.stream_id = selection.stream_id;
  receipt.model = uint8_t(selection.model);
  receipt.provider_signature =
      crypto::sign(sign_, wire::signing_input(receipt.to_wire()));
  return receipt;
}

cas::EntitlementGrant ServiceProvider::issue_entitlement(
    const std::string& label, uint16_t stream_id,
    const cas::UsageConstraints& c, bool online_gated, const tpm::Quote& quote,
    const boot::BootLog& log, ByteSpan challenge_nonce) {
  auto it = subscribers_.find(label);
  if (it == subscribers_.end()) raise(ErrorCode::UnknownSubscriber, label);
  c.validate();
  require_trusted(it->second.credential, pca_pub_, reference_, quote, log,
                  challenge_nonce, std::nullopt);

  auto stream = streams_.find(stream_id);
  if (stream == streams_.end()) raise(ErrorCode::Unknown, "no such stream");

  Bytes bind_pub = certified_bind_key(it->second.credential,
                                      it->second.bind_cert, pca_pub_,
                                      ErrorCode::Untrusted);

  cas::EntitlementGrant grant;
  grant.cas_id = name_;
  grant.stream_id = stream_id;
  grant.constraints = c;
  grant.online_gated = online_gated;
  grant.encrypted_secret =
      crypto::encrypt_to(bind_pub, stream->second.secret, rng_);
  grant.issuer_signature =
      crypto::sign(sign_, wire::signing_input(grant.to_wire()));
  return grant;
}

cas::OnlinePermit ServiceProvider::grant_online_permit(
    const pca::AikCredential& cred, uint16_t stream_id, uint32_t period_from,
    uint32_t period_to, const pca::SignedValidity& validity) {
  if (!validity.verify(pca_pub_) ||
      validity.identity_label != cred.identity_label ||
      validity.status != pca::ValidityStatus::Good)
    raise(ErrorCode::RevokedCredential, cred.identity_label);
  if (!acl_.contains(cred.identity_label))
    raise(ErrorCode::NotOnAcl, cred.identity_label);

  cas::OnlinePermit p;
  p.identity_label = cred.identity_label;
  p.stream_id = stream_id;
  p.period_from = period_from;
  p.period_to = period_to;
  p.nonce = rng_.block32();
  p.provider_signature =
      crypto::sign(sign_, wire::signing_input(p.to_wire()));
  return p;
}

// ---------------------------------------------------------------------------
// charging provider

ChargingProvider ChargingProvider::create(const std::string& name,
                                          DetRng& parent_rng, Bytes pca_pub,
                                          Bytes time_authority_pub) {
  ChargingProvider c;
  c.name_ = name;
  c.rng_ = parent_rng.fork();
  c.sign_ = KeyPair::generate(crypto::KeyUsage::Sign, c.rng_);
  c.enc_ = KeyPair::generate(crypto::KeyUsage::Decrypt, c.rng_);
  c.pca_pub_ = std::move(pca_pub);
  c.time_pub_ = std::move(time_authority_pub);
  return c;
}

void ChargingProvider::add_contract(const pca::AikCredential& cred,
                                    const pca::BindKeyCertificate& bind_cert) {
  if (!contracts_ok_.contains(cred.identity_label))
    raise(ErrorCode::NoContract, cred.identity_label);
  Bytes bind_pub =
      certified_bind_key(cred, bind_cert, pca_pub_, ErrorCode::NoContract);
  contracts_[cred.identity_label] = Contract{cred.aik_pub, bind_pub};
}

ChargingProvider::IssuedVoucher ChargingProvider::top_up(
    const pca::AikCredential& cred, const pca::BindKeyCertificate& bind_cert,
    uint64_t amount, const tpm::Quote& quote, const boot::BootLog& log,
    ByteSpan challenge_nonce) {
  if (!contracts_ok_.contains(cred.identity_label))
    raise(ErrorCode::NoContract, cred.identity_label);
  require_trusted(cred, pca_pub_, reference_, quote, log, challenge_nonce,
                  std::nullopt);
  Bytes bind_pub =
      certified_bind_key(cred, bind_cert, pca_pub_, ErrorCode::NoContract);
  contracts_[cred.identity_label] = Contract{cred.aik_pub, bind_pub};

  IssuedVoucher issued;
  issued.voucher.amount = amount;
  issued.voucher.nonce = rng_.block32();
  issued.voucher.beneficiary = cred.identity_label;
  issued.voucher.charging_signature =
      crypto::sign(sign_, wire::signing_input(issued.voucher.to_wire()));
  issued.ciphertext = crypto::encrypt_to(
      bind_pub, wire::encode(issued.voucher.to_wire()), rng_);
  return issued;
}

ChargingProvider::Invoice ChargingProvider::settle(
    const std::vector<Bytes>& record_cts) {
  Invoice inv;
  for (size_t i = 0; i < record_cts.size(); ++i) {
    const Bytes& ct = record_cts[i];
    Bytes plain;
    try {
      plain = crypto::decrypt(enc_, ct);
    } catch (const Error&) {
      inv.rejects.emplace_back(i, ErrorCode::BadSignature);
      continue;
    }
    try {
      wire::WireMessage msg = wire::decode(plain);
      MsgReader r(msg, MsgType::ConsumptionRecord, 7);
      Bytes record_nonce = r.field_vec(0);
      std::string label = r.str(1);
      uint32_t units = r.u32(4);

      auto contract = contracts_.find(label);
      if (contract == contracts_.end() ||
          !crypto::verify(contract->second.aik_pub, wire::signing_input(msg),
                          r.field(6))) {
        inv.rejects.emplace_back(i, ErrorCode::BadSignature);
        continue;
      }

      // The token must bind the record core under the time authority key.
      TimestampToken token;
      try {
        token = TimestampToken::from_wire(wire::decode(r.field(5)));
      } catch (const Error&) {
        inv.rejects.emplace_back(i, ErrorCode::BadTimestamp);
        continue;
      }
      Bytes core = MsgWriter(MsgType::Raw)
                       .add(record_nonce)
                       .add_str(label)
                       .add(r.field(2))
                       .add(r.field(3))
                       .add(r.field(4))
                       .encoded();
      if (!token.verify(time_pub_) ||
          token.subject_digest != crypto::hash(core)) {
        inv.rejects.emplace_back(i, ErrorCode::BadTimestamp);
        continue;
      }

      if (!seen_record_nonces_.insert(record_nonce).second) {
        inv.rejects.emplace_back(i, ErrorCode::DuplicateRecord);
        inv.accepted_ct_digests.push_back(crypto::hash(ct));  // still acked
        continue;
      }

      inv.totals[label] += units;
      ledger_[label] += units;
      inv.accepted_ct_digests.push_back(crypto::hash(ct));
    } catch (const Error&) {
      inv.rejects.emplace_back(i, ErrorCode::BadSignature);
    }
  }
  return inv;
}

uint64_t ChargingProvider::invoiced_total(const std::string& label) const {
  auto it = ledger_.find(label);
  return it == ledger_.end() ? 0 : it->second;
}

wire::WireMessage ChargingProvider::make_pull_request() {
  MsgWriter w(MsgType::PullRequest);
  w.add(ByteSpan(rng_.block32()));
  wire::WireMessage msg = w.take();
  msg.fields.push_back(crypto::sign(sign_, wire::encode(msg)));
  return msg;
}

// ---------------------------------------------------------------------------
// update service

UpdateService UpdateService::create(const std::string& name,
                                    DetRng& parent_rng, Bytes pca_pub) {
  UpdateService u;
  u.name_ = name;
  u.rng_ = parent_rng.fork();
  u.sign_ = KeyPair::generate(crypto::KeyUsage::Sign, u.rng_);
  u.pca_pub_ = std::move(pca_pub);
  return u;
}

void UpdateService::add_firmware(const std::string& model,
                                 const std::string& version, Bytes image) {
  firmware_[model] = Firmware{version, std::move(image)};
}

Bytes UpdateService::build_update(const pca::AikCredential& cred,
                                  const pca::BindKeyCertificate& bind_cert,
                                  const DeviceDescription& dddb) {
  if (!cred.verify(pca_pub_) || !dddb.verify(cred.aik_pub))
    raise(ErrorCode::BadDddbSignature, cred.identity_label);
  Bytes bind_pub = certified_bind_key(cred, bind_cert, pca_pub_,
                                      ErrorCode::BadDddbSignature);

  auto it = firmware_.find(dddb.model);
  if (it == firmware_.end()) raise(ErrorCode::NoFirmwareForModel, dddb.model);

  UpdatePackage pkg;
  pkg.firmware = it->second.image;
  pkg.device_nonce = dddb.nonce;
  pkg.version = it->second.version;
  pkg.service_signature =
      crypto::sign(sign_, wire::signing_input(pkg.to_wire()));
  return crypto::encrypt_to(bind_pub, wire::encode(pkg.to_wire()), rng_);
}

}  // namespace trustbox::providers
