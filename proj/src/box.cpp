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

#include "trustbox/box.hpp"

#include <algorithm>
#include <cstring>

#include "trustbox/errors.hpp"

namespace trustbox::stb {

using wire::MsgReader;
using wire::MsgType;
using wire::MsgWriter;

wire::WireMessage ConsumptionRecord::to_wire() const {
  return MsgWriter(MsgType::ConsumptionRecord)
      .add(ByteSpan(record_nonce.data(), record_nonce.size()))
      .add_str(identity_label)
      .add_u16(stream_id)
      .add_u32(period_index)
      .add_u32(units)
      .add(wire::encode(token.to_wire()))
      .add(aik_signature)
      .take();
}

ConsumptionRecord ConsumptionRecord::from_wire(const wire::WireMessage& msg) {
  MsgReader r(msg, MsgType::ConsumptionRecord, 7);
  ConsumptionRecord rec;
  auto n = r.fixed(0, 32);
  std::copy(n.begin(), n.end(), rec.record_nonce.begin());
  rec.identity_label = r.str(1);
  rec.stream_id = r.u16(2);
  rec.period_index = r.u32(3);
  rec.units = r.u32(4);
  rec.token = providers::TimestampToken::from_wire(wire::decode(r.field(5)));
  rec.aik_signature = r.field_vec(6);
  return rec;
}

crypto::Digest record_core_digest(const PendingRecord& rec,
                                  const std::string& identity_label) {
  Bytes core = MsgWriter(MsgType::Raw)
                   .add(ByteSpan(rec.record_nonce.data(), 32))
                   .add_str(identity_label)
                   .add_u16(rec.stream_id)
                   .add_u32(rec.period_index)
                   .add_u32(rec.units)
                   .encoded();
  return crypto::hash(core);
}

bool equal_outside_tag(ByteSpan original, ByteSpan tagged) {
  if (original.size() != tagged.size()) return false;
  for (size_t i = 0; i < original.size(); ++i) {
    size_t off = i % scramble::kPayloadSize;
    bool in_tag = off >= kTagOffset && off < kTagOffset + kTagLen;
    if (!in_tag && original[i] != tagged[i]) return false;
  }
  return true;
}

SetTopBox::SetTopBox(std::string name, tpm::TpmState t,
                     std::vector<boot::BootImage> images, TrustRoots roots,
                     uint64_t initial_deposit, DetRng rng)
    : name_(std::move(name)),
      tpm_(std::move(t)),
      images_(std::move(images)),
      roots_(std::move(roots)),
      rng_(std::move(rng)),
      deposit_(initial_deposit) {
  boot_log_ = boot::boot(tpm_, images_);
}

void SetTopBox::require_enrolled() const {
  if (!credential_) raise(ErrorCode::InactiveAik, name_ + " not enrolled");
}

const pca::AikCredential& SetTopBox::credential() const {
  require_enrolled();
  return *credential_;
}

// ---------------------------------------------------------------------------
// enrollment

pca::EnrollRequest SetTopBox::begin_enrollment(const std::string& customer_id) {
  if (tpm_.owned()) raise(ErrorCode::AlreadyOwned, name_);
  owner_auth_ = rng_.bytes(tpm::kOwnerAuthLen);
  tpm_.take_ownership(owner_auth_);
  customer_id_ = customer_id;
  aik_label_ = "aik:" + name_;
  auto identity = tpm_.make_identity(owner_auth_, aik_label_, rng_);

  pca::EnrollRequest req;
  req.label = aik_label_;
  req.aik_pub = identity.aik_pub;
  req.identity_binding = identity.identity_binding;
  req.sealed_credentials = crypto::encrypt_to(
      roots_.pca_enc_pub,
      pca::pack_enrollment_credentials(tpm_.ek_credential(),
                                       tpm_.platform_credential(), customer_id),
      rng_);
  return req;
}

Bytes SetTopBox::answer_challenge(ByteSpan challenge_ct) {
  Bytes plain;
  try {
    plain = tpm_.endorsement_decrypt(challenge_ct);
  } catch (const Error&) {
    raise(ErrorCode::EnrollmentFailed, "challenge unreadable");
  }
  wire::WireMessage msg = wire::decode(plain);
  MsgReader r(msg, MsgType::Raw, 2);
  if (r.str(0) != aik_label_)
    raise(ErrorCode::EnrollmentFailed, "challenge names a different identity");
  return tpm_.aik_sign(
      aik_label_, pca::enrollment_response_payload(aik_label_, r.field(1)));
}

pca::AikCredential SetTopBox::finish_enrollment(ByteSpan activation_blob) {
  Bytes cred_bytes = tpm_.activate_identity(aik_label_, activation_blob);
  pca::AikCredential cred =
      pca::AikCredential::from_wire(wire::decode(cred_bytes));
  if (!cred.verify(roots_.pca_sign_pub) || cred.identity_label != aik_label_)
    raise(ErrorCode::EnrollmentFailed, "issued credential does not verify");
  credential_ = cred;
  return cred;
}

pca::AikCredential SetTopBox::take_ownership_online(
    pca::PcaService& authority, const std::string& customer_id) {
  if (tpm_.owned()) raise(ErrorCode::AlreadyOwned, name_);
  try {
    pca::EnrollRequest req = begin_enrollment(customer_id);
    Bytes challenge = authority.begin_enrollment(req);
    Bytes response = answer_challenge(challenge);
    Bytes blob = authority.complete_enrollment(aik_label_, response, clock_);
    return finish_enrollment(blob);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::AlreadyOwned) throw;
    raise(ErrorCode::EnrollmentFailed, e.what());
  }
}

// ---------------------------------------------------------------------------
// bind key

pca::BindKeyCertificate SetTopBox::certify_bind_key() {
  require_enrolled();
  if (!tpm_.aik_active(aik_label_)) raise(ErrorCode::InactiveAik, aik_label_);
  bind_label_ = "bind:" + name_;
  Bytes pub = tpm_.bind_key_create(owner_auth_, bind_label_, rng_);

  pca::BindKeyCertificate cert;
  cert.bind_label = bind_label_;
  cert.bind_pub = pub;
  cert.identity_label = aik_label_;
  cert.aik_signature =
      tpm_.aik_sign(aik_label_, wire::signing_input(cert.to_wire()));
  bind_cert_ = cert;
  return cert;
}

const pca::BindKeyCertificate& SetTopBox::bind_certificate() const {
  if (!bind_cert_) raise(ErrorCode::UnknownLabel, "no certified bind key");
  return *bind_cert_;
}

Bytes SetTopBox::unbind(ByteSpan ct) const {
  if (!bind_cert_) raise(ErrorCode::UnknownLabel, "no certified bind key");
  return tpm_.unbind(owner_auth_, bind_label_, ct);
}

// ---------------------------------------------------------------------------
// provider trust

Bytes SetTopBox::provider_key(const std::string& provider_name) const {
  if (roots_.mno_vouched) {
    auto it = vouched_providers_.find(provider_name);
    if (it == vouched_providers_.end())
      raise(ErrorCode::Unknown, "no voucher for " + provider_name);
    return it->second;
  }
  auto it = roots_.provider_roots.find(provider_name);
  if (it == roots_.provider_roots.end())
    raise(ErrorCode::Unknown, "no root for " + provider_name);
  return it->second;
}

void SetTopBox::accept_provider_voucher(const wire::WireMessage& voucher) {
  MsgReader r(voucher, MsgType::ProviderVoucher, 3);
  if (!crypto::verify(roots_.pca_sign_pub, wire::signing_input(voucher),
                      r.field(2)))
    raise(ErrorCode::BadSignature, "provider voucher");
  vouched_providers_[r.str(0)] = r.field_vec(1);
}

// ---------------------------------------------------------------------------
// attestation

tpm::Quote SetTopBox::make_quote(const tpm::PcrSelection& selection,
                                 ByteSpan nonce) const {
  require_enrolled();
  return tpm_.quote(aik_label_, selection, nonce);
}

// ---------------------------------------------------------------------------
// registration

providers::SubscriptionSelection SetTopBox::make_selection(
    const providers::ServiceOffer& offer, const std::string& provider_name,
    uint16_t stream_id, providers::ChargingModel model) {
  require_enrolled();
  if (!offer.verify(provider_key(provider_name)))
    raise(ErrorCode::BadSignature, "offer signature");
  const providers::ServiceEntry* entry = offer.find(stream_id);
  if (entry == nullptr || (entry->models_mask & uint8_t(model)) == 0)
    raise(ErrorCode::ConfigError, "offer has no such service/model");

  providers::SubscriptionSelection sel;
  sel.offer_id = offer.offer_id;
  sel.stream_id = stream_id;
  sel.model = model;
  sel.identity_label = aik_label_;
  sel.aik_signature =
      tpm_.aik_sign(aik_label_, wire::signing_input(sel.to_wire()));

  pending_selections_[stream_id] =
      Registration{provider_name, offer.offer_id, model, entry->tariff};
  return sel;
}

void SetTopBox::accept_receipt(const providers::RegistrationReceipt& receipt,
                               const std::string& provider_name) {
  if (!receipt.verify(provider_key(provider_name)) ||
      receipt.identity_label != aik_label_)
    raise(ErrorCode::BadSignature, "registration receipt");
  auto it = pending_selections_.find(receipt.stream_id);
  if (it == pending_selections_.end())
    raise(ErrorCode::ConfigError, "receipt without a pending selection");
  registrations_[receipt.stream_id] = it->second;
  pending_selections_.erase(it);
}

uint32_t SetTopBox::tariff(uint16_t stream_id) const {
  auto it = registrations_.find(stream_id);
  if (it == registrations_.end())
    raise(ErrorCode::ConfigError, "not registered for stream");
  return it->second.tariff;
}

// ---------------------------------------------------------------------------
// entitlements

void SetTopBox::install_entitlement(const cas::EntitlementGrant& grant,
                                    const std::string& provider_name) {
  Bytes issuer_pub = provider_key(provider_name);
  Bytes secret;
  try {
    secret = unbind(grant.encrypted_secret);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DecryptFailure)
      raise(ErrorCode::NotForThisDevice, "entitlement secret");
    throw;
  }
  crypto::SecureBuffer wiped(std::move(secret));
  auto [it, inserted] =
      cas_instances_.try_emplace(grant.cas_id, cas::CasInstance(grant.cas_id));
  it->second.install(tpm_, grant, wiped.span(), issuer_pub, rng_);
}

void SetTopBox::store_permit(const cas::OnlinePermit& permit,
                             const std::string& provider_name) {
  if (!permit.verify(provider_key(provider_name)) ||
      permit.identity_label != aik_label_)
    raise(ErrorCode::BadSignature, "online permit");
  permits_[{provider_name, permit.stream_id}] = permit;
}

cas::CasInstance& SetTopBox::cas_instance(const std::string& cas_id) {
  auto it = cas_instances_.find(cas_id);
  if (it == cas_instances_.end())
    raise(ErrorCode::NoEntitlement, "no such access-control instance");
  return it->second;
}

// ---------------------------------------------------------------------------
// playback

WatchResult SetTopBox::watch(
    const std::vector<scramble::TransportPacket>& packets,
    const std::string& cas_id, ChargingMode mode) {
  require_enrolled();
  WatchResult result;
  auto cas_it = cas_instances_.find(cas_id);
  if (cas_it == cas_instances_.end()) {
    result.status = ErrorCode::NoEntitlement;
    return result;
  }

  uint32_t current_period = 0;
  bool have_cw = false;
  scramble::ControlWord cw;

  for (const auto& pkt : packets) {
    if (!have_cw || pkt.period_index != current_period) {
      current_period = pkt.period_index;

      uint32_t price = registrations_.contains(pkt.stream_id)
                           ? registrations_[pkt.stream_id].tariff
                           : 0;
      if (mode == ChargingMode::Prepaid && deposit_ < price) {
        result.status = ErrorCode::DepositExhausted;
        return result;
      }

      std::optional<cas::OnlinePermit> permit;
      Bytes provider_pub;
      auto permit_it = permits_.find({cas_id, pkt.stream_id});
      if (permit_it != permits_.end()) permit = permit_it->second;
      try {
        provider_pub = provider_key(cas_id);
      } catch (const Error&) {
        // No trust anchor for this instance; permit checks will fail closed.
      }

      try {
        cw = cas_it->second.request_cw(tpm_, pkt.stream_id, current_period,
                                       clock_, aik_label_, permit,
                                       provider_pub);
      } catch (const Error& e) {
        result.status = e.code();
        return result;
      }
      have_cw = true;

      if (mode == ChargingMode::Prepaid) {
        deposit_ -= price;
      } else {
        PendingRecord rec;
        rec.record_nonce = rng_.block32();
        rec.stream_id = pkt.stream_id;
        rec.period_index = current_period;
        rec.units = price;
        metered_units_ += price;
        pending_records_.push_back(rec);
      }
      ++result.periods_played;
    }

    scramble::TransportPacket clear = scramble::descramble(cw, pkt);
    append(result.output, ByteSpan(clear.payload.data(), clear.payload.size()));
    ++result.packets_played;
  }
  return result;
}

Bytes SetTopBox::watermark(ByteSpan descrambled, uint16_t stream_id) const {
  require_enrolled();
  Bytes material = to_bytes(aik_label_);
  append_u16(material, stream_id);
  crypto::Digest tag = crypto::hash(material);

  Bytes out(descrambled.begin(), descrambled.end());
  for (size_t base = 0; base + scramble::kPayloadSize <= out.size();
       base += scramble::kPayloadSize) {
    std::memcpy(out.data() + base + kTagOffset, tag.bytes.data(), kTagLen);
  }
  return out;
}

// ---------------------------------------------------------------------------
// deposit

uint64_t SetTopBox::apply_top_up(ByteSpan voucher_ct) {
  Bytes plain;
  try {
    plain = unbind(voucher_ct);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DecryptFailure)
      raise(ErrorCode::NotForThisDevice, "voucher addressed elsewhere");
    throw;
  }
  providers::DepositVoucher v =
      providers::DepositVoucher::from_wire(wire::decode(plain));
  if (!v.verify(roots_.charging_sign_pub))
    raise(ErrorCode::BadChargingSignature);
  if (v.beneficiary != aik_label_)
    raise(ErrorCode::NotForThisDevice, "voucher names another identity");
  if (!tpm_.consume_nonce(ByteSpan(v.nonce.data(), v.nonce.size())))
    raise(ErrorCode::ReplayDetected, "voucher nonce already consumed");
  deposit_ += v.amount;
  return deposit_;
}

// ---------------------------------------------------------------------------
// consumption

const PendingRecord& SetTopBox::next_unstamped() const {
  if (pending_records_.empty())
    raise(ErrorCode::Unknown, "no pending records");
  return pending_records_.front();
}

void SetTopBox::finalize_record(const providers::TimestampToken& token) {
  const PendingRecord& pending = next_unstamped();
  if (!token.verify(roots_.time_sign_pub) ||
      token.subject_digest != record_core_digest(pending, aik_label_))
    raise(ErrorCode::BadTimestamp, "token does not bind the record");

  ConsumptionRecord rec;
  rec.record_nonce = pending.record_nonce;
  rec.identity_label = aik_label_;
  rec.stream_id = pending.stream_id;
  rec.period_index = pending.period_index;
  rec.units = pending.units;
  rec.token = token;
  rec.aik_signature =
      tpm_.aik_sign(aik_label_, wire::signing_input(rec.to_wire()));

  Bytes ct = crypto::encrypt_to(roots_.charging_enc_pub,
                                wire::encode(rec.to_wire()), rng_);
  crypto::Digest d = crypto::hash(ct);
  stored_records_.push_back({std::move(ct), d, false});
  pending_records_.pop_front();
}

std::vector<Bytes> SetTopBox::collect_records() {
  std::vector<Bytes> out;
  for (auto& rec : stored_records_) {
    out.push_back(rec.ciphertext);
    rec.transferred = true;
  }
  return out;
}

std::vector<Bytes> SetTopBox::answer_pull(const wire::WireMessage& pull_request) {
  MsgReader r(pull_request, MsgType::PullRequest, 2);
  if (!crypto::verify(roots_.charging_sign_pub,
                      wire::signing_input(pull_request), r.field(1)))
    raise(ErrorCode::BadPullRequestSignature);
  return collect_records();
}

void SetTopBox::mark_acked(const std::vector<crypto::Digest>& ct_digests) {
  for (const auto& d : ct_digests) {
    std::erase_if(stored_records_,
                  [&d](const StoredRecord& r) { return r.ct_digest == d; });
  }
}

// ---------------------------------------------------------------------------
// firmware update

providers::DeviceDescription SetTopBox::make_update_request(
    const std::string& hw_revision) {
  require_enrolled();
  providers::DeviceDescription d;
  d.model = tpm_.platform_credential().model;
  d.hw_revision = hw_revision;
  d.fw_version = firmware_version_;
  d.nonce = rng_.block32();
  d.aik_signature =
      tpm_.aik_sign(aik_label_, wire::signing_input(d.to_wire()));
  pending_update_nonce_ = d.nonce;
  return d;
}

void SetTopBox::apply_update(ByteSpan package_ct) {
  Bytes plain;
  try {
    plain = unbind(package_ct);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DecryptFailure)
      raise(ErrorCode::NotForThisDevice, "update addressed elsewhere");
    throw;
  }
  providers::UpdatePackage pkg =
      providers::UpdatePackage::from_wire(wire::decode(plain));
  if (!pkg.verify(roots_.update_sign_pub)) raise(ErrorCode::BadUpdateSignature);
  if (!pending_update_nonce_ || pkg.device_nonce != *pending_update_nonce_)
    raise(ErrorCode::NonceMismatch, "package answers no open request");
  pending_update_nonce_.reset();

  bool replaced = false;
  for (auto& img : images_) {
    if (img.name == kFirmwareComponent) {
      img.image = pkg.firmware;
      replaced = true;
    }
  }
  if (!replaced)
    raise(ErrorCode::NoFirmwareForModel, "device has no updatable component");

  firmware_version_ = pkg.version;
  tpm_.power_cycle();
  boot_log_ = boot::boot(tpm_, images_);
}

}  // namespace trustbox::stb
