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

#ifndef TRUSTBOX_TESTS_FIXTURES_HPP
#define TRUSTBOX_TESTS_FIXTURES_HPP

#include "trustbox/box.hpp"
#include "trustbox/pca.hpp"
#include "trustbox/providers.hpp"

namespace trustbox::testing {

// A fully wired four-party world with one box, driven by direct calls.
// The message-level scenarios build the same topology over the simulated
// network; unit tests use this to poke individual operations.
struct TestWorld {
  DetRng rng;
  tpm::Manufacturer mf;
  crypto::KeyPair auditor_sign;
  crypto::KeyPair auditor_enc;
  pca::PcaService authority;
  providers::TimeAuthority ta;
  providers::ServiceProvider vendor;
  providers::ChargingProvider charging;
  providers::UpdateService updates;

  uint16_t stream_id = 0x0101;
  uint32_t period_packets = 5;
  uint32_t tariff = 2;
  uint64_t content_seed = 777;

  std::vector<boot::BootImage> images = {
      {0, "bios", to_bytes("bios-image-v1")},
      {1, "loader", to_bytes("loader-image-v1")},
      {2, "kernel", to_bytes("kernel-image-v1")},
      {3, std::string(stb::kFirmwareComponent), to_bytes("cas-module-v1")},
  };

  explicit TestWorld(uint64_t seed = 1000)
      : rng(seed),
        mf(tpm::Manufacturer::create("acme", rng)),
        auditor_sign(crypto::KeyPair::generate(crypto::KeyUsage::Sign, rng)),
        auditor_enc(crypto::KeyPair::generate(crypto::KeyUsage::Decrypt, rng)),
        authority(pca::PcaService::create(rng, {mf.root_public()},
                                          auditor_sign.public_bytes(),
                                          auditor_enc.public_bytes())),
        ta(providers::TimeAuthority::create(rng)),
        vendor(providers::ServiceProvider::create("vendorV", rng,
                                                  authority.sign_public())),
        charging(providers::ChargingProvider::create(
            "chargingC", rng, authority.sign_public(), ta.public_key())),
        updates(providers::UpdateService::create("updateU", rng,
                                                 authority.sign_public())) {
    vendor.add_stream(stream_id, period_packets, content_seed, rng);
    vendor.set_offer("offer-1",
                     {{stream_id, "sports", 0x07, tariff}});
    updates.add_firmware("stb-1", "fw-2.0", to_bytes("cas-module-v2"));
  }

  stb::TrustRoots roots() const {
    stb::TrustRoots r;
    r.pca_sign_pub = authority.sign_public();
    r.pca_enc_pub = authority.enc_public();
    r.charging_sign_pub = charging.sign_public();
    r.charging_enc_pub = charging.enc_public();
    r.update_sign_pub = updates.public_key();
    r.time_sign_pub = ta.public_key();
    r.provider_roots["vendorV"] = vendor.public_key();
    return r;
  }

  stb::SetTopBox make_box(const std::string& name, uint64_t deposit = 100) {
    return stb::SetTopBox(name, mf.make_tpm("stb-1", rng), images, roots(),
                          deposit, rng.fork());
  }

  // Standard attestation round against a party's reference table.
  struct Attestation {
    tpm::Quote quote;
    boot::BootLog log;
    Bytes nonce;
  };
  Attestation attest(stb::SetTopBox& box) {
    Attestation a;
    a.nonce = rng.bytes(32);
    a.quote = box.make_quote({0, 1, 2, 3}, a.nonce);
    a.log = box.boot_log();
    return a;
  }

  // Records the box's current state as an accepted configuration everywhere.
  void trust_current_state(stb::SetTopBox& box, const std::string& cfg) {
    auto bank = box.boot_log().replay();
    vendor.reference().add_from_pcrs(cfg, {0, 1, 2, 3}, bank);
    charging.reference().add_from_pcrs(cfg, {0, 1, 2, 3}, bank);
  }

  // Whole golden path up to an installed entitlement.
  stb::SetTopBox ready_box(const std::string& name,
                           const std::string& customer,
                           uint64_t deposit = 100,
                           cas::UsageConstraints constraints = {0, 1'000'000'000},
                           bool online_gated = false) {
    stb::SetTopBox box = make_box(name, deposit);
    box.take_ownership_online(authority, customer);
    box.certify_bind_key();
    trust_current_state(box, "good:" + name);

    auto sel = box.make_selection(vendor.offer(), "vendorV", stream_id,
                                  providers::ChargingModel::Prepaid);
    auto att = attest(box);
    Bytes qn = rng.bytes(32);
    auto validity = authority.check_validity(box.identity_label(), qn);
    auto receipt =
        vendor.register_box(box.credential(), box.bind_certificate(), sel,
                            validity, att.quote, att.log, att.nonce);
    box.accept_receipt(receipt, "vendorV");

    auto att2 = attest(box);
    auto grant = vendor.issue_entitlement(box.identity_label(), stream_id,
                                          constraints, online_gated,
                                          att2.quote, att2.log, att2.nonce);
    box.install_entitlement(grant, "vendorV");
    return box;
  }

  wire::WireMessage audit_token(const std::string& label) {
    wire::MsgWriter w(wire::MsgType::AuditToken);
    w.add_str(label).add(rng.bytes(32));
    wire::WireMessage msg = w.take();
    msg.fields.push_back(crypto::sign(auditor_sign, wire::encode(msg)));
    return msg;
  }
};

inline ErrorCode error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::None;
}

}  // namespace trustbox::testing

#endif  // TRUSTBOX_TESTS_FIXTURES_HPP
