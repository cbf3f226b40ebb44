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

#include <doctest.h>

#include <functional>

#include "fixtures.hpp"
#include "trustbox/errors.hpp"

using namespace trustbox;
using trustbox::testing::error_of;
using trustbox::testing::TestWorld;

namespace {

// Genuine enrollment driven at the TPM level, without a SetTopBox.
struct Enrollee {
  DetRng rng;
  tpm::TpmState t;
  Bytes auth = Bytes(20, 0x42);
  std::string label;

  Enrollee(const tpm::Manufacturer& mf, std::string lbl, uint64_t seed)
      : rng(seed), t(mf.make_tpm("stb-1", rng)), label(std::move(lbl)) {
    t.take_ownership(auth);
  }

  pca::EnrollRequest request(const pca::PcaService& svc,
                             const std::string& customer) {
    auto id = t.make_identity(auth, label, rng);
    pca::EnrollRequest req;
    req.label = label;
    req.aik_pub = id.aik_pub;
    req.identity_binding = id.identity_binding;
    req.sealed_credentials = crypto::encrypt_to(
        svc.enc_public(),
        pca::pack_enrollment_credentials(t.ek_credential(),
                                         t.platform_credential(), customer),
        rng);
    return req;
  }

  Bytes answer(ByteSpan challenge_ct) {
    Bytes plain = t.endorsement_decrypt(challenge_ct);
    wire::WireMessage msg = wire::decode(plain);
    wire::MsgReader r(msg, wire::MsgType::Raw, 2);
    return t.aik_sign(label,
                      pca::enrollment_response_payload(label, r.field(1)));
  }
};

}  // namespace

TEST_CASE("genuine two-round enrollment issues an activatable credential") {
  TestWorld w;
  Enrollee e(w.mf, "aik:alpha", 9001);
  pca::EnrollRequest req = e.request(w.authority, "customer-007");

  Bytes challenge = w.authority.begin_enrollment(req);
  CHECK(w.authority.has_pending("aik:alpha"));
  Bytes response = e.answer(challenge);
  Bytes blob = w.authority.complete_enrollment("aik:alpha", response, 1234);

  Bytes cred_bytes = e.t.activate_identity("aik:alpha", blob);
  auto cred = pca::AikCredential::from_wire(wire::decode(cred_bytes));
  CHECK(cred.verify(w.authority.sign_public()));
  CHECK(cred.identity_label == "aik:alpha");
  CHECK(cred.aik_pub == e.t.aik_public("aik:alpha"));
  CHECK(cred.scheme_label == crypto::kCompatSchemeLabel);
  CHECK(w.authority.issued_count() == 1);

  // Pseudonymity: the credential carries neither endorsement key nor
  // customer name.
  Bytes enc = wire::encode(cred.to_wire());
  CHECK_FALSE(contains(enc, w.mf.root_public()));
  CHECK_FALSE(contains(enc, e.t.ek_credential().ek_sign_pub));
  CHECK_FALSE(contains(enc, e.t.ek_credential().ek_decrypt_pub));
  CHECK_FALSE(contains(enc, to_bytes("customer-007")));
}

TEST_CASE("self-issued endorsement credentials are rejected") {
  TestWorld w;
  DetRng attacker_rng(666);
  // The attacker manufactures its own module under an unknown root.
  tpm::Manufacturer rogue = tpm::Manufacturer::create("rogue", attacker_rng);
  Enrollee fake(rogue, "aik:fake", 9002);
  pca::EnrollRequest req = fake.request(w.authority, "nobody");

  CHECK(error_of([&] { w.authority.begin_enrollment(req); }) ==
        ErrorCode::BadEkCredential);
  CHECK(w.authority.issued_count() == 0);
}

TEST_CASE("a grafted identity key fails the binding check") {
  TestWorld w;
  Enrollee genuine(w.mf, "aik:genuine", 9003);
  pca::EnrollRequest honest = genuine.request(w.authority, "alice");

  // Attacker replays the genuine platform credentials but offers an
  // identity key of its own, with a binding signed by that other key.
  DetRng attacker_rng(667);
  crypto::KeyPair attacker_key =
      crypto::KeyPair::generate(crypto::KeyUsage::Sign, attacker_rng);
  pca::EnrollRequest forged = honest;
  wire::MsgWriter binding(wire::MsgType::IdentityBinding);
  binding.add_str(forged.label).add(honest.aik_pub);
  wire::WireMessage bmsg = binding.take();
  bmsg.fields.push_back(crypto::sign(attacker_key, wire::encode(bmsg)));
  forged.identity_binding = wire::encode(bmsg);

  CHECK(error_of([&] { w.authority.begin_enrollment(forged); }) ==
        ErrorCode::BadAikBinding);
  CHECK(w.authority.issued_count() == 0);
}

TEST_CASE("stolen platform credentials die at the challenge round") {
  TestWorld w;
  Enrollee victim(w.mf, "aik:victim", 9004);
  pca::EnrollRequest honest = victim.request(w.authority, "alice");

  // Attacker grafts its own identity key onto the victim's (replayed)
  // encrypted credentials. The binding is self-consistent, so the request
  // passes phase one, but the challenge is addressed to the victim's
  // endorsement key.
  DetRng attacker_rng(668);
  tpm::Manufacturer rogue = tpm::Manufacturer::create("rogue", attacker_rng);
  Enrollee attacker(rogue, "aik:victim", 9005);
  auto id = attacker.t.make_identity(attacker.auth, "aik:victim",
                                     attacker.rng);
  pca::EnrollRequest grafted = honest;
  grafted.aik_pub = id.aik_pub;
  grafted.identity_binding = id.identity_binding;

  Bytes challenge = w.authority.begin_enrollment(grafted);
  // The attacker cannot read the challenge; any response it fabricates
  // fails verification.
  CHECK(error_of([&] {
          attacker.t.endorsement_decrypt(challenge);
        }) == ErrorCode::DecryptFailure);
  Bytes bogus(64, 0xAB);
  CHECK(error_of([&] {
          w.authority.complete_enrollment("aik:victim", bogus, 0);
        }) == ErrorCode::ChallengeFailed);
  CHECK(w.authority.issued_count() == 0);
}

TEST_CASE("duplicate enrollment labels are refused") {
  TestWorld w;
  Enrollee a(w.mf, "aik:dup", 9006);
  Bytes challenge = w.authority.begin_enrollment(a.request(w.authority, "a"));
  Bytes blob = w.authority.complete_enrollment("aik:dup", a.answer(challenge),
                                               0);
  a.t.activate_identity("aik:dup", blob);

  Enrollee b(w.mf, "aik:dup", 9007);
  CHECK(error_of([&] {
          w.authority.begin_enrollment(b.request(w.authority, "b"));
        }) == ErrorCode::DuplicateLabel);
}

TEST_CASE("validity answers are signed and temporally consistent") {
  TestWorld w;
  Enrollee e(w.mf, "aik:val", 9008);
  Bytes challenge = w.authority.begin_enrollment(e.request(w.authority, "c"));
  w.authority.complete_enrollment("aik:val", e.answer(challenge), 0);

  Bytes qn = e.rng.bytes(32);
  auto good = w.authority.check_validity("aik:val", qn);
  CHECK(good.status == pca::ValidityStatus::Good);
  CHECK(good.verify(w.authority.sign_public()));
  CHECK(Bytes(good.query_nonce.begin(), good.query_nonce.end()) == qn);

  auto unknown = w.authority.check_validity("aik:never", qn);
  CHECK(unknown.status == pca::ValidityStatus::Unknown);

  w.authority.revoke("aik:val");
  for (int i = 0; i < 3; ++i) {
    CHECK(w.authority.check_validity("aik:val", qn).status ==
          pca::ValidityStatus::Revoked);
  }
  CHECK(error_of([&] { w.authority.revoke("aik:never"); }) ==
        ErrorCode::Unknown);
}

TEST_CASE("identity escrow opens only for the auditor") {
  TestWorld w;
  Enrollee e(w.mf, "aik:esc", 9009);
  Bytes challenge =
      w.authority.begin_enrollment(e.request(w.authority, "customer-42"));
  w.authority.complete_enrollment("aik:esc", e.answer(challenge), 0);

  // Auditor-signed token reveals the escrowed customer.
  auto token = w.audit_token("aik:esc");
  Bytes ct = w.authority.reveal_identity("aik:esc", token);
  CHECK(crypto::decrypt(w.auditor_enc, ct) == to_bytes("customer-42"));
  CHECK(w.authority.audit_log().size() == 1);

  // A provider without the auditor key gets nothing.
  DetRng v_rng(700);
  crypto::KeyPair vendor_key =
      crypto::KeyPair::generate(crypto::KeyUsage::Sign, v_rng);
  wire::MsgWriter forged(wire::MsgType::AuditToken);
  forged.add_str("aik:esc").add(v_rng.bytes(32));
  wire::WireMessage tok = forged.take();
  tok.fields.push_back(crypto::sign(vendor_key, wire::encode(tok)));
  CHECK(error_of([&] { w.authority.reveal_identity("aik:esc", tok); }) ==
        ErrorCode::Unauthorized);

  CHECK(error_of([&] {
          w.authority.reveal_identity("aik:none", w.audit_token("aik:none"));
        }) == ErrorCode::Unknown);
}

TEST_CASE("operator vouches for registered provider keys") {
  TestWorld w;
  w.authority.register_provider("vendorV", w.vendor.public_key());
  auto voucher = w.authority.vouch_provider("vendorV");
  wire::MsgReader r(voucher, wire::MsgType::ProviderVoucher, 3);
  CHECK(crypto::verify(w.authority.sign_public(),
                       wire::signing_input(voucher), r.field(2)));
  CHECK(r.field_vec(1) == w.vendor.public_key());
  CHECK(error_of([&] { w.authority.vouch_provider("ghost"); }) ==
        ErrorCode::Unknown);
}
