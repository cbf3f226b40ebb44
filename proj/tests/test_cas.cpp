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

#include "trustbox/cas.hpp"
#include "trustbox/errors.hpp"

using namespace trustbox;
using namespace trustbox::cas;

namespace {

ErrorCode error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::None;
}

struct Fixture {
  DetRng rng{300};
  tpm::Manufacturer mf = tpm::Manufacturer::create("acme", rng);
  tpm::TpmState t = mf.make_tpm("stb-1", rng);
  crypto::KeyPair issuer =
      crypto::KeyPair::generate(crypto::KeyUsage::Sign, rng);
  crypto::KeyPair provider =
      crypto::KeyPair::generate(crypto::KeyUsage::Sign, rng);
  Bytes secret = rng.bytes(kSecretLen);
  CasInstance instance{"cas-a"};

  Fixture() {
    // A booted state to seal against.
    t.pcr_extend(0, crypto::hash(to_bytes("bios")));
    t.pcr_extend(3, crypto::hash(to_bytes("module")));
  }

  EntitlementGrant make_grant(uint16_t stream, UsageConstraints c,
                              bool online = false,
                              const std::string& cas_id = "cas-a") {
    EntitlementGrant g;
    g.cas_id = cas_id;
    g.stream_id = stream;
    g.constraints = c;
    g.online_gated = online;
    g.encrypted_secret = to_bytes("opaque");  // bind wrapping happens upstream
    g.issuer_signature =
        crypto::sign(issuer, wire::signing_input(g.to_wire()));
    return g;
  }

  void install(const EntitlementGrant& g) {
    instance.install(t, g, secret, issuer.public_bytes(), rng);
  }

  scramble::ControlWord request(uint16_t stream, uint32_t period, int64_t now,
                                std::optional<OnlinePermit> permit = {}) {
    return instance.request_cw(t, stream, period, now, "aik:me", permit,
                               provider.public_bytes());
  }

  OnlinePermit permit_for(uint16_t stream, uint32_t from, uint32_t to,
                          const std::string& label = "aik:me") {
    OnlinePermit p;
    p.identity_label = label;
    p.stream_id = stream;
    p.period_from = from;
    p.period_to = to;
    p.nonce = rng.block32();
    p.provider_signature =
        crypto::sign(provider, wire::signing_input(p.to_wire()));
    return p;
  }
};

const UsageConstraints kWideOpen{0, 10'000'000, 0, 0};

}  // namespace

TEST_CASE("constraint windows must be non-empty") {
  UsageConstraints bad{100, 100, 0, 0};
  CHECK(error_of([&] { bad.validate(); }) == ErrorCode::MalformedMessage);
  UsageConstraints inverted{200, 100, 0, 0};
  CHECK(error_of([&] { inverted.validate(); }) == ErrorCode::MalformedMessage);
  kWideOpen.validate();
}

TEST_CASE("install verifies the issuer and seals to the current state") {
  Fixture f;
  auto grant = f.make_grant(7, kWideOpen);
  f.install(grant);
  CHECK(f.instance.has_entitlement(7));

  // The released word matches the head end's independent derivation.
  auto cw = f.request(7, 0, 50);
  CHECK(cw == scramble::derive_cw(f.secret, 7, 0));
}

TEST_CASE("forged issuer signatures are rejected") {
  Fixture f;
  auto grant = f.make_grant(7, kWideOpen);
  grant.issuer_signature[5] ^= 1;
  CHECK(error_of([&] { f.install(grant); }) == ErrorCode::BadIssuerSignature);
  CHECK_FALSE(f.instance.has_entitlement(7));
}

TEST_CASE("grant round trips the wire") {
  Fixture f;
  auto grant = f.make_grant(9, UsageConstraints{10, 20, 3, 0x0F}, true);
  auto decoded =
      EntitlementGrant::from_wire(wire::decode(wire::encode(grant.to_wire())));
  CHECK(decoded.verify(f.issuer.public_bytes()));
  CHECK(decoded.cas_id == "cas-a");
  CHECK(decoded.constraints.daily_max == 3);
  CHECK(decoded.online_gated);
}

TEST_CASE("a disturbed platform state blocks every word release") {
  Fixture f;
  f.install(f.make_grant(7, kWideOpen));
  CHECK(f.request(7, 0, 50) == scramble::derive_cw(f.secret, 7, 0));

  // Tampered module measurement lands in a sealed register.
  f.t.pcr_extend(3, crypto::hash(to_bytes("evil-module")));
  CHECK(error_of([&] { f.request(7, 1, 60); }) == ErrorCode::StateMismatch);
  CHECK(f.instance.successful_requests() == 1);
}

TEST_CASE("requests need an entitlement in this very instance") {
  Fixture f;
  f.install(f.make_grant(7, kWideOpen));
  CHECK(error_of([&] { f.request(8, 0, 50); }) == ErrorCode::NoEntitlement);

  CasInstance other("cas-b");
  CHECK(error_of([&] {
          other.request_cw(f.t, 7, 0, 50, "aik:me", std::nullopt,
                           f.provider.public_bytes());
        }) == ErrorCode::NoEntitlement);
}

TEST_CASE("validity window is half open") {
  Fixture f;
  f.install(f.make_grant(7, UsageConstraints{100, 200, 0, 0}));
  CHECK(error_of([&] { f.request(7, 0, 99); }) == ErrorCode::Expired);
  f.request(7, 0, 100);   // first valid instant
  f.request(7, 1, 199);   // last valid instant
  CHECK(error_of([&] { f.request(7, 2, 200); }) == ErrorCode::Expired);
  CHECK(error_of([&] { f.request(7, 2, 10'000); }) == ErrorCode::Expired);
}

TEST_CASE("daily cap blocks until the next simulated day") {
  Fixture f;
  f.install(f.make_grant(7, UsageConstraints{0, 10 * kSecondsPerDay, 3, 0}));
  int64_t day0 = 1000;
  f.request(7, 0, day0);
  f.request(7, 1, day0 + 10);
  f.request(7, 2, day0 + 20);
  CHECK(f.instance.day_count(7, 0) == 3);

  // Fourth period on the same day fails, and keeps failing monotonically.
  for (uint32_t p = 3; p < 10; ++p) {
    CHECK(error_of([&] { f.request(7, p, day0 + 30 + p); }) ==
          ErrorCode::DailyCapExceeded);
  }
  CHECK(f.instance.day_count(7, 0) == 3);

  // Midnight resets the counter.
  int64_t day1 = kSecondsPerDay + 1;
  f.request(7, 10, day1);
  CHECK(f.instance.day_count(7, 1) == 1);
  CHECK(f.instance.successful_requests() == 4);
}

TEST_CASE("hour-of-day windows are enforced") {
  Fixture f;
  // Allowed only 20:00-22:59.
  uint32_t mask = (1u << 20) | (1u << 21) | (1u << 22);
  f.install(f.make_grant(7, UsageConstraints{0, 10 * kSecondsPerDay, 0, mask}));
  CHECK(error_of([&] { f.request(7, 0, 8 * 3600); }) ==
        ErrorCode::OutsideAllowedHours);
  f.request(7, 0, 20 * 3600);
  f.request(7, 1, 22 * 3600 + 3599);
  CHECK(error_of([&] { f.request(7, 2, 23 * 3600); }) ==
        ErrorCode::OutsideAllowedHours);
}

TEST_CASE("online-gated entitlements demand a live permit") {
  Fixture f;
  f.install(f.make_grant(7, kWideOpen, /*online=*/true));

  CHECK(error_of([&] { f.request(7, 0, 50); }) == ErrorCode::PermitRequired);

  auto permit = f.permit_for(7, 0, 4);
  f.request(7, 0, 50, permit);
  f.request(7, 4, 60, permit);

  // Past the granted period range the permit is dead.
  CHECK(error_of([&] { f.request(7, 5, 70, permit); }) ==
        ErrorCode::PermitRequired);

  // A permit for someone else does not transfer.
  auto foreign = f.permit_for(7, 0, 100, "aik:other");
  CHECK(error_of([&] { f.request(7, 1, 55, foreign); }) ==
        ErrorCode::PermitRequired);

  // Tampered signature fails closed.
  auto tampered = f.permit_for(7, 0, 100);
  tampered.provider_signature[0] ^= 1;
  CHECK(error_of([&] { f.request(7, 1, 55, tampered); }) ==
        ErrorCode::PermitRequired);
}

TEST_CASE("usage counters equal successful requests exactly") {
  Fixture f;
  f.install(f.make_grant(7, UsageConstraints{0, 10 * kSecondsPerDay, 5, 0}));
  uint64_t ok = 0;
  DetRng chaos(301);
  for (int i = 0; i < 40; ++i) {
    uint32_t period = uint32_t(chaos.below(20));
    int64_t now = int64_t(chaos.below(3 * kSecondsPerDay));
    try {
      f.request(7, period, now);
      ++ok;
    } catch (const Error&) {
    }
  }
  CHECK(f.instance.successful_requests() == ok);
  CHECK(ok ==
        f.instance.day_count(7, 0) + f.instance.day_count(7, 1) +
            f.instance.day_count(7, 2));
}

TEST_CASE("reinstall replaces the sealed secret after a state change") {
  Fixture f;
  f.install(f.make_grant(7, kWideOpen));
  f.t.pcr_extend(3, crypto::hash(to_bytes("new-module")));
  CHECK(error_of([&] { f.request(7, 0, 50); }) == ErrorCode::StateMismatch);

  // Provider re-issues for the new state; the instance recovers.
  f.install(f.make_grant(7, kWideOpen));
  CHECK(f.request(7, 0, 50) == scramble::derive_cw(f.secret, 7, 0));
}
