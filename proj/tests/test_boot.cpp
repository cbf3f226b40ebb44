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

#include <cstdio>
#include <fstream>

#include "trustbox/boot.hpp"
#include "trustbox/errors.hpp"

using namespace trustbox;
using namespace trustbox::boot;
using namespace trustbox::tpm;

namespace {

struct Fixture {
  DetRng rng{200};
  Manufacturer mf = Manufacturer::create("acme", rng);
  TpmState t = mf.make_tpm("stb-1", rng);
  Bytes auth = Bytes(20, 0x11);
  std::vector<BootImage> images = {
      {0, "bios", to_bytes("bios-image-v1")},
      {1, "loader", to_bytes("loader-image-v1")},
      {2, "kernel", to_bytes("kernel-image-v1")},
  };

  Quote quoted(const BootLog&, ByteSpan nonce) {
    if (!t.owned()) {
      t.take_ownership(auth);
      t.make_identity(auth, "id", rng);
      Bytes inner = wire::MsgWriter(wire::MsgType::Raw)
                        .add_str("id")
                        .add_str("cred")
                        .encoded();
      t.activate_identity("id", crypto::encrypt_to(
                                     t.ek_credential().ek_decrypt_pub, inner,
                                     rng));
    }
    return t.quote("id", {0, 1, 2}, nonce);
  }
};

}  // namespace

TEST_CASE("boot measures every image in order") {
  Fixture f;
  BootLog log = boot::boot(f.t, f.images);
  CHECK(log.events.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(log.events[i].digest == crypto::hash(f.images[i].image));
    CHECK(f.t.pcr_value(f.images[i].pcr_index) != crypto::Digest{});
  }
}

TEST_CASE("identical image lists produce identical register banks") {
  Fixture f;
  boot::boot(f.t, f.images);
  TpmState other = f.mf.make_tpm("stb-1", f.rng);
  boot::boot(other, f.images);
  for (size_t i = 0; i < kNumPcrs; ++i)
    CHECK(f.t.pcr_value(i) == other.pcr_value(i));
}

TEST_CASE("swapping two images changes the affected register") {
  Fixture f;
  auto images = f.images;
  images.push_back({2, "module", to_bytes("module-image-v1")});
  boot::boot(f.t, images);

  TpmState other = f.mf.make_tpm("stb-1", f.rng);
  std::swap(images[2], images[3]);  // both extend register 2
  boot::boot(other, images);
  CHECK(f.t.pcr_value(2) != other.pcr_value(2));
}

TEST_CASE("log replay reproduces live register values exactly") {
  Fixture f;
  BootLog log = boot::boot(f.t, f.images);
  auto bank = log.replay();
  for (size_t i = 0; i < kNumPcrs; ++i) CHECK(bank[i] == f.t.pcr_value(i));
}

TEST_CASE("verification accepts a pristine boot against its reference") {
  Fixture f;
  BootLog log = boot::boot(f.t, f.images);
  ReferenceTable ref;
  ref.add_from_pcrs("good-v1", {0, 1, 2}, log.replay());
  Bytes nonce = f.rng.bytes(32);
  Quote q = f.quoted(log, nonce);

  Verdict v = verify_log(log, ref, q, nonce);
  CHECK(v.trusted);

  SUBCASE("stale nonce is rejected") {
    Bytes other_nonce = f.rng.bytes(32);
    Verdict stale = verify_log(log, ref, q, other_nonce);
    CHECK_FALSE(stale.trusted);
    CHECK(stale.reason == VerdictReason::NonceMismatch);
  }

  SUBCASE("configuration absent from the reference table") {
    ReferenceTable empty;
    Verdict unknown = verify_log(log, empty, q, nonce);
    CHECK_FALSE(unknown.trusted);
    CHECK(unknown.reason == VerdictReason::UnknownConfiguration);
  }

  SUBCASE("exhaustive single-event tamper is always caught") {
    for (size_t e = 0; e < log.events.size(); ++e) {
      for (size_t b = 0; b < log.events[e].component_image.size(); ++b) {
        BootLog tampered = log;
        tampered.events[e].component_image[b] ^= 0x01;
        Verdict v2 = verify_log(tampered, ref, q, nonce);
        CHECK_FALSE(v2.trusted);
        CHECK(v2.reason == VerdictReason::LogMismatch);
      }
      // Forged digest with a matching re-hash diverges from the quote.
      BootLog forged = log;
      forged.events[e].component_image.push_back(0x00);
      forged.events[e].digest =
          crypto::hash(forged.events[e].component_image);
      Verdict v3 = verify_log(forged, ref, q, nonce);
      CHECK_FALSE(v3.trusted);
      CHECK(v3.reason == VerdictReason::LogMismatch);
    }
  }

  SUBCASE("random single-bit image tampers are always caught") {
    DetRng tamper_rng(201);
    for (int i = 0; i < 1000; ++i) {
      BootLog tampered = log;
      auto& img =
          tampered.events[tamper_rng.below(tampered.events.size())]
              .component_image;
      img[tamper_rng.below(img.size())] ^= uint8_t(1 << tamper_rng.below(8));
      CHECK_FALSE(verify_log(tampered, ref, q, nonce).trusted);
    }
  }
}

TEST_CASE("boot log wire round trip") {
  Fixture f;
  BootLog log = boot::boot(f.t, f.images);
  BootLog decoded = BootLog::from_wire(wire::decode(wire::encode(log.to_wire())));
  CHECK(decoded == log);
}

TEST_CASE("reference table text format round trips") {
  Fixture f;
  BootLog log = boot::boot(f.t, f.images);
  ReferenceTable ref;
  ref.add_from_pcrs("good-v1", {0, 1, 2}, log.replay());

  std::string text = ref.save();
  ReferenceTable parsed = ReferenceTable::parse(text);
  Quote q = f.quoted(log, Bytes(32, 0x01));
  CHECK(parsed.matches(q.selection, q.pcr_values));

  CHECK_THROWS_AS(ReferenceTable::parse("bogus line\n"), Error);
  CHECK_THROWS_AS(ReferenceTable::parse("config a\npcr 99 00\n"), Error);
}

TEST_CASE("reference table file loading reports missing fixtures") {
  std::string path = "/tmp/trustbox_ref_table_test.txt";
  Fixture f;
  BootLog log = boot::boot(f.t, f.images);
  ReferenceTable ref;
  ref.add_from_pcrs("good-v1", {0, 1, 2}, log.replay());
  {
    std::ofstream out(path);
    out << ref.save();
  }
  ReferenceTable loaded = ReferenceTable::load_file(path);
  CHECK(loaded.matches({0}, {log.replay()[0]}));
  std::remove(path.c_str());

  try {
    ReferenceTable::load_file("/tmp/definitely-missing-fixture.txt");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FixtureMissing);
  }
}
