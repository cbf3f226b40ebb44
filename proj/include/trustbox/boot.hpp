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

#ifndef TRUSTBOX_BOOT_HPP
#define TRUSTBOX_BOOT_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trustbox/tpm.hpp"

namespace trustbox::boot {

using crypto::Digest;
using tpm::Quote;
using tpm::TpmState;

struct MeasurementEvent {
  uint8_t pcr_index = 0;
  std::string component_name;
  Bytes component_image;
  Digest digest;  // always hash(component_image)

  bool operator==(const MeasurementEvent&) const = default;

  wire::WireMessage to_wire() const;
  static MeasurementEvent from_wire(const wire::WireMessage& msg);
};

struct BootImage {
  uint8_t pcr_index = 0;
  std::string name;
  Bytes image;
};

// Ordered measurement log; replaying it through the register chain must
// reproduce the reported values bit for bit.
struct BootLog {
  std::vector<MeasurementEvent> events;

  bool operator==(const BootLog&) const = default;

  wire::WireMessage to_wire() const;
  static BootLog from_wire(const wire::WireMessage& msg);

  // Register values implied by the log (untouched registers stay at reset).
  std::array<Digest, tpm::kNumPcrs> replay() const;
};

// Measures and extends each image in order. Registers must be at reset
// values when called.
BootLog boot(TpmState& t, const std::vector<BootImage>& images);

enum class VerdictReason : uint8_t {
  None = 0,
  LogMismatch,
  UnknownConfiguration,
  NonceMismatch,
};

struct Verdict {
  bool trusted = false;
  VerdictReason reason = VerdictReason::None;

  static Verdict ok() { return {true, VerdictReason::None}; }
  static Verdict fail(VerdictReason r) { return {false, r}; }
};

std::string_view verdict_reason_name(VerdictReason r);

// Named register-bank snapshots the verifier accepts.
class ReferenceTable {
 public:
  void add(const std::string& name,
           const std::vector<std::pair<uint8_t, Digest>>& values);
  void add_from_pcrs(const std::string& name, const tpm::PcrSelection& sel,
                     const std::array<Digest, tpm::kNumPcrs>& bank);
  bool empty() const { return configs_.empty(); }

  // True if some accepted configuration matches every quoted register.
  bool matches(const tpm::PcrSelection& selection,
               const std::vector<Digest>& values) const;

  // Structured-text fixture format, one table per file:
  //   config <name>
  //   pcr <index> <64-hex-digest>
  std::string save() const;
  static ReferenceTable parse(const std::string& text);
  static ReferenceTable load_file(const std::string& path);

 private:
  std::map<std::string, std::map<uint8_t, Digest>> configs_;
};

// Core attestation check. The quote signature must already be verified
// against an identity credential; `expected_nonce` is the challenge the
// verifier issued for this exchange.
Verdict verify_log(const BootLog& log, const ReferenceTable& reference,
                   const Quote& quote, ByteSpan expected_nonce);

}  // namespace trustbox::boot

#endif  // TRUSTBOX_BOOT_HPP
