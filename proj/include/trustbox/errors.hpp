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

#ifndef TRUSTBOX_ERRORS_HPP
#define TRUSTBOX_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace trustbox {

enum class ErrorCode : uint16_t {
  None = 0,

  // crypto / wire
  UsageViolation,
  DecryptFailure,
  MalformedMessage,

  // tpm
  AlreadyOwned,
  AuthLengthInvalid,
  AuthMismatch,
  DuplicateLabel,
  UnknownLabel,
  IndexOutOfRange,
  InactiveAik,
  StateMismatch,
  ForeignBlob,

  // scrambler
  FlagStateError,

  // cas
  BadIssuerSignature,
  SealFailure,
  NoEntitlement,
  Expired,
  DailyCapExceeded,
  OutsideAllowedHours,
  PermitRequired,
  NotOnAcl,

  // pca
  BadEkCredential,
  BadAikBinding,
  ChallengeFailed,
  RevokedCredential,
  Unauthorized,
  Unknown,

  // providers
  Untrusted,
  BadSelectionSignature,
  NoContract,
  BadSignature,
  BadTimestamp,
  DuplicateRecord,
  UnknownSubscriber,
  BadDddbSignature,
  NoFirmwareForModel,

  // set-top box
  EnrollmentFailed,
  DepositExhausted,
  NotForThisDevice,
  BadChargingSignature,
  ReplayDetected,
  BadPullRequestSignature,
  BadUpdateSignature,
  NonceMismatch,

  // verdict reasons
  LogMismatch,
  UnknownConfiguration,

  // harness
  ConfigError,
  FixtureMissing,
};

std::string_view error_name(ErrorCode code);

// Reverse lookup used by the scenario grammar; ErrorCode::None if unknown.
ErrorCode error_code_from_name(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_name(code)) +
                           (detail.empty() ? "" : ": " + detail)),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& detail = "") {
  throw Error(code, detail);
}

}  // namespace trustbox

#endif  // TRUSTBOX_ERRORS_HPP
