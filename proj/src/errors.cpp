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

#include "trustbox/errors.hpp"

#include <utility>

namespace trustbox {

namespace {

struct NameEntry {
  ErrorCode code;
  std::string_view name;
};

constexpr NameEntry kNames[] = {
    {ErrorCode::None, "None"},
    {ErrorCode::UsageViolation, "UsageViolation"},
    {ErrorCode::DecryptFailure, "DecryptFailure"},
    {ErrorCode::MalformedMessage, "MalformedMessage"},
    {ErrorCode::AlreadyOwned, "AlreadyOwned"},
    {ErrorCode::AuthLengthInvalid, "AuthLengthInvalid"},
    {ErrorCode::AuthMismatch, "AuthMismatch"},
    {ErrorCode::DuplicateLabel, "DuplicateLabel"},
    {ErrorCode::UnknownLabel, "UnknownLabel"},
    {ErrorCode::IndexOutOfRange, "IndexOutOfRange"},
    {ErrorCode::InactiveAik, "InactiveAik"},
    {ErrorCode::StateMismatch, "StateMismatch"},
    {ErrorCode::ForeignBlob, "ForeignBlob"},
    {ErrorCode::FlagStateError, "FlagStateError"},
    {ErrorCode::BadIssuerSignature, "BadIssuerSignature"},
    {ErrorCode::SealFailure, "SealFailure"},
    {ErrorCode::NoEntitlement, "NoEntitlement"},
    {ErrorCode::Expired, "Expired"},
    {ErrorCode::DailyCapExceeded, "DailyCapExceeded"},
    {ErrorCode::OutsideAllowedHours, "OutsideAllowedHours"},
    {ErrorCode::PermitRequired, "PermitRequired"},
    {ErrorCode::NotOnAcl, "NotOnAcl"},
    {ErrorCode::BadEkCredential, "BadEkCredential"},
    {ErrorCode::BadAikBinding, "BadAikBinding"},
    {ErrorCode::ChallengeFailed, "ChallengeFailed"},
    {ErrorCode::RevokedCredential, "RevokedCredential"},
    {ErrorCode::Unauthorized, "Unauthorized"},
    {ErrorCode::Unknown, "Unknown"},
    {ErrorCode::Untrusted, "Untrusted"},
    {ErrorCode::BadSelectionSignature, "BadSelectionSignature"},
    {ErrorCode::NoContract, "NoContract"},
    {ErrorCode::BadSignature, "BadSignature"},
    {ErrorCode::BadTimestamp, "BadTimestamp"},
    {ErrorCode::DuplicateRecord, "DuplicateRecord"},
    {ErrorCode::UnknownSubscriber, "UnknownSubscriber"},
    {ErrorCode::BadDddbSignature, "BadDddbSignature"},
    {ErrorCode::NoFirmwareForModel, "NoFirmwareForModel"},
    {ErrorCode::EnrollmentFailed, "EnrollmentFailed"},
    {ErrorCode::DepositExhausted, "DepositExhausted"},
    {ErrorCode::NotForThisDevice, "NotForThisDevice"},
    {ErrorCode::BadChargingSignature, "BadChargingSignature"},
    {ErrorCode::ReplayDetected, "ReplayDetected"},
    {ErrorCode::BadPullRequestSignature, "BadPullRequestSignature"},
    {ErrorCode::BadUpdateSignature, "BadUpdateSignature"},
    {ErrorCode::NonceMismatch, "NonceMismatch"},
    {ErrorCode::LogMismatch, "LogMismatch"},
    {ErrorCode::UnknownConfiguration, "UnknownConfiguration"},
    {ErrorCode::ConfigError, "ConfigError"},
    {ErrorCode::FixtureMissing, "FixtureMissing"},
};

}  // namespace

std::string_view error_name(ErrorCode code) {
  for (const auto& e : kNames) {
    if (e.code == code) return e.name;
  }
  return "UnnamedError";
}

ErrorCode error_code_from_name(std::string_view name) {
  for (const auto& e : kNames) {
    if (e.name == name) return e.code;
  }
  return ErrorCode::None;
}

}  // namespace trustbox
