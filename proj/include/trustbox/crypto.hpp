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

#ifndef TRUSTBOX_CRYPTO_HPP
#define TRUSTBOX_CRYPTO_HPP

#include <array>
#include <compare>
#include <cstdint>

#include "trustbox/bytes.hpp"
#include "trustbox/rng.hpp"

namespace trustbox::crypto {

// Fixed 32-byte hash output. One size everywhere: register values, content
// digests and nonce identifiers all share it.
struct Digest {
  std::array<uint8_t, 32> bytes{};

  auto operator<=>(const Digest&) const = default;
  ByteSpan span() const { return ByteSpan(bytes.data(), bytes.size()); }
  Bytes to_vec() const { return Bytes(bytes.begin(), bytes.end()); }

  static Digest from(ByteSpan b);  // requires b.size() == 32
};

Digest hash(ByteSpan data);
Digest hash2(ByteSpan a, ByteSpan b);

enum class KeyUsage : uint8_t { Sign = 0, Decrypt = 1 };

// Asymmetric keypair with a hard usage split: a Sign key never decrypts and
// a Decrypt key never signs. The default scheme is a modern one (Ed25519 for
// signing, X25519 envelopes for decryption); the legacy "rsa-1024" name
// survives only as a compatibility label on credentials.
class KeyPair {
 public:
  KeyPair() = default;

  static KeyPair generate(KeyUsage usage, DetRng& rng);
  static KeyPair from_seed(KeyUsage usage, ByteSpan seed32);

  KeyUsage usage() const { return usage_; }
  const Bytes& public_bytes() const { return public_; }

  // Raw private seed, for state snapshots only. Must never be placed in a
  // wire message; the transcript scan tests enforce that.
  const std::array<uint8_t, 32>& secret_seed() const { return seed_; }

  bool valid() const { return !public_.empty(); }

 private:
  KeyUsage usage_ = KeyUsage::Sign;
  std::array<uint8_t, 32> seed_{};
  Bytes public_;
};

inline constexpr std::string_view kSignatureScheme = "ed25519";
inline constexpr std::string_view kCompatSchemeLabel = "rsa-1024";

// Detached signature over `data`. Throws UsageViolation for a Decrypt key.
Bytes sign(const KeyPair& key, ByteSpan data);

// Deterministic, side effect free. False on any mismatch, including
// malformed keys or signatures.
bool verify(ByteSpan public_key, ByteSpan data, ByteSpan signature);

// Public-key envelope: ephemeral key agreement plus an authenticated stream
// cipher. Any single-byte tamper of the ciphertext fails decryption.
// Ciphertext layout: ephemeral public key (32) | tag (16) | body.
Bytes encrypt_to(ByteSpan public_key, ByteSpan plaintext, DetRng& rng);

// Throws DecryptFailure on wrong key or tampered ciphertext, UsageViolation
// for a Sign key.
Bytes decrypt(const KeyPair& key, ByteSpan ciphertext);

// Byte buffer wiped on destruction; holds unsealed secrets for the duration
// of one playback request.
class SecureBuffer {
 public:
  SecureBuffer() = default;
  explicit SecureBuffer(Bytes b) : data_(std::move(b)) {}
  SecureBuffer(SecureBuffer&&) = default;
  SecureBuffer& operator=(SecureBuffer&&) = default;
  SecureBuffer(const SecureBuffer&) = delete;
  SecureBuffer& operator=(const SecureBuffer&) = delete;
  ~SecureBuffer();

  ByteSpan span() const { return data_; }
  bool empty() const { return data_.empty(); }

 private:
  Bytes data_;
};

}  // namespace trustbox::crypto

#endif  // TRUSTBOX_CRYPTO_HPP
