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

#include "trustbox/crypto.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/sha.h>

#include <cstring>
#include <memory>
#include <stdexcept>

#include "trustbox/errors.hpp"

namespace trustbox::crypto {

namespace {

struct PkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct CtxDeleter {
  void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};
struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};
struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};

using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

constexpr size_t kPubLen = 32;
constexpr size_t kTagLen = 16;
constexpr size_t kSigLen = 64;

PkeyPtr raw_private(int type, ByteSpan seed) {
  PkeyPtr key(
      EVP_PKEY_new_raw_private_key(type, nullptr, seed.data(), seed.size()));
  if (!key) throw std::runtime_error("raw private key construction failed");
  return key;
}

PkeyPtr raw_public(int type, ByteSpan pub) {
  PkeyPtr key(
      EVP_PKEY_new_raw_public_key(type, nullptr, pub.data(), pub.size()));
  return key;  // may be null; callers treat null as verification failure
}

Bytes public_of(EVP_PKEY* key) {
  size_t len = 0;
  if (EVP_PKEY_get_raw_public_key(key, nullptr, &len) != 1)
    throw std::runtime_error("public key extraction failed");
  Bytes out(len);
  if (EVP_PKEY_get_raw_public_key(key, out.data(), &len) != 1)
    throw std::runtime_error("public key extraction failed");
  out.resize(len);
  return out;
}

// Shared-secret agreement for the envelope construction.
Bytes x25519_shared(const KeyPair& key, ByteSpan peer_pub) {
  auto priv = raw_private(EVP_PKEY_X25519, key.secret_seed());
  auto pub = raw_public(EVP_PKEY_X25519, peer_pub);
  if (!pub) raise(ErrorCode::DecryptFailure, "bad peer key");
  std::unique_ptr<EVP_PKEY_CTX, CtxDeleter> ctx(
      EVP_PKEY_CTX_new(priv.get(), nullptr));
  Bytes shared(32);
  size_t len = shared.size();
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
      EVP_PKEY_derive_set_peer(ctx.get(), pub.get()) != 1 ||
      EVP_PKEY_derive(ctx.get(), shared.data(), &len) != 1) {
    raise(ErrorCode::DecryptFailure, "key agreement failed");
  }
  shared.resize(len);
  return shared;
}

Digest envelope_key(ByteSpan shared, ByteSpan eph_pub, ByteSpan recip_pub) {
  Bytes material;
  material.reserve(shared.size() + eph_pub.size() + recip_pub.size());
  append(material, shared);
  append(material, eph_pub);
  append(material, recip_pub);
  return hash(material);
}

// AES-256-GCM with an all-zero nonce; every envelope uses a fresh key so
// nonce reuse cannot occur.
Bytes gcm_seal(const Digest& key, ByteSpan plain, uint8_t* tag_out) {
  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  static const uint8_t iv[12] = {};
  Bytes out(plain.size());
  int len = 0;
  if (!ctx ||
      EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr,
                         key.bytes.data(), iv) != 1 ||
      (!plain.empty() && EVP_EncryptUpdate(ctx.get(), out.data(), &len,
                                           plain.data(), int(plain.size())) !=
                             1)) {
    throw std::runtime_error("encryption failed");
  }
  int fin = 0;
  if (EVP_EncryptFinal_ex(ctx.get(), out.data() + len, &fin) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagLen, tag_out) !=
          1) {
    throw std::runtime_error("encryption failed");
  }
  return out;
}

Bytes gcm_open(const Digest& key, ByteSpan body, ByteSpan tag) {
  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  static const uint8_t iv[12] = {};
  Bytes out(body.size());
  int len = 0;
  if (!ctx ||
      EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr,
                         key.bytes.data(), iv) != 1 ||
      (!body.empty() && EVP_DecryptUpdate(ctx.get(), out.data(), &len,
                                          body.data(), int(body.size())) !=
                            1)) {
    raise(ErrorCode::DecryptFailure, "cipher init");
  }
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagLen,
                          const_cast<uint8_t*>(tag.data())) != 1) {
    raise(ErrorCode::DecryptFailure, "tag");
  }
  int fin = 0;
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &fin) != 1) {
    raise(ErrorCode::DecryptFailure, "authentication failed");
  }
  return out;
}

}  // namespace

Digest Digest::from(ByteSpan b) {
  if (b.size() != 32) throw std::invalid_argument("digest must be 32 bytes");
  Digest d;
  std::memcpy(d.bytes.data(), b.data(), 32);
  return d;
}

Digest hash(ByteSpan data) {
  Digest d;
  SHA256(data.data(), data.size(), d.bytes.data());
  return d;
}

Digest hash2(ByteSpan a, ByteSpan b) {
  Bytes joined;
  joined.reserve(a.size() + b.size());
  append(joined, a);
  append(joined, b);
  return hash(joined);
}

KeyPair KeyPair::generate(KeyUsage usage, DetRng& rng) {
  return from_seed(usage, rng.block32());
}

KeyPair KeyPair::from_seed(KeyUsage usage, ByteSpan seed32) {
  if (seed32.size() != 32) throw std::invalid_argument("seed must be 32 bytes");
  KeyPair kp;
  kp.usage_ = usage;
  std::memcpy(kp.seed_.data(), seed32.data(), 32);
  int type = usage == KeyUsage::Sign ? EVP_PKEY_ED25519 : EVP_PKEY_X25519;
  auto key = raw_private(type, seed32);
  kp.public_ = public_of(key.get());
  return kp;
}

Bytes sign(const KeyPair& key, ByteSpan data) {
  if (key.usage() != KeyUsage::Sign)
    raise(ErrorCode::UsageViolation, "decrypt key cannot sign");
  auto priv = raw_private(EVP_PKEY_ED25519, key.secret_seed());
  MdCtxPtr ctx(EVP_MD_CTX_new());
  size_t len = kSigLen;
  Bytes sig(len);
  if (!ctx ||
      EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, priv.get()) !=
          1 ||
      EVP_DigestSign(ctx.get(), sig.data(), &len, data.data(), data.size()) !=
          1) {
    throw std::runtime_error("signing failed");
  }
  sig.resize(len);
  return sig;
}

bool verify(ByteSpan public_key, ByteSpan data, ByteSpan signature) {
  if (public_key.size() != kPubLen || signature.size() != kSigLen) return false;
  auto pub = raw_public(EVP_PKEY_ED25519, public_key);
  if (!pub) return false;
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr,
                                   pub.get()) != 1) {
    return false;
  }
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(),
                          data.data(), data.size()) == 1;
}

Bytes encrypt_to(ByteSpan public_key, ByteSpan plaintext, DetRng& rng) {
  KeyPair eph = KeyPair::generate(KeyUsage::Decrypt, rng);
  Bytes shared = x25519_shared(eph, public_key);
  Digest key = envelope_key(shared, eph.public_bytes(), public_key);

  Bytes out;
  out.reserve(kPubLen + kTagLen + plaintext.size());
  append(out, eph.public_bytes());
  out.resize(kPubLen + kTagLen);
  Bytes body = gcm_seal(key, plaintext, out.data() + kPubLen);
  append(out, body);
  return out;
}

Bytes decrypt(const KeyPair& key, ByteSpan ciphertext) {
  if (key.usage() != KeyUsage::Decrypt)
    raise(ErrorCode::UsageViolation, "sign key cannot decrypt");
  if (ciphertext.size() < kPubLen + kTagLen)
    raise(ErrorCode::DecryptFailure, "ciphertext too short");
  ByteSpan eph_pub = ciphertext.first(kPubLen);
  ByteSpan tag = ciphertext.subspan(kPubLen, kTagLen);
  ByteSpan body = ciphertext.subspan(kPubLen + kTagLen);
  Bytes shared = x25519_shared(key, eph_pub);
  Digest k = envelope_key(shared, eph_pub, key.public_bytes());
  return gcm_open(k, body, tag);
}

SecureBuffer::~SecureBuffer() {
  if (!data_.empty()) OPENSSL_cleanse(data_.data(), data_.size());
}

}  // namespace trustbox::crypto
