/*
 * Copyright 2026 the warp authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <sodium.h>

#include <cstring>
#include <optional>
#include <string>
#include <string_view>

#include "warp/common.hpp"

// Thin wrappers over libsodium: BLAKE2b hashing/derivation, XSalsa20-Poly1305
// authenticated boxes, Ed25519 signatures. All randomness comes from the
// caller's seeded Rng so simulations replay bit-identically; nothing here
// touches the system RNG.

namespace warp::crypto {

using Key256 = std::array<std::uint8_t, 32>;

inline void init() {
  static const int rc = sodium_init();
  if (rc < 0) {
    throw Error("libsodium initialization failed");
  }
}

inline Bytes hash(std::span<const std::uint8_t> data) {
  init();
  Bytes out(32);
  crypto_generichash(out.data(), out.size(), data.data(), data.size(), nullptr, 0);
  return out;
}

inline Bytes keyed_hash(std::span<const std::uint8_t> key,
                        std::span<const std::uint8_t> data) {
  init();
  Bytes out(32);
  crypto_generichash(out.data(), out.size(), data.data(), data.size(),
                     key.data(), key.size());
  return out;
}

// Deterministic 256-bit subkey from (seed, label).
inline Key256 derive_key(const Key256& seed, std::string_view label) {
  Bytes digest = keyed_hash(seed, to_bytes(label));
  Key256 out{};
  std::memcpy(out.data(), digest.data(), out.size());
  return out;
}

inline constexpr std::size_t kBoxNonceBytes = crypto_secretbox_NONCEBYTES;
inline constexpr std::size_t kBoxOverhead = crypto_secretbox_NONCEBYTES + crypto_secretbox_MACBYTES;

// Authenticated encryption; output is nonce || ciphertext.
inline Bytes seal(const Key256& key, Rng& rng, std::span<const std::uint8_t> plaintext) {
  init();
  Bytes out(kBoxNonceBytes + plaintext.size() + crypto_secretbox_MACBYTES);
  rng.fill(std::span(out.data(), kBoxNonceBytes));
  crypto_secretbox_easy(out.data() + kBoxNonceBytes, plaintext.data(),
                        plaintext.size(), out.data(), key.data());
  return out;
}

inline std::optional<Bytes> open(const Key256& key, std::span<const std::uint8_t> sealed) {
  init();
  if (sealed.size() < kBoxOverhead) {
    return std::nullopt;
  }
  Bytes out(sealed.size() - kBoxOverhead);
  if (crypto_secretbox_open_easy(out.data(), sealed.data() + kBoxNonceBytes,
                                 sealed.size() - kBoxNonceBytes, sealed.data(),
                                 key.data()) != 0) {
    return std::nullopt;
  }
  return out;
}

struct SigningKeyPair {
  Bytes public_key; // 32 bytes
  Bytes secret_key; // 64 bytes

  static SigningKeyPair from_seed(const Key256& seed) {
    init();
    SigningKeyPair kp;
    kp.public_key.resize(crypto_sign_PUBLICKEYBYTES);
    kp.secret_key.resize(crypto_sign_SECRETKEYBYTES);
    crypto_sign_seed_keypair(kp.public_key.data(), kp.secret_key.data(), seed.data());
    return kp;
  }
};

inline Bytes sign(std::span<const std::uint8_t> secret_key,
                  std::span<const std::uint8_t> message) {
  init();
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                       secret_key.data());
  return sig;
}

inline bool verify(std::span<const std::uint8_t> public_key,
                   std::span<const std::uint8_t> message,
                   std::span<const std::uint8_t> signature) {
  init();
  if (public_key.size() != crypto_sign_PUBLICKEYBYTES ||
      signature.size() != crypto_sign_BYTES) {
    return false;
  }
  return crypto_sign_verify_detached(signature.data(), message.data(),
                                     message.size(), public_key.data()) == 0;
}

// A WARP identity: `ia.user` plus its signing keys and the authority's
// endorsement of the public key.
struct Identity {
  std::string ia;
  std::string user;
  SigningKeyPair keys;
  Bytes ia_certificate;

  std::string qualified() const { return ia + "." + user; }
};

// Stub identity authority: signs public keys, nothing more. Real PKI and
// web-of-trust are out of scope.
class IdentityAuthority {
public:
  explicit IdentityAuthority(const Key256& seed)
      : keys_(SigningKeyPair::from_seed(seed)) {}

  Identity issue(std::string ia, std::string user, const Key256& identity_seed) const {
    Identity id;
    id.ia = std::move(ia);
    id.user = std::move(user);
    id.keys = SigningKeyPair::from_seed(identity_seed);
    id.ia_certificate = sign(keys_.secret_key, endorsement(id.qualified(), id.keys.public_key));
    return id;
  }

  bool verify_identity(std::string_view qualified,
                       std::span<const std::uint8_t> public_key,
                       std::span<const std::uint8_t> certificate) const {
    return verify(keys_.public_key, endorsement(qualified, public_key), certificate);
  }

  const Bytes& public_key() const { return keys_.public_key; }

private:
  static Bytes endorsement(std::string_view qualified,
                           std::span<const std::uint8_t> public_key) {
    Bytes msg = to_bytes(qualified);
    msg.push_back(0);
    msg.insert(msg.end(), public_key.begin(), public_key.end());
    return msg;
  }

  SigningKeyPair keys_;
};

} // namespace warp::crypto
