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

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "warp/codec.hpp"
#include "warp/keys.hpp"
#include "warp/policy.hpp"

// Policy-tree key encapsulation. A fresh secret key encrypts the payload;
// the secret is then wrapped down the policy tree: OR wraps the secret under
// each child, AND splits it into XOR shares, k-of-n splits it with Shamir
// over GF(256), and leaves box their share under the per-(attribute, epoch)
// symmetric key. Satisfaction semantics match CP-ABE; collusion resistance
// of real pairing-based ABE is NOT provided and not needed here — the
// artifact tests protocol semantics, not cryptographic strength.

namespace warp {

struct PolicyCiphertext {
  Policy policy; // in the clear, as ABE ciphertexts carry their policy
  std::uint64_t epoch = 0;
  std::vector<Bytes> leaf_boxes; // one per policy leaf, depth-first order
  Bytes payload_box;

  friend bool operator==(const PolicyCiphertext& a, const PolicyCiphertext& b) {
    return a.policy == b.policy && a.epoch == b.epoch && a.leaf_boxes == b.leaf_boxes &&
           a.payload_box == b.payload_box;
  }
};

namespace gf256 {

// Arithmetic in GF(2^8) with the AES reduction polynomial.
inline std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
  std::uint8_t p = 0;
  while (b) {
    if (b & 1) {
      p ^= a;
    }
    bool hi = a & 0x80;
    a = static_cast<std::uint8_t>(a << 1);
    if (hi) {
      a ^= 0x1b;
    }
    b >>= 1;
  }
  return p;
}

inline std::uint8_t pow(std::uint8_t a, unsigned e) {
  std::uint8_t r = 1;
  while (e) {
    if (e & 1) {
      r = mul(r, a);
    }
    a = mul(a, a);
    e >>= 1;
  }
  return r;
}

inline std::uint8_t inv(std::uint8_t a) {
  // a^254 in GF(2^8)
  return pow(a, 254);
}

} // namespace gf256

namespace detail {

using Secret = crypto::Key256;

// (k, n) Shamir split, byte-wise, share i evaluated at x = i (1-based).
inline std::vector<Secret> shamir_split(const Secret& secret, int k, int n, Rng& rng) {
  std::vector<Secret> coeffs(static_cast<std::size_t>(k) - 1);
  for (auto& c : coeffs) {
    rng.fill(c);
  }
  std::vector<Secret> shares(n);
  for (int i = 1; i <= n; ++i) {
    auto x = static_cast<std::uint8_t>(i);
    for (std::size_t byte = 0; byte < secret.size(); ++byte) {
      std::uint8_t acc = secret[byte];
      std::uint8_t xp = 1;
      for (const auto& c : coeffs) {
        xp = gf256::mul(xp, x);
        acc = static_cast<std::uint8_t>(acc ^ gf256::mul(c[byte], xp));
      }
      shares[i - 1][byte] = acc;
    }
  }
  return shares;
}

// Lagrange interpolation at x = 0 from k (x, share) points.
inline Secret shamir_combine(const std::vector<std::pair<int, Secret>>& points) {
  Secret out{};
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto xi = static_cast<std::uint8_t>(points[i].first);
    std::uint8_t num = 1;
    std::uint8_t den = 1;
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (i == j) {
        continue;
      }
      auto xj = static_cast<std::uint8_t>(points[j].first);
      num = gf256::mul(num, xj);
      den = gf256::mul(den, static_cast<std::uint8_t>(xi ^ xj));
    }
    std::uint8_t li = gf256::mul(num, gf256::inv(den));
    for (std::size_t byte = 0; byte < out.size(); ++byte) {
      out[byte] = static_cast<std::uint8_t>(out[byte] ^
                                            gf256::mul(points[i].second[byte], li));
    }
  }
  return out;
}

inline void wrap_tree(const Policy& node, const Secret& secret, std::uint64_t epoch,
                      const AttributeAuthority& issuer, Rng& rng,
                      std::vector<Bytes>& out_boxes) {
  switch (node.kind()) {
  case Policy::Kind::Leaf: {
    crypto::Key256 leaf_key = issuer.key_material(node.attribute(), epoch);
    out_boxes.push_back(crypto::seal(leaf_key, rng, secret));
    return;
  }
  case Policy::Kind::Or:
    for (const Policy& c : node.children()) {
      wrap_tree(c, secret, epoch, issuer, rng, out_boxes);
    }
    return;
  case Policy::Kind::And: {
    std::size_t n = node.children().size();
    std::vector<Secret> shares(n);
    Secret acc = secret;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      rng.fill(shares[i]);
      for (std::size_t b = 0; b < acc.size(); ++b) {
        acc[b] ^= shares[i][b];
      }
    }
    shares[n - 1] = acc;
    for (std::size_t i = 0; i < n; ++i) {
      wrap_tree(node.children()[i], shares[i], epoch, issuer, rng, out_boxes);
    }
    return;
  }
  case Policy::Kind::KofN: {
    int n = static_cast<int>(node.children().size());
    std::vector<Secret> shares = shamir_split(secret, node.threshold(), n, rng);
    for (int i = 0; i < n; ++i) {
      wrap_tree(node.children()[static_cast<std::size_t>(i)], shares[static_cast<std::size_t>(i)],
                epoch, issuer, rng, out_boxes);
    }
    return;
  }
  }
}

inline std::optional<Secret> unwrap_tree(const Policy& node, std::uint64_t epoch,
                                         const KeyRing& ring,
                                         const std::vector<Bytes>& boxes,
                                         std::size_t& index) {
  switch (node.kind()) {
  case Policy::Kind::Leaf: {
    if (index >= boxes.size()) {
      throw MalformedEncoding("ciphertext has fewer boxes than policy leaves");
    }
    const Bytes& box = boxes[index++];
    const AttributeKey* key = ring.find(node.attribute(), epoch);
    if (!key) {
      return std::nullopt;
    }
    auto opened = crypto::open(key->key, box);
    if (!opened || opened->size() != sizeof(Secret)) {
      return std::nullopt;
    }
    Secret s{};
    std::copy(opened->begin(), opened->end(), s.begin());
    return s;
  }
  case Policy::Kind::Or: {
    std::optional<Secret> result;
    for (const Policy& c : node.children()) {
      auto got = unwrap_tree(c, epoch, ring, boxes, index);
      if (got && !result) {
        result = got; // keep consuming boxes so the index stays aligned
      }
    }
    return result;
  }
  case Policy::Kind::And: {
    Secret acc{};
    bool complete = true;
    for (const Policy& c : node.children()) {
      auto got = unwrap_tree(c, epoch, ring, boxes, index);
      if (!got) {
        complete = false;
        continue;
      }
      for (std::size_t b = 0; b < acc.size(); ++b) {
        acc[b] ^= (*got)[b];
      }
    }
    if (!complete) {
      return std::nullopt;
    }
    return acc;
  }
  case Policy::Kind::KofN: {
    std::vector<std::pair<int, Secret>> points;
    int x = 0;
    for (const Policy& c : node.children()) {
      ++x;
      auto got = unwrap_tree(c, epoch, ring, boxes, index);
      if (got && static_cast<int>(points.size()) < node.threshold()) {
        points.emplace_back(x, *got);
      }
    }
    if (static_cast<int>(points.size()) < node.threshold()) {
      return std::nullopt;
    }
    return shamir_combine(points);
  }
  }
  return std::nullopt;
}

} // namespace detail

inline PolicyCiphertext encrypt_with_policy(std::span<const std::uint8_t> plaintext,
                                            const Policy& policy, std::uint64_t epoch,
                                            const AttributeAuthority& issuer, Rng& rng) {
  PolicyCiphertext ct;
  ct.policy = policy;
  ct.epoch = epoch;
  detail::Secret sk{};
  rng.fill(sk);
  ct.payload_box = crypto::seal(sk, rng, plaintext);
  detail::wrap_tree(policy, sk, epoch, issuer, rng, ct.leaf_boxes);
  return ct;
}

enum class DecryptFailure { AccessDenied, IntegrityFailure };

inline std::optional<Bytes> try_decrypt_with_keyring(const PolicyCiphertext& ct,
                                                     const KeyRing& ring,
                                                     DecryptFailure* why = nullptr) {
  std::size_t index = 0;
  auto secret = detail::unwrap_tree(ct.policy, ct.epoch, ring, ct.leaf_boxes, index);
  if (!secret) {
    if (why) {
      *why = DecryptFailure::AccessDenied;
    }
    return std::nullopt;
  }
  auto payload = crypto::open(*secret, ct.payload_box);
  if (!payload) {
    if (why) {
      *why = DecryptFailure::IntegrityFailure;
    }
    return std::nullopt;
  }
  return payload;
}

inline Bytes decrypt_with_keyring(const PolicyCiphertext& ct, const KeyRing& ring) {
  DecryptFailure why;
  auto out = try_decrypt_with_keyring(ct, ring, &why);
  if (!out) {
    if (why == DecryptFailure::IntegrityFailure) {
      throw IntegrityFailure("payload authentication failed");
    }
    throw AccessDenied("keyring does not satisfy policy " + ct.policy.to_string() +
                       " at epoch " + std::to_string(ct.epoch));
  }
  return *out;
}

// Canonical ciphertext encoding: policy text, epoch, leaf boxes, payload box.
inline Bytes encode_policy_ciphertext(const PolicyCiphertext& ct) {
  TlvWriter w;
  w.put_string(1, ct.policy.to_string());
  w.put_u64(2, ct.epoch);
  TlvWriter boxes;
  for (const Bytes& b : ct.leaf_boxes) {
    boxes.put(1, b);
  }
  w.put(3, boxes.bytes());
  w.put(4, ct.payload_box);
  return w.take();
}

inline PolicyCiphertext decode_policy_ciphertext(std::span<const std::uint8_t> data) {
  TlvReader r(data);
  PolicyCiphertext ct;
  try {
    ct.policy = Policy::parse(TlvReader::as_string(r.expect(1)));
  } catch (const InvalidPolicy& e) {
    throw MalformedEncoding(std::string("bad policy in ciphertext: ") + e.what());
  }
  ct.epoch = TlvReader::as_u64(r.expect(2));
  TlvReader boxes(r.expect(3));
  while (!boxes.done()) {
    auto v = boxes.expect(1);
    ct.leaf_boxes.emplace_back(v.begin(), v.end());
  }
  auto pb = r.expect(4);
  ct.payload_box.assign(pb.begin(), pb.end());
  r.expect_done();
  if (ct.leaf_boxes.size() != ct.policy.leaf_count()) {
    throw MalformedEncoding("leaf box count does not match policy");
  }
  return ct;
}

} // namespace warp
