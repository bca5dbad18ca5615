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

#include <string>
#include <vector>

#include "warp/codec.hpp"
#include "warp/crypto.hpp"
#include "warp/keys.hpp"
#include "warp/naming.hpp"

// Distribution certificates: {x.y, f, D_f, D_K, T_exp} signed by the butler.
// D_f lists every distributor of the folder and its subfolders; D_K carries
// the attribute keys that satisfy the folder's distributor policy.

namespace warp {

struct DistributionCertificate {
  std::string identity; // producer x.y
  FolderName folder;
  std::vector<std::string> distributors;      // D_f, distributor identities
  std::vector<AttributeKey> distributor_keys; // D_K
  SimTime expiry = 0;                         // T_exp
  Bytes signature;

  friend bool operator==(const DistributionCertificate& a, const DistributionCertificate& b) {
    return a.identity == b.identity && a.folder == b.folder &&
           a.distributors == b.distributors && a.expiry == b.expiry &&
           a.signature == b.signature &&
           a.distributor_keys.size() == b.distributor_keys.size();
  }
};

namespace detail {

inline Bytes encode_attribute_key(const AttributeKey& key) {
  TlvWriter w;
  w.put_string(1, key.attribute);
  w.put_u64(2, key.epoch);
  w.put_i64(3, key.expiry);
  w.put(4, key.key);
  return w.take();
}

inline AttributeKey decode_attribute_key(std::span<const std::uint8_t> data) {
  TlvReader r(data);
  AttributeKey key;
  key.attribute = TlvReader::as_string(r.expect(1));
  key.epoch = TlvReader::as_u64(r.expect(2));
  key.expiry = TlvReader::as_i64(r.expect(3));
  auto material = r.expect(4);
  if (material.size() != key.key.size()) {
    throw MalformedEncoding("bad attribute key length");
  }
  std::copy(material.begin(), material.end(), key.key.begin());
  r.expect_done();
  return key;
}

inline Bytes encode_certificate_impl(const DistributionCertificate& cert,
                                     bool with_signature) {
  TlvWriter w;
  w.put_string(1, cert.identity);
  w.put_string(2, format_folder(cert.folder));
  TlvWriter dist;
  for (const auto& d : cert.distributors) {
    dist.put_string(1, d);
  }
  w.put(3, dist.bytes());
  TlvWriter keys;
  for (const auto& k : cert.distributor_keys) {
    keys.put(1, encode_attribute_key(k));
  }
  w.put(4, keys.bytes());
  w.put_i64(5, cert.expiry);
  w.put(6, with_signature ? std::span<const std::uint8_t>(cert.signature)
                          : std::span<const std::uint8_t>());
  return w.take();
}

} // namespace detail

inline Bytes encode_certificate(const DistributionCertificate& cert) {
  return detail::encode_certificate_impl(cert, true);
}

inline Bytes certificate_signable(const DistributionCertificate& cert) {
  return detail::encode_certificate_impl(cert, false);
}

inline DistributionCertificate decode_certificate(std::span<const std::uint8_t> data) {
  TlvReader r(data);
  DistributionCertificate cert;
  cert.identity = TlvReader::as_string(r.expect(1));
  cert.folder = parse_folder(TlvReader::as_string(r.expect(2)));
  TlvReader dist(r.expect(3));
  while (!dist.done()) {
    cert.distributors.push_back(TlvReader::as_string(dist.expect(1)));
  }
  TlvReader keys(r.expect(4));
  while (!keys.done()) {
    cert.distributor_keys.push_back(detail::decode_attribute_key(keys.expect(1)));
  }
  cert.expiry = TlvReader::as_i64(r.expect(5));
  auto sig = r.expect(6);
  cert.signature.assign(sig.begin(), sig.end());
  r.expect_done();
  return cert;
}

inline void sign_certificate(DistributionCertificate& cert,
                             std::span<const std::uint8_t> secret_key) {
  cert.signature = crypto::sign(secret_key, certificate_signable(cert));
}

inline bool verify_certificate(const DistributionCertificate& cert,
                               std::span<const std::uint8_t> public_key) {
  return crypto::verify(public_key, certificate_signable(cert), cert.signature);
}

} // namespace warp
