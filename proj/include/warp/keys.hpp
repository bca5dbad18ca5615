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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "warp/crypto.hpp"
#include "warp/policy.hpp"

namespace warp {

// Followers encrypt/decrypt at the issuer's rotating epoch (>= 1).
// Distributor-policy material lives in a reserved epoch that never rotates;
// distributor lifecycle is governed by certificate expiry instead.
inline constexpr std::uint64_t kDistributorEpoch = 0;

struct AttributeKey {
  std::string attribute;
  std::uint64_t epoch = 0;
  SimTime expiry = 0;
  crypto::Key256 key{};
};

// A holder's pool of recent keys from one issuer. Keys from prior epochs are
// retained (bounded by the retention window) so content encrypted before a
// rotation stays readable.
class KeyRing {
public:
  KeyRing() = default;
  explicit KeyRing(std::string issuer, int retention_epochs = 2)
      : issuer_(std::move(issuer)), retention_epochs_(retention_epochs) {}

  const std::string& issuer() const { return issuer_; }

  void insert(const AttributeKey& key) {
    keys_[{key.attribute, key.epoch}] = key;
    if (key.epoch > newest_epoch_) {
      newest_epoch_ = key.epoch;
      prune();
    }
  }

  const AttributeKey* find(const std::string& attribute, std::uint64_t epoch) const {
    auto it = keys_.find({attribute, epoch});
    return it == keys_.end() ? nullptr : &it->second;
  }

  std::set<std::string> attributes_at(std::uint64_t epoch) const {
    std::set<std::string> out;
    for (const auto& [key, value] : keys_) {
      if (key.second == epoch) {
        out.insert(key.first);
      }
    }
    return out;
  }

  std::size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }

private:
  void prune() {
    // Epoch 0 is the distributor domain and never ages out.
    if (newest_epoch_ <= static_cast<std::uint64_t>(retention_epochs_)) {
      return;
    }
    std::uint64_t oldest_kept = newest_epoch_ - retention_epochs_;
    for (auto it = keys_.begin(); it != keys_.end();) {
      if (it->first.second != kDistributorEpoch && it->first.second < oldest_kept) {
        it = keys_.erase(it);
      } else {
        ++it;
      }
    }
  }

  std::string issuer_;
  int retention_epochs_ = 2;
  std::uint64_t newest_epoch_ = 0;
  std::map<std::pair<std::string, std::uint64_t>, AttributeKey> keys_;
};

struct AuthorityConfig {
  int bucket_count = 16;            // K
  SimTime key_lifetime = 7 * kDay;  // expiry of issued keys
  int retention_epochs = 2;
};

// Issuer-side attribute state for one identity: deterministic key material
// per (attribute, epoch), plus the social bookkeeping revocation needs —
// per-peer categories, a random alias and a uniform bucket.
class AttributeAuthority {
public:
  AttributeAuthority() = default;
  AttributeAuthority(std::string owner, const crypto::Key256& master_seed,
                     AuthorityConfig config)
      : owner_(std::move(owner)), master_seed_(master_seed), config_(config) {}

  struct PeerRecord {
    std::string alias; // 32 hex chars
    int bucket = 0;
    std::set<std::string> categories;
    std::set<std::string> revoked_attributes;
  };

  const std::string& owner() const { return owner_; }
  std::uint64_t epoch() const { return epoch_; }
  int bucket_count() const { return config_.bucket_count; }
  const AuthorityConfig& config() const { return config_; }

  std::uint64_t rotate_epoch() { return ++epoch_; }

  // Key material is a pure function of (issuer seed, attribute, epoch), so
  // re-issuing at the same epoch is idempotent.
  crypto::Key256 key_material(const std::string& attribute, std::uint64_t epoch) const {
    return crypto::derive_key(master_seed_,
                              "attr\x1f" + attribute + "\x1f" + std::to_string(epoch));
  }

  AttributeKey make_key(const std::string& attribute, std::uint64_t epoch,
                        SimTime now) const {
    return AttributeKey{attribute, epoch, now + config_.key_lifetime,
                        key_material(attribute, epoch)};
  }

  void categorize(const std::string& peer, std::set<std::string> categories, Rng& rng) {
    auto it = peers_.find(peer);
    if (it != peers_.end()) {
      // Re-categorization replaces categories but keeps alias and bucket.
      it->second.categories = std::move(categories);
      return;
    }
    PeerRecord rec;
    rec.alias = to_hex(rng.array<16>());
    rec.bucket = static_cast<int>(rng.below(static_cast<std::uint64_t>(config_.bucket_count)));
    rec.categories = std::move(categories);
    peers_.emplace(peer, std::move(rec));
  }

  bool knows(const std::string& peer) const { return peers_.contains(peer); }

  const PeerRecord& peer(const std::string& peer_name) const {
    auto it = peers_.find(peer_name);
    if (it == peers_.end()) {
      throw UnknownPeer("no such peer: " + peer_name);
    }
    return it->second;
  }

  const std::map<std::string, PeerRecord>& peers() const { return peers_; }

  // Full attribute set the peer is entitled to: its categories (minus revoked
  // ones) plus its own alias and bucket attributes. Alias keys are only ever
  // issued to the alias's owner.
  std::set<std::string> entitled_attributes(const std::string& peer_name) const {
    const PeerRecord& rec = peer(peer_name);
    std::set<std::string> attrs;
    for (const auto& cat : rec.categories) {
      if (!rec.revoked_attributes.contains(cat)) {
        attrs.insert(cat);
      }
    }
    attrs.insert(alias_attribute(rec.alias));
    attrs.insert(bucket_attribute(rec.bucket));
    return attrs;
  }

  std::vector<AttributeKey> issue_attribute_keys(const std::string& peer_name,
                                                 const std::set<std::string>& requested,
                                                 SimTime now) const {
    std::set<std::string> entitled = entitled_attributes(peer_name);
    std::vector<AttributeKey> keys;
    for (const auto& attr : requested) {
      if (entitled.contains(attr)) {
        keys.push_back(make_key(attr, epoch_, now));
      }
    }
    return keys;
  }

  void revoke_attribute(const std::string& peer_name, const std::string& attribute) {
    auto it = peers_.find(peer_name);
    if (it == peers_.end()) {
      throw UnknownPeer("no such peer: " + peer_name);
    }
    it->second.revoked_attributes.insert(attribute);
  }

  // alias -> bucket for every known peer, as the revocation rewrite needs it.
  std::map<std::string, int> buckets_by_alias() const {
    std::map<std::string, int> out;
    for (const auto& [_, rec] : peers_) {
      out.emplace(rec.alias, rec.bucket);
    }
    return out;
  }

  // Issuer-local ring satisfying the given policy at the given epoch; used
  // for distributor keys (D_K) and for the owner's own decryption.
  KeyRing ring_for_attributes(const std::vector<std::string>& attributes,
                              std::uint64_t at_epoch, SimTime expiry) const {
    KeyRing ring(owner_, config_.retention_epochs);
    for (const auto& attr : attributes) {
      ring.insert(AttributeKey{attr, at_epoch, expiry, key_material(attr, at_epoch)});
    }
    return ring;
  }

private:
  std::string owner_;
  crypto::Key256 master_seed_{};
  AuthorityConfig config_;
  std::uint64_t epoch_ = 1;
  std::map<std::string, PeerRecord> peers_;
};

} // namespace warp
