#include <catch2/catch_amalgamated.hpp>

#include "policy_shapes.hpp"
#include "warp/kem.hpp"

using namespace warp;

namespace {

AttributeAuthority make_authority(std::uint64_t seed = 1) {
  Rng rng(seed);
  crypto::Key256 master{};
  rng.fill(master);
  return AttributeAuthority("ia.alice", master, AuthorityConfig{});
}

KeyRing ring_with(const AttributeAuthority& auth, std::initializer_list<std::string> attrs,
                  std::uint64_t epoch) {
  KeyRing ring(auth.owner());
  for (const auto& a : attrs) {
    ring.insert(AttributeKey{a, epoch, 30 * kDay, auth.key_material(a, epoch)});
  }
  return ring;
}

} // namespace

TEST_CASE("encrypt/decrypt round-trips for a satisfying ring") {
  AttributeAuthority auth = make_authority();
  Rng rng(2);
  Bytes msg = to_bytes("hello warp");
  PolicyCiphertext ct = encrypt_with_policy(msg, Policy::leaf("friend"), 1, auth, rng);
  KeyRing ring = ring_with(auth, {"friend"}, 1);
  CHECK(decrypt_with_keyring(ct, ring) == msg);
}

TEST_CASE("keys from a different epoch do not decrypt") {
  AttributeAuthority auth = make_authority();
  Rng rng(3);
  PolicyCiphertext ct =
      encrypt_with_policy(to_bytes("m"), Policy::leaf("friend"), 1, auth, rng);
  KeyRing newer = ring_with(auth, {"friend"}, 2);
  CHECK_THROWS_AS(decrypt_with_keyring(ct, newer), AccessDenied);
}

TEST_CASE("a tampered payload is an integrity failure, not access denial") {
  AttributeAuthority auth = make_authority();
  Rng rng(4);
  PolicyCiphertext ct =
      encrypt_with_policy(to_bytes("payload"), Policy::leaf("friend"), 1, auth, rng);
  ct.payload_box.back() ^= 0x01;
  KeyRing ring = ring_with(auth, {"friend"}, 1);
  CHECK_THROWS_AS(decrypt_with_keyring(ct, ring), IntegrityFailure);
}

TEST_CASE("encryption is randomized") {
  AttributeAuthority auth = make_authority();
  Rng rng(5);
  Bytes msg = to_bytes("same message");
  Policy p = Policy::leaf("friend");
  PolicyCiphertext a = encrypt_with_policy(msg, p, 1, auth, rng);
  PolicyCiphertext b = encrypt_with_policy(msg, p, 1, auth, rng);
  CHECK(a.payload_box != b.payload_box);
  CHECK(a.leaf_boxes != b.leaf_boxes);
}

TEST_CASE("threshold nodes need exactly k satisfied children") {
  AttributeAuthority auth = make_authority();
  Rng rng(6);
  Policy p = Policy::k_of_n(2, {Policy::leaf("a"), Policy::leaf("b"), Policy::leaf("c")});
  Bytes msg = to_bytes("threshold");
  PolicyCiphertext ct = encrypt_with_policy(msg, p, 1, auth, rng);
  CHECK(decrypt_with_keyring(ct, ring_with(auth, {"a", "c"}, 1)) == msg);
  CHECK(decrypt_with_keyring(ct, ring_with(auth, {"b", "c"}, 1)) == msg);
  CHECK_FALSE(try_decrypt_with_keyring(ct, ring_with(auth, {"b"}, 1)).has_value());
}

TEST_CASE("decryption succeeds exactly when the policy evaluates true") {
  // Exhaustive dual-route check over all shapes with up to 4 leaves (the
  // acceptance suite runs the full 6-leaf version).
  AttributeAuthority auth = make_authority();
  Rng rng(7);
  Bytes msg = to_bytes("oracle");
  for (const Policy& policy : warp::testing::all_policies_up_to(4)) {
    PolicyCiphertext ct = encrypt_with_policy(msg, policy, 1, auth, rng);
    int leaves = static_cast<int>(policy.leaf_count());
    for (unsigned mask = 0; mask < (1u << leaves); ++mask) {
      std::set<std::string> attrs;
      KeyRing ring(auth.owner());
      for (int bit = 0; bit < leaves; ++bit) {
        if (mask & (1u << bit)) {
          std::string attr = "a" + std::to_string(bit);
          attrs.insert(attr);
          ring.insert(AttributeKey{attr, 1, 30 * kDay, auth.key_material(attr, 1)});
        }
      }
      bool decrypted = try_decrypt_with_keyring(ct, ring).has_value();
      REQUIRE(decrypted == evaluate_policy(policy, attrs));
    }
  }
}

TEST_CASE("key material derivation is idempotent per epoch") {
  AttributeAuthority auth = make_authority();
  CHECK(auth.key_material("friend", 1) == auth.key_material("friend", 1));
  CHECK(auth.key_material("friend", 1) != auth.key_material("friend", 2));
  CHECK(auth.key_material("friend", 1) != auth.key_material("colleague", 1));
}

TEST_CASE("rotation bumps the epoch monotonically") {
  AttributeAuthority auth = make_authority();
  std::uint64_t e = auth.epoch();
  auth.rotate_epoch();
  auth.rotate_epoch();
  CHECK(auth.epoch() == e + 2);
}

TEST_CASE("key rings retain a bounded pool of recent epochs") {
  KeyRing ring("ia.alice", 2);
  crypto::Key256 k{};
  ring.insert(AttributeKey{"dist:x", kDistributorEpoch, 365 * kDay, k});
  for (std::uint64_t e = 1; e <= 5; ++e) {
    ring.insert(AttributeKey{"friend", e, 30 * kDay, k});
  }
  CHECK(ring.find("friend", 5));
  CHECK(ring.find("friend", 4));
  CHECK(ring.find("friend", 3));
  CHECK_FALSE(ring.find("friend", 2));
  CHECK_FALSE(ring.find("friend", 1));
  // The distributor domain never ages out.
  CHECK(ring.find("dist:x", kDistributorEpoch));
}

TEST_CASE("categorization assigns stable aliases and uniform buckets") {
  AttributeAuthority auth = make_authority();
  Rng rng(8);
  auth.categorize("ia.bob", {"friend"}, rng);
  auto first = auth.peer("ia.bob");
  CHECK(first.alias.size() == 32);
  CHECK(first.bucket >= 0);
  CHECK(first.bucket < auth.bucket_count());

  auth.categorize("ia.bob", {"colleague"}, rng);
  auto second = auth.peer("ia.bob");
  CHECK(second.alias == first.alias);
  CHECK(second.bucket == first.bucket);
  CHECK(second.categories == std::set<std::string>{"colleague"});
}

TEST_CASE("issued keys never exceed the peer's entitlement") {
  AttributeAuthority auth = make_authority();
  Rng rng(9);
  auth.categorize("ia.bob", {"friend"}, rng);
  auto keys = auth.issue_attribute_keys(
      "ia.bob", {"friend", "colleague", "alias:ffff", "bucket:0"}, 0);
  std::set<std::string> granted;
  for (const auto& k : keys) {
    granted.insert(k.attribute);
  }
  CHECK(granted.contains("friend"));
  CHECK_FALSE(granted.contains("colleague"));        // not categorized as such
  CHECK_FALSE(granted.contains("alias:ffff"));       // someone else's alias
  CHECK_THROWS_AS(auth.issue_attribute_keys("ia.eve", {"friend"}, 0), UnknownPeer);
}

TEST_CASE("revoked attributes stop being issued") {
  AttributeAuthority auth = make_authority();
  Rng rng(10);
  auth.categorize("ia.bob", {"friend", "colleague"}, rng);
  auth.revoke_attribute("ia.bob", "friend");
  std::set<std::string> requested{"friend", "colleague"};
  auto keys = auth.issue_attribute_keys("ia.bob", requested, 0);
  REQUIRE(keys.size() == 1);
  CHECK(keys[0].attribute == "colleague");
}

TEST_CASE("policy ciphertext encoding round-trips and validates box counts") {
  AttributeAuthority auth = make_authority();
  Rng rng(11);
  Policy p = Policy::parse("OR(friend,AND(a,b))");
  PolicyCiphertext ct = encrypt_with_policy(to_bytes("x"), p, 3, auth, rng);
  Bytes wire = encode_policy_ciphertext(ct);
  PolicyCiphertext back = decode_policy_ciphertext(wire);
  CHECK(back == ct);
  CHECK(encode_policy_ciphertext(back) == wire);

  ct.leaf_boxes.pop_back();
  CHECK_THROWS_AS(decode_policy_ciphertext(encode_policy_ciphertext(ct)),
                  MalformedEncoding);
}
