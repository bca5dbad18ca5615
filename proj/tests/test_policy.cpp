#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "warp/policy.hpp"

using namespace warp;

TEST_CASE("evaluate_policy matches the friend/acquaintance/teammate example") {
  Policy p = Policy::parse("OR(friend,AND(acquaintance,school),teammate)");
  CHECK(evaluate_policy(p, {"teammate"}));
  CHECK(evaluate_policy(p, {"friend"}));
  CHECK_FALSE(evaluate_policy(p, {"acquaintance"}));
  CHECK(evaluate_policy(p, {"acquaintance", "school"}));
  CHECK_FALSE(evaluate_policy(p, {}));
}

TEST_CASE("k-of-n is satisfied by any k true children") {
  Policy p = Policy::k_of_n(2, {Policy::leaf("a"), Policy::leaf("b"), Policy::leaf("c")});
  CHECK(evaluate_policy(p, {"a", "c"}));
  CHECK(evaluate_policy(p, {"a", "b", "c"}));
  CHECK_FALSE(evaluate_policy(p, {"b"}));
  CHECK(p.to_string() == "KOFN(2;a,b,c)");
}

TEST_CASE("policy text form round-trips") {
  for (const char* text : {
           "friend",
           "OR(friend,AND(acquaintance,school),teammate)",
           "KOFN(2;a,b,c)",
           "AND(x,KOFN(3;a,b,c,OR(d,e)))",
           "OR(alias:00ff,bucket:3)",
       }) {
    Policy p = Policy::parse(text);
    CHECK(p.to_string() == text);
    CHECK(Policy::parse(p.to_string()) == p);
  }
}

TEST_CASE("policy validation rejects malformed trees and text") {
  CHECK_THROWS_AS(Policy::leaf(""), InvalidPolicy);
  CHECK_THROWS_AS(Policy::leaf("has space"), InvalidPolicy);
  CHECK_THROWS_AS(Policy::all_of({Policy::leaf("a")}), InvalidPolicy);
  CHECK_THROWS_AS(Policy::k_of_n(0, {Policy::leaf("a"), Policy::leaf("b")}), InvalidPolicy);
  CHECK_THROWS_AS(Policy::k_of_n(3, {Policy::leaf("a"), Policy::leaf("b")}), InvalidPolicy);
  CHECK_THROWS_AS(Policy::parse("AND(a)"), InvalidPolicy);
  CHECK_THROWS_AS(Policy::parse("AND(a,b"), InvalidPolicy);
  CHECK_THROWS_AS(Policy::parse("AND(a,b))"), InvalidPolicy);
  CHECK_THROWS_AS(Policy::parse("NAND(a,b)"), InvalidPolicy);
  CHECK_THROWS_AS(Policy::parse("KOFN(a;b,c)"), InvalidPolicy);
  CHECK_THROWS_AS(Policy::parse(""), InvalidPolicy);
}

TEST_CASE("revocation rewrite conditions the attribute on the survivor set") {
  // K=4; u_B sits in bucket 2 together with u_C.
  std::map<std::string, int> buckets{
      {"ub", 2}, {"uc", 2}, {"ud", 0}, {"ue", 1},
  };
  Policy rewritten =
      rewrite_policy_for_revocation(Policy::leaf("friend"), "friend", "ub", buckets, 4);
  CHECK(rewritten.to_string() ==
        "AND(friend,OR(bucket:0,bucket:1,bucket:3,alias:uc))");
}

TEST_CASE("revoking the sole member of a bucket leaves only other buckets") {
  std::map<std::string, int> buckets{{"ub", 2}, {"ud", 0}};
  Policy rewritten =
      rewrite_policy_for_revocation(Policy::leaf("friend"), "friend", "ub", buckets, 4);
  CHECK(rewritten.to_string() == "AND(friend,OR(bucket:0,bucket:1,bucket:3))");

  // With K=2 the guard collapses to a single leaf.
  Policy two = rewrite_policy_for_revocation(Policy::leaf("friend"), "friend", "ub",
                                             {{"ub", 1}}, 2);
  CHECK(two.to_string() == "AND(friend,bucket:0)");
}

TEST_CASE("rewrite touches only leaves carrying the revoked attribute") {
  std::map<std::string, int> buckets{{"ub", 0}, {"uc", 1}};
  Policy p = Policy::parse("OR(friend,AND(colleague,school))");
  Policy rewritten = rewrite_policy_for_revocation(p, "colleague", "ub", buckets, 2);
  CHECK(rewritten.to_string() == "OR(friend,AND(AND(colleague,bucket:1),school))");
  CHECK_THROWS_AS(rewrite_policy_for_revocation(p, "friend", "nobody", buckets, 2),
                  UnknownAlias);
}

TEST_CASE("rewrite excludes exactly the revoked keyring") {
  // Users u0..u9, assigned to K=4 buckets round-robin, all holding "friend".
  constexpr int kBuckets = 4;
  std::map<std::string, int> buckets;
  for (int i = 0; i < 10; ++i) {
    buckets["u" + std::to_string(i)] = i % kBuckets;
  }
  const std::string revoked = "u5";
  Policy p = rewrite_policy_for_revocation(Policy::leaf("friend"), "friend", revoked,
                                           buckets, kBuckets);
  for (const auto& [alias, bucket] : buckets) {
    std::set<std::string> attrs{"friend", bucket_attribute(bucket), alias_attribute(alias)};
    bool satisfied = evaluate_policy(p, attrs);
    if (alias == revoked) {
      CHECK_FALSE(satisfied);
    } else {
      CHECK(satisfied);
    }
  }
}

TEST_CASE("rewrite growth is bounded by bucket geometry") {
  constexpr int kBuckets = 4;
  std::map<std::string, int> buckets;
  for (int i = 0; i < 16; ++i) {
    buckets["u" + std::to_string(i)] = i % kBuckets;
  }
  std::size_t bucket_size = 4; // 16 users over 4 buckets
  Policy p = Policy::parse("OR(friend,AND(friend,school),KOFN(2;friend,x,y))");
  std::size_t occurrences = 3;
  Policy rewritten =
      rewrite_policy_for_revocation(p, "friend", "u5", buckets, kBuckets);
  std::size_t added = rewritten.leaf_count() - p.leaf_count();
  CHECK(added <= occurrences * ((kBuckets - 1) + (bucket_size - 1)));
}
