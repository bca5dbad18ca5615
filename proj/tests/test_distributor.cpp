#include <catch2/catch_amalgamated.hpp>

#include "warp/butler.hpp"
#include "warp/distributor.hpp"

using namespace warp;

namespace {

// Raw requester that bypasses resolution; used to drive distributors directly.
struct TestClient : Node {
  using Node::Node;

  std::vector<DataMsg> replies;

  void request(NodeId to, const ContentName& name) {
    send(to, RequestMsg{++sequence, name});
  }
  void resolve(NodeId to, const FolderName& folder) {
    send(to, ResolveMsg{++sequence, folder});
  }
  void on_message(NodeId, const Message& msg, SimTime) override {
    if (const auto* data = std::get_if<DataMsg>(&msg)) {
      replies.push_back(*data);
    } else if (const auto* reply = std::get_if<ResolveReplyMsg>(&msg)) {
      resolve_replies.push_back(*reply);
    }
  }

  std::uint64_t sequence = 0;
  std::vector<ResolveReplyMsg> resolve_replies;
};

struct World {
  explicit World(std::uint64_t seed = 1, DistributorConfig dcfg = {})
      : net(seed), alice(net.spawn<Butler>("alice", "ia", "alice")),
        bob(net.spawn<Butler>("bob", "ia", "bob")),
        dist(net.spawn<Distributor>("d1", dcfg)),
        client(net.spawn<TestClient>("client")) {
    alice.categorize_user("ia.bob", {"friend"});
    alice.register_app("fl", Policy::leaf("friend"));
    alice.create_feed("fl", "main", Policy::leaf("friend"));
  }

  ContentName publish(std::string_view text) {
    ContentName name = alice.publish("fl", "main", to_bytes(text));
    alice.compile_index("fl", {{"latest", name}});
    return name;
  }

  void certify(SimTime expiry = 365 * kDay) {
    dist.accept_certificate(
        alice.issue_certificate("ia.d1", alice.app_prefix("fl"), expiry));
  }

  SimNetwork net;
  Butler& alice;
  Butler& bob;
  Distributor& dist;
  TestClient& client;
};

} // namespace

TEST_CASE("RBW delay follows the fail/success formula") {
  // Unit vectors evaluated directly from the window formula.
  CHECK(Distributor::rbw_delay(0, 0, 10 * kSecond) == 0);
  CHECK(Distributor::rbw_delay(3, 1, 10 * kSecond) == 15 * kSecond);
  CHECK(Distributor::rbw_delay(2, 3, 10 * kSecond) == 5 * kSecond);
}

TEST_CASE("RBW next_allowed is monotone under consecutive failures") {
  World w;
  SimTime prev = 0;
  for (int i = 0; i < 8; ++i) {
    SimTime next = w.dist.rbw_on_request("peer", false, static_cast<SimTime>(i) * 100);
    CHECK(next > prev); // strictly growing while failures accumulate in-window
    prev = next;
  }
}

TEST_CASE("RBW entries age out of the window") {
  World w;
  w.dist.rbw_on_request("peer", false, 0);
  w.dist.rbw_on_request("peer", false, 1 * kSecond);
  // Far outside delta: the log is empty again, so no extra delay accrues.
  SimTime next = w.dist.rbw_on_request("peer", true, 5 * kMinute);
  CHECK(next == 5 * kMinute);
}

TEST_CASE("a peer that respects next_allowed is never banned") {
  World w;
  w.certify();
  ContentName missing = parse_name("ia.alice/fl/" + std::string(32, '9'));
  SimTime t = 1 * kSecond;
  int banned = 0;
  for (int i = 0; i < 1000; ++i) {
    t = std::max(t + 1, w.dist.rbw_next_allowed("polite"));
    if (!w.dist.rbw_allows("polite", t)) {
      ++banned;
    }
    // Mostly failing requests: the suggested gap keeps growing, but honoring
    // it keeps the peer clean.
    w.dist.rbw_on_request("polite", i % 5 == 0, t);
  }
  CHECK(banned == 0);
}

TEST_CASE("requests before next_allowed are refused with Banned") {
  DistributorConfig cfg;
  cfg.delta_rbw = 10 * kSecond;
  World w(3, cfg);
  w.certify();
  ContentName missing = parse_name("ia.alice/fl/" + std::string(32, '9'));
  w.net.run_until(1 * kSecond);
  // A failing request (NotFound) opens a ban window...
  w.client.request(w.dist.id(), missing);
  w.net.run_idle();
  REQUIRE(w.client.replies.size() == 1);
  CHECK(w.client.replies[0].status == DataStatus::NotFound);
  // ...so an immediate retry is refused without touching the store.
  w.client.request(w.dist.id(), missing);
  w.net.run_idle();
  REQUIRE(w.client.replies.size() == 2);
  CHECK(w.client.replies[1].status == DataStatus::Banned);
  CHECK(w.client.replies[1].next_allowed > w.net.now() - 1 * kMinute);
  CHECK(w.net.collect_metrics().rbw_bans == 1);
}

TEST_CASE("popularity counts requests inside a sliding window") {
  DistributorConfig cfg;
  cfg.p_min = 3;
  World w(4, cfg);
  ContentName name = parse_name("ia.alice/fl/" + std::string(32, '1'));
  w.dist.note_request(name, 0);
  CHECK_FALSE(w.dist.should_cache(name, 0));
  w.dist.note_request(name, 1 * kMinute);
  w.dist.note_request(name, 2 * kMinute);
  CHECK(w.dist.should_cache(name, 2 * kMinute));
  // The first two requests age out of the one-hour window.
  CHECK_FALSE(w.dist.should_cache(name, 62 * kMinute));
}

TEST_CASE("certificates gate serving rights") {
  World w;
  ContentName post = w.publish("hi");
  w.net.run_until(1 * kSecond);
  // No certificate: nothing is served.
  w.client.request(w.dist.id(), post);
  w.net.run_idle();
  REQUIRE(w.client.replies.size() == 1);
  CHECK(w.client.replies[0].status == DataStatus::NotFound);

  w.certify();
  // Wait out the ban window the failed request opened.
  w.net.run_until(w.net.now() + 15 * kSecond);
  w.client.request(w.dist.id(), post);
  w.net.run_idle();
  REQUIRE(w.client.replies.size() == 2);
  CHECK(w.client.replies[1].status == DataStatus::Ok);
}

TEST_CASE("tampered or expired certificates are rejected") {
  World w;
  auto cert = w.alice.issue_certificate("ia.d1", w.alice.app_prefix("fl"), 10 * kSecond);
  auto forged = cert;
  forged.expiry += 1;
  CHECK_THROWS_AS(w.dist.accept_certificate(forged), BadCertificate);

  w.net.run_until(11 * kSecond);
  CHECK_THROWS_AS(w.dist.accept_certificate(cert), Expired);
}

TEST_CASE("a certificate for one folder does not cover a sibling") {
  World w;
  w.alice.create_feed("fl", "photos", Policy::leaf("friend"));
  FolderName main_folder = w.alice.feed_folder("fl", "main");
  FolderName photos = w.alice.feed_folder("fl", "photos");
  w.dist.accept_certificate(w.alice.issue_certificate("ia.d1", main_folder, 30 * kDay));
  CHECK(w.dist.covering_cert(main_folder, w.net.now()) != nullptr);
  CHECK(w.dist.covering_cert(photos, w.net.now()) == nullptr);
}

TEST_CASE("a valid certificate opens distributor fields") {
  World w;
  ContentName post = w.publish("hello");
  w.certify();
  const NetworkObject& obj = w.alice.owned_object(post);
  auto fields = try_open_distributor(obj, w.dist.distributor_ring());
  REQUIRE(fields.has_value());
  CHECK(is_tu_folder(folder_of(fields->thread_update_name)));
  // The distributor ring still cannot read the follower group.
  CHECK_FALSE(try_open_follower(obj, w.dist.distributor_ring()).has_value());
}

TEST_CASE("warm cache plus fresh TU serves with zero upstream messages") {
  DistributorConfig cfg;
  cfg.p_min = 1; // cache on first request
  World w(5, cfg);
  ContentName post = w.publish("cached");
  w.certify();
  w.net.run_until(1 * kSecond);

  w.client.request(w.dist.id(), post);
  w.net.run_idle();
  CHECK(w.dist.has_cached(post));
  std::uint64_t upstream_after_first = w.net.collect_metrics().upstream_fetches;

  w.client.request(w.dist.id(), post);
  w.net.run_idle();
  REQUIRE(w.client.replies.size() == 2);
  CHECK(w.client.replies[1].status == DataStatus::Ok);
  Metrics m = w.net.collect_metrics();
  CHECK(m.upstream_fetches == upstream_after_first); // fast path, no upstream
  CHECK(m.cache_hits == 1);
  CHECK(m.stale_serves == 0);
}

TEST_CASE("an invalidated entry is purged and never served stale") {
  DistributorConfig cfg;
  cfg.p_min = 1;
  cfg.tau_freshness = 10 * kSecond;
  World w(6, cfg);
  ContentName post = w.publish("v1");
  w.certify();
  w.net.run_until(1 * kSecond);

  w.client.request(w.dist.id(), post);
  w.net.run_idle();
  REQUIRE(w.dist.has_cached(post));

  // The owner rewrites the policy; the TU carries UPDATE(post, post).
  w.alice.revoke_access(post, "ia.bob");
  CHECK(w.alice.tu_commands(w.alice.feed_folder("fl", "main")).back() ==
        ThreadUpdateCommand::update(post, post));

  // Within tau the cached v1 is still legitimately served.
  w.client.request(w.dist.id(), post);
  w.net.run_idle();
  CHECK(w.client.replies.back().object->version == 1);

  // Past tau the refresh applies the UPDATE, purges v1 and refetches v2.
  w.net.run_until(w.net.now() + 11 * kSecond);
  w.client.request(w.dist.id(), post);
  w.net.run_idle();
  REQUIRE(w.client.replies.back().status == DataStatus::Ok);
  CHECK(w.client.replies.back().object->version == 2);
  CHECK(w.net.collect_metrics().stale_serves == 0);
}

TEST_CASE("DELETE purges and blocklists for good") {
  DistributorConfig cfg;
  cfg.p_min = 1;
  cfg.tau_freshness = 5 * kSecond;
  World w(7, cfg);
  ContentName post = w.publish("doomed");
  w.certify();
  w.net.run_until(1 * kSecond);

  w.client.request(w.dist.id(), post);
  w.net.run_idle();
  REQUIRE(w.dist.has_cached(post));

  w.alice.mutate_delete(post);
  w.net.run_until(w.net.now() + 6 * kSecond);
  w.client.request(w.dist.id(), post);
  w.net.run_idle();
  CHECK(w.client.replies.back().status == DataStatus::NotFound);
  CHECK_FALSE(w.dist.has_cached(post));
  CHECK(w.dist.is_blocklisted(post));

  // Even a direct re-request never serves it again, with zero upstream cost.
  std::uint64_t upstream = w.net.collect_metrics().upstream_fetches;
  w.net.run_until(w.net.now() + 20 * kSecond);
  w.client.request(w.dist.id(), post);
  w.net.run_idle();
  CHECK(w.client.replies.back().status == DataStatus::NotFound);
  CHECK(w.net.collect_metrics().upstream_fetches == upstream);
}

TEST_CASE("CUT purges exactly the cached interval") {
  DistributorConfig cfg;
  cfg.p_min = 1;
  cfg.tau_freshness = 5 * kSecond;
  World w(8, cfg);
  std::vector<ContentName> posts;
  for (int i = 0; i < 5; ++i) {
    posts.push_back(w.publish("p" + std::to_string(i)));
  }
  w.certify();
  w.net.run_until(1 * kSecond);
  for (const auto& p : posts) {
    w.client.request(w.dist.id(), p);
    w.net.run_idle();
  }
  for (const auto& p : posts) {
    REQUIRE(w.dist.has_cached(p));
  }

  w.alice.cut_feed("fl", "main", posts[1], posts[3]);
  w.net.run_until(w.net.now() + 6 * kSecond);
  w.client.request(w.dist.id(), posts[0]); // forces the TU refresh
  w.net.run_idle();

  CHECK(w.dist.has_cached(posts[0]));
  CHECK_FALSE(w.dist.has_cached(posts[1]));
  CHECK_FALSE(w.dist.has_cached(posts[2]));
  CHECK_FALSE(w.dist.has_cached(posts[3]));
  CHECK(w.dist.has_cached(posts[4]));
}

TEST_CASE("ADD with prefetch disabled only advances the cursor") {
  DistributorConfig cfg;
  cfg.p_min = 1;
  cfg.tau_freshness = 5 * kSecond;
  World w(9, cfg);
  ContentName first = w.publish("one");
  w.certify();
  w.net.run_until(1 * kSecond);
  w.client.request(w.dist.id(), first);
  w.net.run_idle();

  ContentName second = w.publish("two");
  w.net.run_until(w.net.now() + 6 * kSecond);
  w.client.request(w.dist.id(), first); // refresh consumes the ADD
  w.net.run_idle();
  CHECK(w.client.replies.back().status == DataStatus::Ok);
  CHECK_FALSE(w.dist.has_cached(second)); // not prefetched
  CHECK(w.net.collect_metrics().tu_commands_applied > 0);
}

TEST_CASE("distributors answer RESOLVE only for folders they cover") {
  World w;
  w.certify();
  FolderName covered = w.alice.feed_folder("fl", "main");
  w.client.resolve(w.dist.id(), covered);
  w.net.run_idle();
  REQUIRE(w.client.resolve_replies.size() == 1);
  CHECK(w.client.resolve_replies[0].status == ResolveStatus::Ok);

  FolderName foreign = parse_folder("ia.bob/fl");
  w.client.resolve(w.dist.id(), foreign);
  w.net.run_idle();
  REQUIRE(w.client.resolve_replies.size() == 2);
  CHECK(w.client.resolve_replies[1].status == ResolveStatus::Rejected);
}

TEST_CASE("a parent-channel refresh applies child-folder invalidations") {
  // The distributor ends up following two channels: the application prefix
  // (for the index) and the feed folder. Refreshing the application-prefix
  // channel consumes the bubbled entries of the feed channel, so the revoked
  // post is purged even though its own channel was not the refresh target.
  DistributorConfig cfg;
  cfg.p_min = 1;
  cfg.tau_freshness = 5 * kSecond;
  World w(11, cfg);
  ContentName post = w.publish("deep");
  ContentName index = w.alice.index_name_of("fl");
  w.certify();
  w.net.run_until(1 * kSecond);

  w.client.request(w.dist.id(), post);
  w.net.run_idle();
  w.client.request(w.dist.id(), index);
  w.net.run_idle();
  REQUIRE(w.dist.has_cached(post));
  REQUIRE(w.dist.has_cached(index));

  w.alice.revoke_access(post, "ia.bob");

  // Request the index after tau: its channel is the application prefix, whose
  // walk drains the bubbled feed-channel entries carrying UPDATE(post, post).
  w.net.run_until(w.net.now() + 6 * kSecond);
  w.client.request(w.dist.id(), index);
  w.net.run_idle();
  CHECK_FALSE(w.dist.has_cached(post));
  CHECK(w.net.collect_metrics().stale_serves == 0);
}

TEST_CASE("each served request makes at most one upstream fetch") {
  DistributorConfig cfg;
  cfg.p_min = 2;
  World w(10, cfg);
  std::vector<ContentName> posts;
  for (int i = 0; i < 4; ++i) {
    posts.push_back(w.publish("p" + std::to_string(i)));
  }
  w.certify();
  w.net.run_until(1 * kSecond);
  for (int round = 0; round < 3; ++round) {
    for (const auto& p : posts) {
      w.client.request(w.dist.id(), p);
      w.net.run_idle();
    }
  }
  Metrics m = w.net.collect_metrics();
  CHECK(m.upstream_per_serve_max <= 1);
  CHECK(m.serves_ok >= 12);
  CHECK(m.stale_serves == 0);
}
