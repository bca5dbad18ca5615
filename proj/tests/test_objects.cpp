#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "warp/certificate.hpp"
#include "warp/objects.hpp"

using namespace warp;

namespace {

struct Fixture {
  Fixture()
      : rng(101),
        ia(crypto::derive_key({}, "test-ia")),
        alice(ia.issue("ia", "alice", crypto::derive_key({}, "alice-seed"))),
        authority("ia.alice", crypto::derive_key({}, "alice-master"), AuthorityConfig{}),
        builder(alice, authority, rng) {}

  KeyRing follower_ring(std::initializer_list<std::string> attrs, std::uint64_t epoch) {
    KeyRing ring(authority.owner());
    for (const auto& a : attrs) {
      ring.insert(AttributeKey{a, epoch, 30 * kDay, authority.key_material(a, epoch)});
    }
    return ring;
  }

  TuRef tu() {
    FolderName folder = parse_folder("ia.alice/fl");
    ContentName head = make_name(tu_folder_of(folder), std::string(32, '1'));
    return TuRef{head, head};
  }

  NetworkObject sample(std::string_view payload, const ObjectLinks& links = {}) {
    ContentName name = parse_name("ia.alice/fl/" + std::string(32, '2'));
    return builder.build(name, to_bytes(payload), Policy::leaf("friend"), 1,
                         Policy::leaf("dist:fl"), links, tu());
  }

  Rng rng;
  crypto::IdentityAuthority ia;
  crypto::Identity alice;
  AttributeAuthority authority;
  ObjectBuilder builder;
};

} // namespace

TEST_CASE("a satisfying ring recovers payload and links") {
  Fixture fx;
  ObjectLinks links;
  links.reference = parse_name("ia.alice/fl/" + std::string(32, '3'));
  NetworkObject obj = fx.sample("hi bob", links);

  KeyRing ring = fx.follower_ring({"friend"}, 1);
  FollowerFields fields = open_follower(obj, ring);
  CHECK(open_payload(obj, fields) == to_bytes("hi bob"));
  CHECK(fields.reference == links.reference);
  CHECK_FALSE(fields.next.has_value());
}

TEST_CASE("a non-satisfying ring sees public fields only") {
  Fixture fx;
  NetworkObject obj = fx.sample("secret");
  CHECK(obj.content_name.application == "fl");
  CHECK(obj.version == 1);

  KeyRing stranger = fx.follower_ring({"colleague"}, 1);
  CHECK_FALSE(try_open_follower(obj, stranger).has_value());
  CHECK_THROWS_AS(open_follower(obj, stranger), AccessDenied);
}

TEST_CASE("a distributor-only ring reads TU fields but not the payload") {
  Fixture fx;
  NetworkObject obj = fx.sample("secret");
  KeyRing dist(fx.authority.owner());
  dist.insert(AttributeKey{"dist:fl", kDistributorEpoch, 365 * kDay,
                           fx.authority.key_material("dist:fl", kDistributorEpoch)});
  DistributorFields fields = open_distributor(obj, dist);
  CHECK(fields.thread_update_name == fx.tu().name);
  CHECK(fields.thread_update_pointer == fx.tu().pointer);
  CHECK_FALSE(try_open_follower(obj, dist).has_value());
}

TEST_CASE("building under a foreign name is rejected") {
  Fixture fx;
  ContentName foreign = parse_name("ia.bob/fl/" + std::string(32, '2'));
  CHECK_THROWS_AS(fx.builder.build(foreign, to_bytes("x"), Policy::leaf("friend"), 1,
                                   Policy::leaf("d"), {}, fx.tu()),
                  NameNotOwned);
}

TEST_CASE("object encoding is canonical and round-trips") {
  Fixture fx;
  Rng rng(55);
  for (int i = 0; i < 50; ++i) {
    ObjectLinks links;
    if (rng.below(2)) {
      links.previous = parse_name("ia.alice/fl/" + generate_segment(rng));
    }
    if (rng.below(2)) {
      links.next = parse_name("ia.alice/fl/" + generate_segment(rng));
    }
    if (rng.below(3) == 0) {
      links.segment_seed = rng.array<16>();
      links.number_of_segments = static_cast<std::uint32_t>(1 + rng.below(9));
    }
    ContentName name = parse_name("ia.alice/fl/" + generate_segment(rng));
    NetworkObject obj =
        fx.builder.build(name, rng.bytes(rng.below(64)), Policy::leaf("friend"), 1,
                         Policy::leaf("dist:fl"), links, fx.tu());
    Bytes wire = encode_object(obj);
    NetworkObject back = decode_object(wire);
    CHECK(back == obj);
    CHECK(encode_object(back) == wire); // byte-identical re-encoding
  }
}

TEST_CASE("truncated or corrupted encodings are rejected") {
  Fixture fx;
  Bytes wire = encode_object(fx.sample("x"));
  for (std::size_t cut : {std::size_t(1), wire.size() / 2, wire.size() - 1}) {
    Bytes truncated(wire.begin(), wire.begin() + static_cast<std::ptrdiff_t>(cut));
    CHECK_THROWS_AS(decode_object(truncated), MalformedEncoding);
  }
  Bytes reordered = wire;
  reordered[0] = 9; // unknown leading field id
  CHECK_THROWS_AS(decode_object(reordered), MalformedEncoding);
}

TEST_CASE("signatures detect any mutation of the canonical bytes") {
  Fixture fx;
  NetworkObject obj = fx.sample("signed");
  CHECK(verify_object(obj, fx.alice.keys.public_key));

  NetworkObject tampered = obj;
  tampered.version += 1;
  CHECK_FALSE(verify_object(tampered, fx.alice.keys.public_key));

  NetworkObject payload_flip = obj;
  payload_flip.payload_ct[0] ^= 0x80;
  CHECK_FALSE(verify_object(payload_flip, fx.alice.keys.public_key));

  crypto::Identity other = fx.ia.issue("ia", "bob", crypto::derive_key({}, "bob-seed"));
  CHECK_FALSE(verify_object(obj, other.keys.public_key));
}

namespace {

FeedBook::BuildContext ctx_of(Fixture& fx, TuRef tu) {
  return FeedBook::BuildContext{&fx.builder, 1, std::move(tu)};
}

struct StoreMap {
  std::map<ContentName, NetworkObject> objects;

  void put(const std::vector<NetworkObject>& built) {
    for (const auto& o : built) {
      objects[o.content_name] = o;
    }
  }
  void erase(const std::vector<ContentName>& names) {
    for (const auto& n : names) {
      objects.erase(n);
    }
  }
  ObjectLookup lookup() const {
    return [this](const ContentName& n) -> const NetworkObject* {
      auto it = objects.find(n);
      return it == objects.end() ? nullptr : &it->second;
    };
  }
};

} // namespace

TEST_CASE("appending links the new entry behind the old tail") {
  Fixture fx;
  FeedBook feed(parse_folder("ia.alice/fl"), Policy::leaf("friend"), Policy::leaf("d"));
  StoreMap store;
  auto first = feed.append(ctx_of(fx, fx.tu()), to_bytes("one"));
  store.put(first.built);
  auto second = feed.append(ctx_of(fx, fx.tu()), to_bytes("two"));
  store.put(second.built);

  KeyRing ring = fx.follower_ring({"friend"}, 1);
  FollowerFields head = open_follower(store.objects.at(first.entry_name), ring);
  FollowerFields tail = open_follower(store.objects.at(second.entry_name), ring);
  CHECK(head.next == second.entry_name);
  CHECK(tail.previous == first.entry_name);
  CHECK_FALSE(head.previous.has_value());
  CHECK_FALSE(tail.next.has_value());
  CHECK(store.objects.at(first.entry_name).version == 2); // re-issued tail

  CHECK_THROWS_AS(feed.append(ctx_of(fx, fx.tu()), to_bytes("three"),
                              {.expected_tail = first.entry_name}),
                  NotTail);
}

TEST_CASE("random feeds stay doubly-linked under append and cut") {
  Fixture fx;
  Rng rng(77);
  for (int round = 0; round < 40; ++round) {
    FeedBook feed(parse_folder("ia.alice/fl"), Policy::leaf("friend"), Policy::leaf("d"));
    StoreMap store;
    int entries = 2 + static_cast<int>(rng.below(8));
    for (int i = 0; i < entries; ++i) {
      store.put(feed.append(ctx_of(fx, fx.tu()), rng.bytes(8)).built);
    }
    KeyRing ring = fx.follower_ring({"friend"}, 1);
    REQUIRE(feed_well_formed(store.lookup(), feed.head(), feed.tail(), ring));

    // Forward then backward traversal visit the same names in reverse.
    auto fwd = walk_feed(store.lookup(), feed.head(), ring, true);
    auto bwd = walk_feed(store.lookup(), feed.tail(), ring, false);
    REQUIRE(fwd.size() == bwd.size());
    for (std::size_t i = 0; i < fwd.size(); ++i) {
      CHECK(fwd[i] == bwd[bwd.size() - 1 - i]);
    }

    // Cut a random interior range; removed names must disappear from walks.
    auto names = feed.names();
    std::size_t i = rng.below(names.size());
    std::size_t j = i + rng.below(names.size() - i);
    auto cut = feed.cut(ctx_of(fx, fx.tu()), names[i], names[j]);
    store.erase(cut.removed);
    store.put(cut.built);
    if (!feed.names().empty()) {
      REQUIRE(feed_well_formed(store.lookup(), feed.head(), feed.tail(), ring));
      auto after = walk_feed(store.lookup(), feed.head(), ring, true);
      for (const auto& removed : cut.removed) {
        CHECK(std::find(after.begin(), after.end(), removed) == after.end());
      }
    }
  }
}

TEST_CASE("cutting the middle entry bridges head and tail") {
  Fixture fx;
  FeedBook feed(parse_folder("ia.alice/fl"), Policy::leaf("friend"), Policy::leaf("d"));
  StoreMap store;
  store.put(feed.append(ctx_of(fx, fx.tu()), to_bytes("a")).built);
  auto mid = feed.append(ctx_of(fx, fx.tu()), to_bytes("b"));
  store.put(mid.built);
  store.put(feed.append(ctx_of(fx, fx.tu()), to_bytes("c")).built);

  auto cut = feed.cut(ctx_of(fx, fx.tu()), mid.entry_name, mid.entry_name);
  store.erase(cut.removed);
  store.put(cut.built);

  KeyRing ring = fx.follower_ring({"friend"}, 1);
  CHECK(open_follower(store.objects.at(feed.head()), ring).next == feed.tail());
  CHECK(open_follower(store.objects.at(feed.tail()), ring).previous == feed.head());
  CHECK(cut.command.kind == ThreadUpdateCommand::Kind::Cut);
  CHECK(cut.command.x_prime == feed.head());
  CHECK(cut.command.y_prime == feed.tail());
}

TEST_CASE("cutting the head leaves no predecessor re-issue") {
  Fixture fx;
  FeedBook feed(parse_folder("ia.alice/fl"), Policy::leaf("friend"), Policy::leaf("d"));
  auto first = feed.append(ctx_of(fx, fx.tu()), to_bytes("a"));
  feed.append(ctx_of(fx, fx.tu()), to_bytes("b"));
  auto cut = feed.cut(ctx_of(fx, fx.tu()), first.entry_name, first.entry_name);
  CHECK_FALSE(cut.command.x_prime.has_value());
  REQUIRE(cut.command.y_prime.has_value());
  CHECK(*cut.command.y_prime == feed.head());

  CHECK_THROWS_AS(feed.cut(ctx_of(fx, fx.tu()), first.entry_name, first.entry_name),
                  NotInFeed);
}

TEST_CASE("cut rejects reversed ranges") {
  Fixture fx;
  FeedBook feed(parse_folder("ia.alice/fl"), Policy::leaf("friend"), Policy::leaf("d"));
  auto a = feed.append(ctx_of(fx, fx.tu()), to_bytes("a"));
  auto b = feed.append(ctx_of(fx, fx.tu()), to_bytes("b"));
  CHECK_THROWS_AS(feed.cut(ctx_of(fx, fx.tu()), b.entry_name, a.entry_name),
                  OrderViolation);
}

TEST_CASE("replacing an entry renames it and repairs the neighbors") {
  Fixture fx;
  FeedBook feed(parse_folder("ia.alice/fl"), Policy::leaf("friend"), Policy::leaf("d"));
  StoreMap store;
  store.put(feed.append(ctx_of(fx, fx.tu()), to_bytes("a")).built);
  auto mid = feed.append(ctx_of(fx, fx.tu()), to_bytes("b"));
  store.put(mid.built);
  store.put(feed.append(ctx_of(fx, fx.tu()), to_bytes("c")).built);

  std::uint64_t before = feed.version_of(mid.entry_name);
  auto replaced = feed.replace(ctx_of(fx, fx.tu()), mid.entry_name, to_bytes("b2"));
  store.erase({mid.entry_name});
  store.put(replaced.built);

  CHECK(replaced.new_name != mid.entry_name);
  CHECK(feed.version_of(replaced.new_name) == before + 1);
  REQUIRE(replaced.commands.size() == 2);
  CHECK(replaced.commands[0] ==
        ThreadUpdateCommand::update(mid.entry_name, replaced.new_name));
  KeyRing ring = fx.follower_ring({"friend"}, 1);
  CHECK(feed_well_formed(store.lookup(), feed.head(), feed.tail(), ring));
  CHECK(feed.payload_of(replaced.new_name) == to_bytes("b2"));
}

TEST_CASE("fragmenting splits payloads into seeded chunks") {
  Fixture fx;
  std::array<std::uint8_t, 16> seed{};
  FolderName folder = parse_folder("ia.alice/fl/" + std::string(32, '4'));
  Bytes data = to_bytes("0123456789");
  FragmentedFile file =
      fragment_file(fx.builder, data, 4, folder, seed, Policy::leaf("friend"), 1,
                    Policy::leaf("d"), fx.tu());
  REQUIRE(file.set.count == 3);
  REQUIRE(file.objects.size() == 3);

  KeyRing ring = fx.follower_ring({"friend"}, 1);
  std::map<std::uint32_t, Bytes> chunks;
  for (std::uint32_t i = 1; i <= file.set.count; ++i) {
    const NetworkObject& obj = file.objects[i - 1];
    CHECK(obj.content_name == file.set.name_of(i));
    CHECK(folder_of(obj.content_name) == folder);
    FollowerFields fields = open_follower(obj, ring);
    REQUIRE(fields.segment_seed.has_value());
    CHECK(*fields.segment_seed == seed);
    CHECK(*fields.number_of_segments == 3);
    chunks[i] = open_payload(obj, fields);
  }
  CHECK(chunks[1].size() == 4);
  CHECK(chunks[2].size() == 4);
  CHECK(chunks[3].size() == 2);
  CHECK(reassemble_fragments(chunks) == data);

  CHECK_THROWS_AS(fragment_file(fx.builder, {}, 4, folder, seed, Policy::leaf("friend"),
                                1, Policy::leaf("d"), fx.tu()),
                  EmptyData);
}

TEST_CASE("fragment reassembly is the identity on random payloads") {
  Fixture fx;
  Rng rng(13);
  for (int round = 0; round < 30; ++round) {
    Bytes data = rng.bytes(1 + rng.below(300));
    std::size_t chunk = 1 + rng.below(48);
    auto seed = rng.array<16>();
    FolderName folder = parse_folder("ia.alice/fl/" + generate_segment(rng));
    FragmentedFile file = fragment_file(fx.builder, data, chunk, folder, seed,
                                        Policy::leaf("friend"), 1, Policy::leaf("d"),
                                        fx.tu());
    KeyRing ring = fx.follower_ring({"friend"}, 1);
    std::map<std::uint32_t, Bytes> chunks;
    for (std::uint32_t i = 1; i <= file.set.count; ++i) {
      FollowerFields fields = open_follower(file.objects[i - 1], ring);
      chunks[i] = open_payload(file.objects[i - 1], fields);
    }
    CHECK(reassemble_fragments(chunks) == data);
  }
}

TEST_CASE("fragment names are deterministic in seed and index") {
  std::array<std::uint8_t, 16> zero{};
  CHECK(fragment_segment(zero, 1) == fragment_segment(zero, 1));
  CHECK(fragment_segment(zero, 1) != fragment_segment(zero, 2));
  // Pinned for BLAKE2b-256 over seed || be32(i).
  CHECK(fragment_segment(zero, 1) == "e847ea8ee0ae7b1c5e8c1c9564cc31ae");
  CHECK(is_valid_segment(fragment_segment(zero, 7)));
  CHECK_THROWS_AS(fragment_segment(zero, 0), Error);
}

TEST_CASE("index payloads map labels to names") {
  std::map<std::string, ContentName> entries{
      {"latest", parse_name("ia.alice/fl/" + std::string(32, '5'))},
      {"about", parse_name("ia.alice/fl/" + std::string(32, '6'))},
  };
  Bytes wire = encode_index_entries(entries);
  CHECK(decode_index_entries(wire) == entries);
  CHECK(encode_index_entries(decode_index_entries(wire)) == wire);
  CHECK(decode_index_entries({}).empty()); // empty directory is allowed
}

TEST_CASE("thread-update commands round-trip through their encoding") {
  ContentName x = parse_name("ia.alice/fl/" + std::string(32, '7'));
  ContentName y = parse_name("ia.alice/fl/" + std::string(32, '8'));
  for (const ThreadUpdateCommand& cmd : {
           ThreadUpdateCommand::add(x),
           ThreadUpdateCommand::remove(x),
           ThreadUpdateCommand::update(x, y),
           ThreadUpdateCommand::cut(x, y, std::nullopt, std::nullopt),
           ThreadUpdateCommand::cut(x, y, x, y),
       }) {
    CHECK(ThreadUpdateCommand::decode(cmd.encode()) == cmd);
  }
  CHECK(ThreadUpdateCommand::update(x, y).to_string() ==
        "UPDATE(" + format_name(x) + "," + format_name(y) + ")");
}

TEST_CASE("distribution certificates verify and round-trip") {
  Fixture fx;
  DistributionCertificate cert;
  cert.identity = "ia.alice";
  cert.folder = parse_folder("ia.alice/fl");
  cert.distributors = {"ia.d1", "ia.d2"};
  cert.distributor_keys = {fx.authority.make_key("dist:fl", kDistributorEpoch, 0)};
  cert.expiry = 3 * kDay;
  sign_certificate(cert, fx.alice.keys.secret_key);

  CHECK(verify_certificate(cert, fx.alice.keys.public_key));
  DistributionCertificate back = decode_certificate(encode_certificate(cert));
  CHECK(back == cert);
  CHECK(verify_certificate(back, fx.alice.keys.public_key));

  DistributionCertificate forged = cert;
  forged.expiry += 1;
  CHECK_FALSE(verify_certificate(forged, fx.alice.keys.public_key));
}
