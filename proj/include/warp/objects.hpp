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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "warp/codec.hpp"
#include "warp/kem.hpp"
#include "warp/naming.hpp"

// Network objects: the signed, partially encrypted named unit of content.
// Public fields (name, version, application, signature) are readable by
// anyone; the follower group (secret key, payload links) is sealed under the
// Follower Policy; the distributor group (thread-update name and pointer) is
// sealed under the Distributor Policy. The payload itself is encrypted under
// the follower group's secret key and stored alongside.

namespace warp {

struct FollowerFields {
  crypto::Key256 secret_key{};
  std::optional<ContentName> reference;
  std::optional<ContentName> next;
  std::optional<ContentName> previous;
  std::optional<std::array<std::uint8_t, 16>> segment_seed;
  std::optional<std::uint32_t> number_of_segments;
};

struct DistributorFields {
  ContentName thread_update_name;
  ContentName thread_update_pointer;
};

struct NetworkObject {
  ContentName content_name;
  std::uint64_t version = 1;
  std::string application;
  PolicyCiphertext follower_ct;
  Bytes payload_ct;
  PolicyCiphertext distributor_ct;
  Bytes signature;

  friend bool operator==(const NetworkObject&, const NetworkObject&) = default;
};

namespace detail {

inline Bytes encode_follower_fields(const FollowerFields& f) {
  if (f.segment_seed.has_value() != f.number_of_segments.has_value()) {
    throw MalformedEncoding("segment_seed and number_of_segments must appear together");
  }
  TlvWriter w;
  w.put(1, f.secret_key);
  if (f.reference) {
    w.put_string(2, format_name(*f.reference));
  }
  if (f.next) {
    w.put_string(3, format_name(*f.next));
  }
  if (f.previous) {
    w.put_string(4, format_name(*f.previous));
  }
  if (f.segment_seed) {
    w.put(5, *f.segment_seed);
    w.put_u32(6, *f.number_of_segments);
  }
  return w.take();
}

inline FollowerFields decode_follower_fields(std::span<const std::uint8_t> data) {
  TlvReader r(data);
  FollowerFields f;
  auto sk = r.expect(1);
  if (sk.size() != f.secret_key.size()) {
    throw MalformedEncoding("bad secret key length");
  }
  std::copy(sk.begin(), sk.end(), f.secret_key.begin());
  if (auto v = r.maybe(2)) {
    f.reference = parse_name(TlvReader::as_string(*v));
  }
  if (auto v = r.maybe(3)) {
    f.next = parse_name(TlvReader::as_string(*v));
  }
  if (auto v = r.maybe(4)) {
    f.previous = parse_name(TlvReader::as_string(*v));
  }
  if (auto v = r.maybe(5)) {
    if (v->size() != 16) {
      throw MalformedEncoding("bad segment seed length");
    }
    std::array<std::uint8_t, 16> seed{};
    std::copy(v->begin(), v->end(), seed.begin());
    f.segment_seed = seed;
    f.number_of_segments = TlvReader::as_u32(r.expect(6));
    if (*f.number_of_segments < 1) {
      throw MalformedEncoding("number_of_segments must be >= 1");
    }
  }
  r.expect_done();
  return f;
}

inline Bytes encode_distributor_fields(const DistributorFields& d) {
  TlvWriter w;
  w.put_string(1, format_name(d.thread_update_name));
  w.put_string(2, format_name(d.thread_update_pointer));
  return w.take();
}

inline DistributorFields decode_distributor_fields(std::span<const std::uint8_t> data) {
  TlvReader r(data);
  DistributorFields d;
  d.thread_update_name = parse_name(TlvReader::as_string(r.expect(1)));
  d.thread_update_pointer = parse_name(TlvReader::as_string(r.expect(2)));
  r.expect_done();
  return d;
}

inline Bytes encode_object_impl(const NetworkObject& obj, bool with_signature) {
  TlvWriter w;
  w.put_string(1, format_name(obj.content_name));
  w.put_u64(2, obj.version);
  w.put_string(3, obj.application);
  w.put(4, encode_policy_ciphertext(obj.follower_ct));
  w.put(5, obj.payload_ct);
  w.put(6, encode_policy_ciphertext(obj.distributor_ct));
  w.put(7, with_signature ? std::span<const std::uint8_t>(obj.signature)
                          : std::span<const std::uint8_t>());
  return w.take();
}

} // namespace detail

inline Bytes encode_object(const NetworkObject& obj) {
  return detail::encode_object_impl(obj, true);
}

// Canonical signing input: the full encoding with a zero-length signature.
inline Bytes signable_bytes(const NetworkObject& obj) {
  return detail::encode_object_impl(obj, false);
}

inline NetworkObject decode_object(std::span<const std::uint8_t> data) {
  TlvReader r(data);
  NetworkObject obj;
  obj.content_name = parse_name(TlvReader::as_string(r.expect(1)));
  obj.version = TlvReader::as_u64(r.expect(2));
  if (obj.version < 1) {
    throw MalformedEncoding("version must be >= 1");
  }
  obj.application = TlvReader::as_string(r.expect(3));
  if (obj.application != obj.content_name.application) {
    throw MalformedEncoding("application field disagrees with content name");
  }
  obj.follower_ct = decode_policy_ciphertext(r.expect(4));
  auto payload = r.expect(5);
  obj.payload_ct.assign(payload.begin(), payload.end());
  obj.distributor_ct = decode_policy_ciphertext(r.expect(6));
  auto sig = r.expect(7);
  obj.signature.assign(sig.begin(), sig.end());
  r.expect_done();
  return obj;
}

inline bool verify_object(const NetworkObject& obj,
                          std::span<const std::uint8_t> producer_public_key) {
  return crypto::verify(producer_public_key, signable_bytes(obj), obj.signature);
}

inline FollowerFields open_follower(const NetworkObject& obj, const KeyRing& ring) {
  return detail::decode_follower_fields(decrypt_with_keyring(obj.follower_ct, ring));
}

inline std::optional<FollowerFields> try_open_follower(const NetworkObject& obj,
                                                       const KeyRing& ring,
                                                       DecryptFailure* why = nullptr) {
  auto plain = try_decrypt_with_keyring(obj.follower_ct, ring, why);
  if (!plain) {
    return std::nullopt;
  }
  return detail::decode_follower_fields(*plain);
}

inline Bytes open_payload(const NetworkObject& obj, const FollowerFields& fields) {
  auto payload = crypto::open(fields.secret_key, obj.payload_ct);
  if (!payload) {
    throw IntegrityFailure("payload authentication failed");
  }
  return *payload;
}

inline DistributorFields open_distributor(const NetworkObject& obj, const KeyRing& ring) {
  return detail::decode_distributor_fields(decrypt_with_keyring(obj.distributor_ct, ring));
}

inline std::optional<DistributorFields> try_open_distributor(const NetworkObject& obj,
                                                             const KeyRing& ring) {
  auto plain = try_decrypt_with_keyring(obj.distributor_ct, ring);
  if (!plain) {
    return std::nullopt;
  }
  return detail::decode_distributor_fields(*plain);
}

// ---------------------------------------------------------------------------
// Thread-update commands

struct ThreadUpdateCommand {
  enum class Kind : std::uint8_t { Add = 1, Delete = 2, Update = 3, Cut = 4 };

  Kind kind = Kind::Add;
  ContentName x;
  std::optional<ContentName> y;
  std::optional<ContentName> x_prime;
  std::optional<ContentName> y_prime;

  static ThreadUpdateCommand add(ContentName name) {
    return {Kind::Add, std::move(name), {}, {}, {}};
  }
  static ThreadUpdateCommand remove(ContentName name) {
    return {Kind::Delete, std::move(name), {}, {}, {}};
  }
  static ThreadUpdateCommand update(ContentName old_name, ContentName new_name) {
    return {Kind::Update, std::move(old_name), std::move(new_name), {}, {}};
  }
  static ThreadUpdateCommand cut(ContentName from, ContentName to,
                                 std::optional<ContentName> predecessor,
                                 std::optional<ContentName> successor) {
    return {Kind::Cut, std::move(from), std::move(to), std::move(predecessor),
            std::move(successor)};
  }

  Bytes encode() const {
    TlvWriter w;
    std::array<std::uint8_t, 1> k{static_cast<std::uint8_t>(kind)};
    w.put(1, k);
    w.put_string(2, format_name(x));
    if (y) {
      w.put_string(3, format_name(*y));
    }
    if (x_prime) {
      w.put_string(4, format_name(*x_prime));
    }
    if (y_prime) {
      w.put_string(5, format_name(*y_prime));
    }
    return w.take();
  }

  static ThreadUpdateCommand decode(std::span<const std::uint8_t> data) {
    TlvReader r(data);
    auto k = r.expect(1);
    if (k.size() != 1 || k[0] < 1 || k[0] > 4) {
      throw MalformedEncoding("bad thread-update command kind");
    }
    ThreadUpdateCommand cmd;
    cmd.kind = static_cast<Kind>(k[0]);
    cmd.x = parse_name(TlvReader::as_string(r.expect(2)));
    if (auto v = r.maybe(3)) {
      cmd.y = parse_name(TlvReader::as_string(*v));
    }
    if (auto v = r.maybe(4)) {
      cmd.x_prime = parse_name(TlvReader::as_string(*v));
    }
    if (auto v = r.maybe(5)) {
      cmd.y_prime = parse_name(TlvReader::as_string(*v));
    }
    r.expect_done();
    if (cmd.kind == Kind::Update && !cmd.y) {
      throw MalformedEncoding("UPDATE needs a replacement name");
    }
    if (cmd.kind == Kind::Cut && !cmd.y) {
      throw MalformedEncoding("CUT needs a range end");
    }
    return cmd;
  }

  std::string to_string() const {
    auto opt = [](const std::optional<ContentName>& n) {
      return n ? format_name(*n) : std::string("-");
    };
    switch (kind) {
    case Kind::Add:
      return "ADD(" + format_name(x) + ")";
    case Kind::Delete:
      return "DELETE(" + format_name(x) + ")";
    case Kind::Update:
      return "UPDATE(" + format_name(x) + "," + opt(y) + ")";
    case Kind::Cut:
      return "CUT(" + format_name(x) + "," + opt(y) + "," + opt(x_prime) + "," +
             opt(y_prime) + ")";
    }
    return {};
  }

  friend bool operator==(const ThreadUpdateCommand&, const ThreadUpdateCommand&) = default;
};

// ---------------------------------------------------------------------------
// Building

struct ObjectLinks {
  std::optional<ContentName> reference;
  std::optional<ContentName> next;
  std::optional<ContentName> previous;
  std::optional<std::array<std::uint8_t, 16>> segment_seed;
  std::optional<std::uint32_t> number_of_segments;
};

// Thread-update channel reference carried in the distributor group: the
// channel's head entry (its stable name) and the latest entry at build time.
struct TuRef {
  ContentName name;
  ContentName pointer;
};

class ObjectBuilder {
public:
  ObjectBuilder(const crypto::Identity& producer, const AttributeAuthority& authority,
                Rng& rng)
      : producer_(&producer), authority_(&authority), rng_(&rng) {}

  const crypto::Identity& producer() const { return *producer_; }
  const AttributeAuthority& authority() const { return *authority_; }
  Rng& rng() const { return *rng_; }

  NetworkObject build(const ContentName& name, std::span<const std::uint8_t> payload,
                      const Policy& fp, std::uint64_t fp_epoch, const Policy& dp,
                      const ObjectLinks& links, const TuRef& tu,
                      std::uint64_t version = 1) const {
    if (name.producer() != producer_->qualified()) {
      throw NameNotOwned("cannot sign content named under " + name.producer());
    }
    NetworkObject obj;
    obj.content_name = name;
    obj.version = version;
    obj.application = name.application;

    FollowerFields fields;
    rng_->fill(fields.secret_key);
    fields.reference = links.reference;
    fields.next = links.next;
    fields.previous = links.previous;
    fields.segment_seed = links.segment_seed;
    fields.number_of_segments = links.number_of_segments;

    obj.payload_ct = crypto::seal(fields.secret_key, *rng_, payload);
    obj.follower_ct = encrypt_with_policy(detail::encode_follower_fields(fields), fp,
                                          fp_epoch, *authority_, *rng_);
    obj.distributor_ct = encrypt_with_policy(
        detail::encode_distributor_fields(DistributorFields{tu.name, tu.pointer}), dp,
        kDistributorEpoch, *authority_, *rng_);
    obj.signature = crypto::sign(producer_->keys.secret_key, signable_bytes(obj));
    return obj;
  }

private:
  const crypto::Identity* producer_;
  const AttributeAuthority* authority_;
  Rng* rng_;
};

// ---------------------------------------------------------------------------
// Feeds

// Owner-side state of one feed: the ordered chain of entries with their
// plaintext payloads and versions. Mutations return the re-built objects and
// the thread-update commands the owner must emit. Objects themselves are
// immutable once signed; every change is a re-issue.
class FeedBook {
public:
  FeedBook() = default;
  FeedBook(FolderName folder, Policy fp, Policy dp)
      : folder_(std::move(folder)), fp_(std::move(fp)), dp_(std::move(dp)) {}

  struct BuildContext {
    const ObjectBuilder* builder;
    std::uint64_t fp_epoch;
    TuRef tu;
  };

  const FolderName& folder() const { return folder_; }
  const Policy& follower_policy() const { return fp_; }
  const Policy& distributor_policy() const { return dp_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  const ContentName& head() const { return entries_.front().name; }
  const ContentName& tail() const { return entries_.back().name; }

  std::vector<ContentName> names() const {
    std::vector<ContentName> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) {
      out.push_back(e.name);
    }
    return out;
  }

  bool contains(const ContentName& name) const { return index_of(name).has_value(); }

  const Bytes& payload_of(const ContentName& name) const {
    auto i = index_of(name);
    if (!i) {
      throw NotInFeed(format_name(name) + " is not in this feed");
    }
    return entries_[*i].payload;
  }

  struct AppendResult {
    ContentName entry_name;
    std::vector<NetworkObject> built; // re-issued old tail (if any), then the new entry
  };

  struct AppendOptions {
    std::optional<Policy> fp_override;
    std::optional<ContentName> expected_tail; // must name the tail when given
    std::optional<ContentName> forced_name;   // channel bootstrap hook
    std::optional<ContentName> reference;
  };

  // Appends after the current tail; appending "after" an interior entry is
  // rejected.
  AppendResult append(const BuildContext& ctx, std::span<const std::uint8_t> payload,
                      AppendOptions options = {}) {
    if (options.expected_tail && (entries_.empty() || *options.expected_tail != tail())) {
      throw NotTail("append target is not the feed tail");
    }
    Entry e;
    e.name = options.forced_name ? *options.forced_name
                                 : make_name(folder_, generate_segment(ctx.builder->rng()));
    e.payload.assign(payload.begin(), payload.end());
    e.fp_override = std::move(options.fp_override);
    e.reference = std::move(options.reference);
    entries_.push_back(std::move(e));

    AppendResult result;
    result.entry_name = entries_.back().name;
    if (entries_.size() > 1) {
      std::size_t old_tail = entries_.size() - 2;
      bump(old_tail);
      result.built.push_back(build_at(ctx, old_tail));
    }
    result.built.push_back(build_at(ctx, entries_.size() - 1));
    return result;
  }

  struct CutResult {
    ThreadUpdateCommand command;
    std::vector<ContentName> removed;
    std::vector<NetworkObject> built; // re-issued predecessor and/or successor
  };

  CutResult cut(const BuildContext& ctx, const ContentName& from, const ContentName& to) {
    auto i = index_of(from);
    auto j = index_of(to);
    if (!i || !j) {
      throw NotInFeed("cut endpoint not in feed");
    }
    if (*i > *j) {
      throw OrderViolation("cut range is reversed");
    }
    CutResult result;
    for (std::size_t k = *i; k <= *j; ++k) {
      result.removed.push_back(entries_[k].name);
    }
    std::optional<ContentName> pred =
        *i > 0 ? std::optional(entries_[*i - 1].name) : std::nullopt;
    std::optional<ContentName> succ =
        *j + 1 < entries_.size() ? std::optional(entries_[*j + 1].name) : std::nullopt;
    entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(*i),
                   entries_.begin() + static_cast<std::ptrdiff_t>(*j) + 1);
    if (pred) {
      std::size_t p = *index_of(*pred);
      bump(p);
      result.built.push_back(build_at(ctx, p));
    }
    if (succ) {
      std::size_t s = *index_of(*succ);
      bump(s);
      result.built.push_back(build_at(ctx, s));
    }
    result.command = ThreadUpdateCommand::cut(from, to, pred, succ);
    return result;
  }

  struct ReplaceResult {
    ContentName new_name;
    std::vector<NetworkObject> built;          // new entry, then repaired neighbors
    std::vector<ThreadUpdateCommand> commands; // UPDATE(x,y) [+ successor repair]
  };

  // UPDATE semantics: the entry is re-issued under a fresh anonymized name
  // with version+1 linking the lineage. The successor's previous link changes,
  // so it is re-issued and announced; the predecessor only changes its next
  // link, which backward traversal never reads, so its re-issue is silent.
  ReplaceResult replace(const BuildContext& ctx, const ContentName& name,
                        std::span<const std::uint8_t> new_payload) {
    auto i = index_of(name);
    if (!i) {
      throw NotInFeed(format_name(name) + " is not in this feed");
    }
    ReplaceResult result;
    Entry& entry = entries_[*i];
    result.new_name = make_name(folder_, generate_segment(ctx.builder->rng()));
    entry.name = result.new_name;
    entry.payload.assign(new_payload.begin(), new_payload.end());
    entry.version += 1;
    result.built.push_back(build_at(ctx, *i));
    result.commands.push_back(ThreadUpdateCommand::update(name, result.new_name));
    if (*i > 0) {
      bump(*i - 1);
      result.built.push_back(build_at(ctx, *i - 1));
    }
    if (*i + 1 < entries_.size()) {
      bump(*i + 1);
      result.built.push_back(build_at(ctx, *i + 1));
      result.commands.push_back(
          ThreadUpdateCommand::update(entries_[*i + 1].name, entries_[*i + 1].name));
    }
    return result;
  }

  struct RemoveResult {
    std::vector<NetworkObject> built;          // repaired neighbors
    std::vector<ThreadUpdateCommand> commands; // DELETE(x) [+ successor repair]
  };

  RemoveResult remove(const BuildContext& ctx, const ContentName& name) {
    auto i = index_of(name);
    if (!i) {
      throw NotInFeed(format_name(name) + " is not in this feed");
    }
    entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(*i));
    RemoveResult result;
    result.commands.push_back(ThreadUpdateCommand::remove(name));
    if (*i > 0) {
      bump(*i - 1);
      result.built.push_back(build_at(ctx, *i - 1));
    }
    if (*i < entries_.size()) {
      bump(*i);
      result.built.push_back(build_at(ctx, *i));
      result.commands.push_back(
          ThreadUpdateCommand::update(entries_[*i].name, entries_[*i].name));
    }
    return result;
  }

  // Re-issue of a single entry in place (same name, version+1), e.g. after a
  // policy rewrite.
  NetworkObject reissue(const BuildContext& ctx, const ContentName& name,
                        std::optional<Policy> fp_override = std::nullopt) {
    auto i = index_of(name);
    if (!i) {
      throw NotInFeed(format_name(name) + " is not in this feed");
    }
    if (fp_override) {
      entries_[*i].fp_override = std::move(fp_override);
    }
    bump(*i);
    return build_at(ctx, *i);
  }

  void set_follower_policy(Policy fp) { fp_ = std::move(fp); }

  void set_entry_policy(const ContentName& name, Policy fp) {
    auto i = index_of(name);
    if (!i) {
      throw NotInFeed(format_name(name) + " is not in this feed");
    }
    entries_[*i].fp_override = std::move(fp);
  }

  const Policy& entry_policy(const ContentName& name) const {
    auto i = index_of(name);
    if (!i) {
      throw NotInFeed(format_name(name) + " is not in this feed");
    }
    return entries_[*i].fp_override ? *entries_[*i].fp_override : fp_;
  }

  std::uint64_t version_of(const ContentName& name) const {
    auto i = index_of(name);
    if (!i) {
      throw NotInFeed(format_name(name) + " is not in this feed");
    }
    return entries_[*i].version;
  }

private:
  struct Entry {
    ContentName name;
    Bytes payload;
    std::uint64_t version = 1;
    std::optional<Policy> fp_override;
    std::optional<ContentName> reference;
  };

  std::optional<std::size_t> index_of(const ContentName& name) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].name == name) {
        return i;
      }
    }
    return std::nullopt;
  }

  void bump(std::size_t i) { entries_[i].version += 1; }

  NetworkObject build_at(const BuildContext& ctx, std::size_t i) const {
    const Entry& e = entries_[i];
    ObjectLinks links;
    links.reference = e.reference;
    if (i > 0) {
      links.previous = entries_[i - 1].name;
    }
    if (i + 1 < entries_.size()) {
      links.next = entries_[i + 1].name;
    }
    const Policy& fp = e.fp_override ? *e.fp_override : fp_;
    return ctx.builder->build(e.name, e.payload, fp, ctx.fp_epoch, dp_, links, ctx.tu,
                              e.version);
  }

  FolderName folder_;
  Policy fp_;
  Policy dp_;
  std::vector<Entry> entries_;
};

// Full-chain walks used to check doubly-linked consistency from the outside
// (through real decryption, not owner state).
using ObjectLookup = std::function<const NetworkObject*(const ContentName&)>;

inline std::vector<ContentName> walk_feed(const ObjectLookup& lookup, ContentName start,
                                          const KeyRing& ring, bool forward) {
  std::vector<ContentName> visited;
  std::optional<ContentName> cursor = std::move(start);
  while (cursor) {
    const NetworkObject* obj = lookup(*cursor);
    if (!obj) {
      break;
    }
    visited.push_back(*cursor);
    FollowerFields fields = open_follower(*obj, ring);
    cursor = forward ? fields.next : fields.previous;
  }
  return visited;
}

inline bool feed_well_formed(const ObjectLookup& lookup, const ContentName& head,
                             const ContentName& tail, const KeyRing& ring) {
  // Exactly one head and one tail, and next/previous must mirror each other.
  std::vector<ContentName> fwd = walk_feed(lookup, head, ring, true);
  std::vector<ContentName> bwd = walk_feed(lookup, tail, ring, false);
  if (fwd.empty() || fwd.back() != tail || bwd.front() != tail || bwd.back() != head) {
    return false;
  }
  if (fwd.size() != bwd.size()) {
    return false;
  }
  for (std::size_t i = 0; i < fwd.size(); ++i) {
    if (fwd[i] != bwd[bwd.size() - 1 - i]) {
      return false;
    }
  }
  const NetworkObject* h = lookup(head);
  const NetworkObject* t = lookup(tail);
  if (!h || !t) {
    return false;
  }
  if (open_follower(*h, ring).previous || open_follower(*t, ring).next) {
    return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Fragmented files

inline std::string fragment_segment(std::span<const std::uint8_t> seed, std::uint32_t i) {
  if (i < 1) {
    throw Error("fragment indices are 1-based");
  }
  Bytes input(seed.begin(), seed.end());
  input.push_back(static_cast<std::uint8_t>(i >> 24));
  input.push_back(static_cast<std::uint8_t>(i >> 16));
  input.push_back(static_cast<std::uint8_t>(i >> 8));
  input.push_back(static_cast<std::uint8_t>(i));
  // First 32 hex chars of the deployment hash (BLAKE2b-256).
  return to_hex(crypto::hash(input)).substr(0, kSegmentChars);
}

struct FragmentSet {
  FolderName folder;
  std::array<std::uint8_t, 16> seed{};
  std::uint32_t count = 0;

  ContentName name_of(std::uint32_t i) const {
    return make_name(folder, fragment_segment(seed, i));
  }
};

struct FragmentedFile {
  FragmentSet set;
  std::vector<NetworkObject> objects;
};

inline FragmentedFile fragment_file(const ObjectBuilder& builder,
                                    std::span<const std::uint8_t> data,
                                    std::size_t chunk_size, const FolderName& folder,
                                    const std::array<std::uint8_t, 16>& seed,
                                    const Policy& fp, std::uint64_t fp_epoch,
                                    const Policy& dp, const TuRef& tu) {
  if (data.empty()) {
    throw EmptyData("cannot fragment an empty payload");
  }
  if (chunk_size < 1) {
    throw Error("chunk size must be >= 1");
  }
  FragmentedFile out;
  out.set.folder = folder;
  out.set.seed = seed;
  out.set.count = static_cast<std::uint32_t>((data.size() + chunk_size - 1) / chunk_size);
  for (std::uint32_t i = 1; i <= out.set.count; ++i) {
    std::size_t offset = static_cast<std::size_t>(i - 1) * chunk_size;
    std::span<const std::uint8_t> chunk =
        data.subspan(offset, std::min(chunk_size, data.size() - offset));
    ObjectLinks links;
    links.segment_seed = seed;
    links.number_of_segments = out.set.count;
    out.objects.push_back(
        builder.build(out.set.name_of(i), chunk, fp, fp_epoch, dp, links, tu));
  }
  return out;
}

inline Bytes reassemble_fragments(const std::map<std::uint32_t, Bytes>& chunks) {
  if (chunks.empty()) {
    throw EmptyData("no fragments to reassemble");
  }
  Bytes out;
  std::uint32_t expected = 1;
  for (const auto& [i, chunk] : chunks) {
    if (i != expected++) {
      throw NotFound("missing fragment " + std::to_string(expected - 1));
    }
    out.insert(out.end(), chunk.begin(), chunk.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Index objects

inline Bytes encode_index_entries(const std::map<std::string, ContentName>& entries) {
  TlvWriter w;
  for (const auto& [label, name] : entries) {
    w.put_string(1, label);
    w.put_string(2, format_name(name));
  }
  return w.take();
}

inline std::map<std::string, ContentName> decode_index_entries(
    std::span<const std::uint8_t> data) {
  TlvReader r(data);
  std::map<std::string, ContentName> out;
  while (!r.done()) {
    std::string label = TlvReader::as_string(r.expect(1));
    if (label.empty()) {
      throw MalformedEncoding("empty index label");
    }
    out[label] = parse_name(TlvReader::as_string(r.expect(2)));
  }
  return out;
}

} // namespace warp
