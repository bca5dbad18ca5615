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

#include <deque>
#include <functional>

#include "warp/certificate.hpp"
#include "warp/netsim.hpp"

// The butler: a user's authoritative node. It owns the social graph, stores
// and signs all of the user's content, emits thread-update commands for every
// mutation, answers RESOLVE/KEY_REQUEST/NOTIFY traffic, grants distribution
// certificates, and exposes the application-facing CRUD/publish surface. It
// is also the consumer engine for fetching other users' content.

namespace warp {

struct ButlerConfig {
  int bucket_count = 16;          // K
  bool eager_reencrypt = false;   // default lazy: re-encrypt on the next request
  SimTime key_lifetime = 7 * kDay;
  int retention_epochs = 2;
  SimTime request_timeout = 30 * kSecond;
  SimTime route_ttl = kHour;      // TTL handed out in RESOLVE replies
  SimTime popularity_window = kHour;
};

class Butler : public Node {
public:
  using NotifyPredicate =
      std::function<bool(const std::string& sender, const ContentName& name)>;

  Butler(SimNetwork& net, NodeId id, std::string label, std::string ia_name,
         std::string user, ButlerConfig config = {})
      : Node(net, id, std::move(label)), config_(config),
        identity_(net.make_identity(std::move(ia_name), std::move(user))),
        authority_(identity_.qualified(), crypto::derive_key({}, "authority:" + identity_.qualified() + ":" + std::to_string(net.seed())),
                   AuthorityConfig{config.bucket_count, config.key_lifetime,
                                   config.retention_epochs}),
        builder_(identity_, authority_, rng()) {
    net.register_identity(identity_.qualified(), this->id(), identity_.keys.public_key,
                          identity_.ia_certificate);
  }

  const crypto::Identity& identity() const { return identity_; }
  const AttributeAuthority& authority() const { return authority_; }
  std::uint64_t epoch() const { return authority_.epoch(); }

  // --- social graph ----------------------------------------------------------

  void categorize_user(const std::string& peer, std::set<std::string> categories) {
    const auto* entry = net().find_identity(peer);
    if (!entry || !net().ia().verify_identity(peer, entry->public_key, entry->ia_cert)) {
      throw BadCertificate("peer identity is not endorsed by the identity authority");
    }
    authority_.categorize(peer, std::move(categories), rng());
  }

  std::string alias_of(const std::string& peer) const { return authority_.peer(peer).alias; }
  int bucket_of(const std::string& peer) const { return authority_.peer(peer).bucket; }

  // OR over the aliases of every peer holding `category`, minus the excluded
  // ones: the per-post exclusion policy.
  Policy exclusion_policy(const std::string& category,
                          const std::set<std::string>& excluded_peers) const {
    std::vector<Policy> alternatives;
    for (const auto& [peer, rec] : authority_.peers()) {
      if (rec.categories.contains(category) && !excluded_peers.contains(peer)) {
        alternatives.push_back(Policy::leaf(alias_attribute(rec.alias)));
      }
    }
    if (alternatives.empty()) {
      throw InvalidPolicy("exclusion would leave an empty audience");
    }
    if (alternatives.size() == 1) {
      return alternatives.front();
    }
    return Policy::any_of(std::move(alternatives));
  }

  // --- applications ----------------------------------------------------------

  void register_app(const std::string& app, Policy index_fp) {
    if (!is_valid_application(app)) {
      throw MalformedName("bad application identifier: " + app);
    }
    AppState state;
    state.index_fp = std::move(index_fp);
    apps_.emplace(app, std::move(state));
  }

  bool has_app(const std::string& app) const { return apps_.contains(app); }

  void subscribe_notify(const std::string& app, NotifyPredicate predicate = {}) {
    AppState& state = app_state(app);
    state.subscribed = true;
    state.predicate = std::move(predicate);
  }

  std::uint64_t app_create(const std::string& app, Bytes record) {
    app_state(app);
    std::uint64_t id = next_record_id_++;
    records_[id] = AppRecord{app, std::move(record)};
    return id;
  }

  const Bytes& app_read(const std::string& app, std::uint64_t record_id) const {
    const AppRecord& rec = record_for(app, record_id);
    return rec.data;
  }

  void app_update(const std::string& app, std::uint64_t record_id, Bytes data) {
    mutable_record_for(app, record_id).data = std::move(data);
  }

  void app_delete(const std::string& app, std::uint64_t record_id) {
    mutable_record_for(app, record_id);
    records_.erase(record_id);
  }

  // --- publication -----------------------------------------------------------

  FolderName app_prefix(const std::string& app) const {
    return FolderName{identity_.ia, identity_.user, app, {}};
  }

  Policy default_distributor_policy(const std::string& app) const {
    return Policy::leaf("dist:" + identity_.qualified() + "/" + app);
  }

  void create_feed(const std::string& app, const std::string& feed, Policy fp,
                   std::optional<Policy> dp = std::nullopt) {
    AppState& state = app_state(app);
    std::string key = feed_key(app, feed);
    if (feeds_.contains(key)) {
      throw Error("feed already exists: " + feed);
    }
    FolderName folder = subfolder(app_prefix(app), generate_segment(rng()));
    feeds_.emplace(key, FeedState{app, FeedBook(folder, std::move(fp),
                                                dp ? *dp : default_distributor_policy(app))});
    if (state.default_feed.empty()) {
      state.default_feed = feed;
    }
  }

  FolderName feed_folder(const std::string& app, const std::string& feed) const {
    return feed_book(app, feed).folder();
  }

  ContentName publish(const std::string& app, const std::string& feed, Bytes payload,
                      std::optional<Policy> fp_override = std::nullopt,
                      std::optional<ContentName> reference = std::nullopt) {
    app_state(app);
    FeedBook& book = mutable_feed_book(app, feed);
    ContentName entry_name = make_name(book.folder(), generate_segment(rng()));
    emit_tu(book.folder(), ThreadUpdateCommand::add(entry_name));
    FeedBook::AppendOptions options;
    options.fp_override = std::move(fp_override);
    options.forced_name = entry_name;
    options.reference = std::move(reference);
    auto result = book.append(feed_ctx(book.folder()), payload, std::move(options));
    store_feed_objects(result.built, feed_key(app, feed));
    return entry_name;
  }

  ContentName publish_file(const std::string& app, Bytes data, std::size_t chunk_size,
                           Policy fp, std::optional<Policy> dp = std::nullopt) {
    app_state(app);
    FolderName folder = subfolder(app_prefix(app), generate_segment(rng()));
    auto seed = rng().array<16>();
    Policy dist = dp ? *dp : default_distributor_policy(app);
    FragmentSet set{folder, seed,
                    static_cast<std::uint32_t>((data.size() + chunk_size - 1) / chunk_size)};
    if (data.empty()) {
      throw EmptyData("cannot publish an empty file");
    }
    emit_tu(folder, ThreadUpdateCommand::add(set.name_of(1)));
    FragmentedFile file = fragment_file(builder_, data, chunk_size, folder, seed, fp,
                                        authority_.epoch(), dist, tu_ref_for(folder));
    for (std::uint32_t i = 0; i < file.set.count; ++i) {
      const NetworkObject& obj = file.objects[i];
      OwnedRecord rec;
      rec.kind = OwnedRecord::Kind::Fragment;
      rec.object = obj;
      std::size_t offset = static_cast<std::size_t>(i) * chunk_size;
      rec.payload.assign(data.begin() + static_cast<std::ptrdiff_t>(offset),
                         data.begin() + static_cast<std::ptrdiff_t>(
                                            std::min(offset + chunk_size, data.size())));
      rec.fp = fp;
      rec.dp = dist;
      rec.links.segment_seed = seed;
      rec.links.number_of_segments = file.set.count;
      owned_[obj.content_name] = std::move(rec);
      if (i > 0) {
        emit_tu(folder, ThreadUpdateCommand::add(obj.content_name));
      }
    }
    return file.set.name_of(1);
  }

  void compile_index(const std::string& app, std::map<std::string, ContentName> entries) {
    AppState& state = app_state(app);
    for (const auto& [label, name] : entries) {
      if (name.producer() != identity_.qualified()) {
        throw NameNotOwned("index entry " + label + " references foreign content");
      }
    }
    state.index_entries = entries;
    ContentName idx = index_name(app_prefix(app));
    Bytes payload = encode_index_entries(entries);
    auto it = owned_.find(idx);
    if (it == owned_.end()) {
      emit_tu(app_prefix(app), ThreadUpdateCommand::add(idx));
      OwnedRecord rec;
      rec.kind = OwnedRecord::Kind::Index;
      rec.payload = std::move(payload);
      rec.fp = state.index_fp;
      rec.dp = default_distributor_policy(app);
      rec.object = build_standalone(idx, rec, 1);
      rec.version = 1;
      owned_[idx] = std::move(rec);
    } else {
      OwnedRecord& rec = it->second;
      rec.payload = std::move(payload);
      rec.version += 1;
      rec.object = build_standalone(idx, rec, rec.version);
      rec.dirty = false;
      emit_tu(app_prefix(app), ThreadUpdateCommand::update(idx, idx));
    }
  }

  ContentName index_name_of(const std::string& app) const {
    return index_name(app_prefix(app));
  }

  const std::map<std::string, ContentName>& index_entries(const std::string& app) const {
    return app_state(app).index_entries;
  }

  // --- mutation --------------------------------------------------------------

  ContentName mutate_update(const ContentName& name, Bytes new_payload) {
    OwnedRecord& rec = owned_record(name);
    if (rec.kind != OwnedRecord::Kind::FeedEntry) {
      throw Error("update is only supported for feed entries");
    }
    std::string book_key = rec.book;
    FeedBook& book = feeds_.at(book_key).book;
    auto result = book.replace(feed_ctx(book.folder()), name, new_payload);
    owned_.erase(name);
    if (auto exp = expanded_.extract(name); !exp.empty()) {
      exp.key() = result.new_name;
      expanded_.insert(std::move(exp));
    }
    store_feed_objects(result.built, book_key);
    for (const auto& cmd : result.commands) {
      emit_tu(book.folder(), cmd);
    }
    relabel_index_entries(feeds_.at(book_key).app, name, result.new_name);
    return result.new_name;
  }

  void mutate_delete(const ContentName& name) {
    OwnedRecord& rec = owned_record(name);
    switch (rec.kind) {
    case OwnedRecord::Kind::FeedEntry: {
      std::string book_key = rec.book;
      FeedBook& book = feeds_.at(book_key).book;
      auto result = book.remove(feed_ctx(book.folder()), name);
      owned_.erase(name);
      expanded_.erase(name);
      store_feed_objects(result.built, book_key);
      for (const auto& cmd : result.commands) {
        emit_tu(book.folder(), cmd);
      }
      relabel_index_entries(feeds_.at(book_key).app, name, std::nullopt);
      return;
    }
    case OwnedRecord::Kind::Fragment: {
      FolderName folder = folder_of(name);
      owned_.erase(name);
      expanded_.erase(name);
      emit_tu(folder, ThreadUpdateCommand::remove(name));
      return;
    }
    default:
      throw Error("index and thread-update entries cannot be deleted directly");
    }
  }

  ThreadUpdateCommand cut_feed(const std::string& app, const std::string& feed,
                               const ContentName& from, const ContentName& to) {
    FeedBook& book = mutable_feed_book(app, feed);
    auto result = book.cut(feed_ctx(book.folder()), from, to);
    for (const auto& name : result.removed) {
      owned_.erase(name);
      expanded_.erase(name);
      relabel_index_entries(app, name, std::nullopt);
    }
    store_feed_objects(result.built, feed_key(app, feed));
    emit_tu(book.folder(), result.command);
    return result.command;
  }

  // --- revocation ------------------------------------------------------------

  void revoke_access(const ContentName& name, const std::string& peer) {
    if (!authority_.knows(peer)) {
      throw UnknownPeer("cannot revoke unknown peer " + peer);
    }
    OwnedRecord& rec = owned_record(name);
    const auto& peer_rec = authority_.peer(peer);

    Policy policy = effective_policy(rec, name);
    std::vector<std::string> policy_attrs = policy.leaf_attributes();
    auto occurs = [&policy_attrs](const std::string& attr) {
      return std::find(policy_attrs.begin(), policy_attrs.end(), attr) != policy_attrs.end();
    };

    std::vector<std::string> rewrite_attrs;
    for (const auto& cat : peer_rec.categories) {
      if (!peer_rec.revoked_attributes.contains(cat) && occurs(cat)) {
        rewrite_attrs.push_back(cat);
      }
    }
    std::string alias_attr = alias_attribute(peer_rec.alias);
    if (occurs(alias_attr)) {
      rewrite_attrs.push_back(alias_attr);
    }
    if (rewrite_attrs.empty()) {
      return; // the peer cannot satisfy this policy through its own attributes
    }

    auto buckets = authority_.buckets_by_alias();
    Policy rewritten = policy;
    for (const auto& attr : rewrite_attrs) {
      rewritten = rewrite_policy_for_revocation(rewritten, attr, peer_rec.alias, buckets,
                                                authority_.bucket_count());
      if (attr != alias_attr) {
        authority_.revoke_attribute(peer, attr); // no keys at the next epoch
      }
    }
    if (!expanded_.contains(name)) {
      expanded_[name] = Expansion{policy, authority_.epoch()};
    }
    set_effective_policy(rec, name, rewritten);

    if (config_.eager_reencrypt) {
      rebuild_owned(name);
    } else {
      rec.dirty = true;
    }
    emit_tu(owning_folder(rec, name), ThreadUpdateCommand::update(name, name));
  }

  void rotate_epoch() {
    authority_.rotate_epoch();
    // Expanded policies become eligible for shrink-back; caches must refetch
    // because new followers can only obtain current-epoch keys.
    for (const auto& [name, expansion] : expanded_) {
      auto it = owned_.find(name);
      if (it != owned_.end() && expansion.expanded_epoch < authority_.epoch()) {
        it->second.dirty = true;
        emit_tu(owning_folder(it->second, name), ThreadUpdateCommand::update(name, name));
      }
    }
  }

  // --- certificates ----------------------------------------------------------

  DistributionCertificate issue_certificate(const std::string& distributor_identity,
                                            const FolderName& folder, SimTime expiry) {
    if (folder.producer() != identity_.qualified()) {
      throw NotOwned("cannot certify a foreign folder");
    }
    DistributionCertificate cert;
    cert.identity = identity_.qualified();
    cert.folder = folder;
    cert.expiry = expiry;
    for (const auto& [granted_folder, grants] : granted_) {
      if (is_prefix_of(folder, granted_folder)) {
        for (const auto& g : grants) {
          if (g.expiry > now() &&
              std::find(cert.distributors.begin(), cert.distributors.end(),
                        g.distributor) == cert.distributors.end()) {
            cert.distributors.push_back(g.distributor);
          }
        }
      }
    }
    cert.distributors.push_back(distributor_identity);
    for (const auto& attr : distributor_policy_attributes(folder)) {
      cert.distributor_keys.push_back(AttributeKey{
          attr, kDistributorEpoch, expiry, authority_.key_material(attr, kDistributorEpoch)});
    }
    sign_certificate(cert, identity_.keys.secret_key);
    granted_[folder].push_back(Grant{distributor_identity, expiry});
    return cert;
  }

  // --- notify ---------------------------------------------------------------

  void notify_peer(const std::string& peer, const ContentName& name,
                   const std::string& app) {
    const OwnedRecord& rec = owned_record(name);
    const auto* entry = net().find_identity(peer);
    if (!entry) {
      throw UnknownPeer("no address for " + peer);
    }
    Bytes checksum = crypto::hash(encode_object(rec.object));
    send(entry->node, NotifyMsg{identity_.qualified(), name, checksum,
                                crypto::sign(identity_.keys.secret_key,
                                             notify_signable(name, checksum)),
                                app});
  }

  const std::vector<ContentName>& links_created(const std::string& app) const {
    return app_state(app).links;
  }

  // --- owner-side introspection ----------------------------------------------

  bool owns(const ContentName& name) const { return owned_.contains(name); }

  std::uint64_t owned_version(const ContentName& name) const {
    const OwnedRecord& rec = owned_record_const(name);
    if (rec.kind == OwnedRecord::Kind::FeedEntry ||
        rec.kind == OwnedRecord::Kind::TuEntry) {
      return rec.object.version;
    }
    return rec.version;
  }

  const NetworkObject& owned_object(const ContentName& name) const {
    return owned_record_const(name).object;
  }

  Policy owned_policy(const ContentName& name) const {
    const OwnedRecord& rec = owned_record_const(name);
    return effective_policy(rec, name);
  }

  bool has_tu_channel(const FolderName& governed) const {
    return tu_channels_.contains(governed);
  }

  // Decoded command history of a folder's TU feed, in feed order.
  std::vector<ThreadUpdateCommand> tu_commands(const FolderName& governed) const {
    std::vector<ThreadUpdateCommand> out;
    auto it = tu_channels_.find(governed);
    if (it == tu_channels_.end()) {
      return out;
    }
    for (const auto& name : it->second.feed.names()) {
      out.push_back(ThreadUpdateCommand::decode(it->second.feed.payload_of(name)));
    }
    return out;
  }

  // Reads owned content locally, the way the owning user would.
  Bytes read_own(const ContentName& name) {
    OwnedRecord& rec = owned_record(name);
    if (rec.dirty) {
      rebuild_owned(name);
    }
    KeyRing ring = authority_.ring_for_attributes(
        rec.object.follower_ct.policy.leaf_attributes(), rec.object.follower_ct.epoch,
        now() + config_.key_lifetime);
    FollowerFields fields = open_follower(rec.object, ring);
    return open_payload(rec.object, fields);
  }

  // --- consumer engine --------------------------------------------------------

  struct FetchResult {
    enum class Outcome { Pending, Ok, NotFound, Banned, Timeout, Unresolvable };
    enum class Decrypt { NotAttempted, Ok, Denied, IntegrityFail };
    Outcome outcome = Outcome::Pending;
    Decrypt decrypt = Decrypt::NotAttempted;
    std::optional<NetworkObject> object;
    std::optional<FollowerFields> fields;
    Bytes payload;
    SimTime completed_at = 0;
    SimTime next_allowed_hint = 0;
  };

  using FetchContinuation = std::function<void(const ContentName&, const FetchResult&)>;

  void fetch(const ContentName& name, FetchContinuation done = {}) {
    if (name.producer() == identity_.qualified()) {
      finish_local_fetch(name, std::move(done));
      return;
    }
    std::uint64_t op = ++fetch_sequence_;
    PendingFetch pending;
    pending.name = name;
    pending.done = std::move(done);
    fetches_.emplace(op, std::move(pending));
    route_fetch(op);
  }

  const FetchResult* fetch_result(const ContentName& name) const {
    auto it = fetch_log_.find(name);
    return it == fetch_log_.end() ? nullptr : &it->second;
  }

  struct FeedReadResult {
    std::vector<ContentName> names; // newest first
    std::vector<Bytes> payloads;
    bool reached_head = false;
    bool done = false;
    std::string stopped_because;
  };

  void fetch_feed(const std::string& producer, const std::string& app) {
    std::string key = producer + "\x1f" + app;
    feed_reads_[key] = FeedReadResult{};
    std::size_t dot = producer.find('.');
    if (dot == std::string::npos) {
      feed_reads_[key].done = true;
      feed_reads_[key].stopped_because = "bad producer identity";
      return;
    }
    FolderName prefix{producer.substr(0, dot), producer.substr(dot + 1), app, {}};
    fetch(index_name(prefix),
          [this, key](const ContentName&, const FetchResult& result) {
            on_feed_index(key, result);
          });
  }

  const FeedReadResult* feed_read_result(const std::string& producer,
                                         const std::string& app) const {
    auto it = feed_reads_.find(producer + "\x1f" + app);
    return it == feed_reads_.end() ? nullptr : &it->second;
  }

  struct FileReadResult {
    bool done = false;
    bool ok = false;
    Bytes data;
    std::uint32_t expected = 0;
    std::map<std::uint32_t, Bytes> chunks;
  };

  void fetch_file(const ContentName& first_fragment) {
    file_reads_[first_fragment] = FileReadResult{};
    fetch(first_fragment,
          [this, first_fragment](const ContentName&, const FetchResult& result) {
            on_file_first(first_fragment, result);
          });
  }

  const FileReadResult* file_read_result(const ContentName& first) const {
    auto it = file_reads_.find(first);
    return it == file_reads_.end() ? nullptr : &it->second;
  }

  // --- simulator entry points --------------------------------------------------

  void on_message(NodeId from, const Message& msg, SimTime at) override {
    if (const auto* req = std::get_if<RequestMsg>(&msg)) {
      handle_request(from, *req, at);
    } else if (const auto* data = std::get_if<DataMsg>(&msg)) {
      handle_data(*data, at);
    } else if (const auto* res = std::get_if<ResolveMsg>(&msg)) {
      handle_resolve(from, *res, at);
    } else if (const auto* reply = std::get_if<ResolveReplyMsg>(&msg)) {
      handle_resolve_reply(*reply, at);
    } else if (const auto* notify = std::get_if<NotifyMsg>(&msg)) {
      handle_notify(*notify, at);
    } else if (const auto* keyreq = std::get_if<KeyRequestMsg>(&msg)) {
      handle_key_request(from, *keyreq, at);
    } else if (const auto* keyrep = std::get_if<KeyReplyMsg>(&msg)) {
      handle_key_reply(*keyrep, at);
    }
  }

  void on_timer(std::uint64_t token, SimTime at) override {
    if (auto fetch_it = wire_to_fetch_.find(token); fetch_it != wire_to_fetch_.end()) {
      std::uint64_t op = fetch_it->second;
      wire_to_fetch_.erase(fetch_it);
      if (fetches_.contains(op)) {
        FetchResult result;
        result.outcome = FetchResult::Outcome::Timeout;
        result.completed_at = at;
        finalize_fetch(op, std::move(result));
      }
      return;
    }
    if (auto res_it = wire_to_resolve_.find(token); res_it != wire_to_resolve_.end()) {
      std::string key = res_it->second;
      wire_to_resolve_.erase(res_it);
      auto pending = resolves_.find(key);
      if (pending != resolves_.end() && pending->second.wire_id == token) {
        fail_resolve(key, at);
      }
    }
  }

private:
  struct OwnedRecord {
    enum class Kind { FeedEntry, TuEntry, Index, Fragment } kind = Kind::FeedEntry;
    NetworkObject object;
    std::string book; // feeds_ / tu_channels_ key
    // Standalone (Index / Fragment) rebuild state:
    Bytes payload;
    Policy fp;
    Policy dp;
    ObjectLinks links;
    std::uint64_t version = 1;
    bool dirty = false;
    std::deque<SimTime> popularity;
  };

  struct FeedState {
    std::string app;
    FeedBook book;
  };

  struct TuChannel {
    FeedBook feed;
    ContentName head;
  };

  struct AppState {
    Policy index_fp;
    bool subscribed = false;
    NotifyPredicate predicate;
    std::string default_feed;
    std::map<std::string, ContentName> index_entries;
    std::vector<ContentName> links;
  };

  struct AppRecord {
    std::string app;
    Bytes data;
  };

  struct Expansion {
    Policy original;
    std::uint64_t expanded_epoch = 0;
  };

  struct Grant {
    std::string distributor;
    SimTime expiry;
  };

  struct PendingFetch {
    ContentName name;
    std::uint64_t wire_id = 0;
    bool keys_requested = false;
    std::optional<NetworkObject> held; // while waiting for keys
    SimTime banned_hint = 0;
    FetchContinuation done;
  };

  struct PendingResolve {
    FolderName folder;
    std::uint64_t wire_id = 0;
    std::vector<std::uint64_t> waiting;
  };

  // ---- app helpers ----

  AppState& app_state(const std::string& app) {
    auto it = apps_.find(app);
    if (it == apps_.end()) {
      throw NoSuchApplication("application not registered: " + app);
    }
    return it->second;
  }

  const AppState& app_state(const std::string& app) const {
    auto it = apps_.find(app);
    if (it == apps_.end()) {
      throw NoSuchApplication("application not registered: " + app);
    }
    return it->second;
  }

  const AppRecord& record_for(const std::string& app, std::uint64_t record_id) const {
    app_state(app);
    auto it = records_.find(record_id);
    if (it == records_.end()) {
      throw NotFound("no such record: " + std::to_string(record_id));
    }
    if (it->second.app != app) {
      throw Unauthorized("record belongs to another application");
    }
    return it->second;
  }

  AppRecord& mutable_record_for(const std::string& app, std::uint64_t record_id) {
    return const_cast<AppRecord&>(record_for(app, record_id));
  }

  static std::string feed_key(const std::string& app, const std::string& feed) {
    return app + "\x1f" + feed;
  }

  const FeedBook& feed_book(const std::string& app, const std::string& feed) const {
    auto it = feeds_.find(feed_key(app, feed));
    if (it == feeds_.end()) {
      throw NotFound("no such feed: " + feed);
    }
    return it->second.book;
  }

  FeedBook& mutable_feed_book(const std::string& app, const std::string& feed) {
    auto it = feeds_.find(feed_key(app, feed));
    if (it == feeds_.end()) {
      throw NotFound("no such feed: " + feed);
    }
    return it->second.book;
  }

  // ---- building ----

  FeedBook::BuildContext feed_ctx(const FolderName& folder) {
    return FeedBook::BuildContext{&builder_, authority_.epoch(), tu_ref_for(folder)};
  }

  NetworkObject build_standalone(const ContentName& name, const OwnedRecord& rec,
                                 std::uint64_t version) {
    std::uint64_t epoch =
        rec.kind == OwnedRecord::Kind::TuEntry ? kDistributorEpoch : authority_.epoch();
    return builder_.build(name, rec.payload, rec.fp, epoch, rec.dp, rec.links,
                          tu_ref_for(folder_of(name)), version);
  }

  void store_feed_objects(const std::vector<NetworkObject>& built, const std::string& book) {
    for (const NetworkObject& obj : built) {
      OwnedRecord& rec = owned_[obj.content_name];
      rec.kind = OwnedRecord::Kind::FeedEntry;
      rec.book = book;
      rec.object = obj;
    }
  }

  // ---- thread updates ----

  Policy tu_policy(const std::string& app) const { return default_distributor_policy(app); }

  TuChannel& ensure_channel(const FolderName& governed) {
    auto it = tu_channels_.find(governed);
    if (it != tu_channels_.end()) {
      return it->second;
    }
    TuChannel channel;
    channel.feed = FeedBook(tu_folder_of(governed), tu_policy(governed.application),
                            tu_policy(governed.application));
    auto [inserted, _] = tu_channels_.emplace(governed, std::move(channel));
    return inserted->second;
  }

  TuRef tu_ref_for(const FolderName& folder) {
    TuChannel& ch = ensure_channel(folder);
    if (ch.feed.empty()) {
      throw Error("thread-update channel has no entries yet: " + format_folder(folder));
    }
    return TuRef{ch.head, ch.feed.tail()};
  }

  // Appends a command to the folder's TU feed. Every TU entry is announced on
  // the parent folder's TU (bubbled ADD), so a distributor following a single
  // channel high in the hierarchy transitively hears about everything below.
  // The application-prefix channel is its own control channel.
  ContentName emit_tu(const FolderName& governed, const ThreadUpdateCommand& cmd) {
    TuChannel& ch = ensure_channel(governed);
    ContentName entry_name = make_name(tu_folder_of(governed), generate_segment(rng()));
    TuRef ref;
    if (governed.folders.empty()) {
      ref = ch.feed.empty() ? TuRef{entry_name, entry_name}
                            : TuRef{ch.head, ch.feed.tail()};
    } else {
      FolderName parent = parent_folder(governed);
      ContentName bubble = emit_tu(parent, ThreadUpdateCommand::add(entry_name));
      ref = TuRef{tu_channels_.at(parent).head, bubble};
    }
    FeedBook::AppendOptions options;
    options.forced_name = entry_name;
    auto result = ch.feed.append(
        FeedBook::BuildContext{&builder_, kDistributorEpoch, ref}, cmd.encode(),
        std::move(options));
    if (ch.feed.size() == 1) {
      ch.head = entry_name;
    }
    for (const NetworkObject& obj : result.built) {
      OwnedRecord& rec = owned_[obj.content_name];
      rec.kind = OwnedRecord::Kind::TuEntry;
      rec.book = format_folder(governed);
      rec.object = obj;
    }
    return entry_name;
  }

  // ---- policy bookkeeping ----

  OwnedRecord& owned_record(const ContentName& name) {
    auto it = owned_.find(name);
    if (it == owned_.end()) {
      throw NotOwned("not owned: " + format_name(name));
    }
    return it->second;
  }

  const OwnedRecord& owned_record_const(const ContentName& name) const {
    auto it = owned_.find(name);
    if (it == owned_.end()) {
      throw NotOwned("not owned: " + format_name(name));
    }
    return it->second;
  }

  Policy effective_policy(const OwnedRecord& rec, const ContentName& name) const {
    if (rec.kind == OwnedRecord::Kind::FeedEntry) {
      return feeds_.at(rec.book).book.entry_policy(name);
    }
    return rec.fp;
  }

  void set_effective_policy(OwnedRecord& rec, const ContentName& name, Policy policy) {
    if (rec.kind == OwnedRecord::Kind::FeedEntry) {
      feeds_.at(rec.book).book.set_entry_policy(name, std::move(policy));
    } else {
      rec.fp = std::move(policy);
    }
  }

  FolderName owning_folder(const OwnedRecord& rec, const ContentName& name) const {
    if (rec.kind == OwnedRecord::Kind::FeedEntry) {
      return feeds_.at(rec.book).book.folder();
    }
    return folder_of(name);
  }

  void rebuild_owned(const ContentName& name) {
    OwnedRecord& rec = owned_record(name);
    auto expansion = expanded_.find(name);
    if (expansion != expanded_.end() &&
        authority_.epoch() > expansion->second.expanded_epoch) {
      // Keys rotated since the rewrite: shrink back to the original policy.
      // The revoked peer holds no current-epoch keys for it.
      set_effective_policy(rec, name, expansion->second.original);
      expanded_.erase(expansion);
    }
    switch (rec.kind) {
    case OwnedRecord::Kind::FeedEntry: {
      FeedBook& book = feeds_.at(rec.book).book;
      rec.object = book.reissue(feed_ctx(book.folder()), name);
      break;
    }
    case OwnedRecord::Kind::Index:
    case OwnedRecord::Kind::Fragment:
      rec.version += 1;
      rec.object = build_standalone(name, rec, rec.version);
      break;
    case OwnedRecord::Kind::TuEntry:
      break; // TU entries are never rewritten
    }
    rec.dirty = false;
  }

  void relabel_index_entries(const std::string& app, const ContentName& old_name,
                             std::optional<ContentName> new_name) {
    AppState& state = app_state(app);
    bool changed = false;
    for (auto it = state.index_entries.begin(); it != state.index_entries.end();) {
      if (it->second == old_name) {
        changed = true;
        if (new_name) {
          it->second = *new_name;
          ++it;
        } else {
          it = state.index_entries.erase(it);
        }
      } else {
        ++it;
      }
    }
    if (changed && owned_.contains(index_name(app_prefix(app)))) {
      compile_index(app, state.index_entries);
    }
  }

  std::vector<std::string> distributor_policy_attributes(const FolderName& folder) const {
    std::set<std::string> attrs;
    attrs.insert("dist:" + identity_.qualified() + "/" + folder.application);
    for (const auto& [_, feed] : feeds_) {
      if (is_prefix_of(folder, feed.book.folder())) {
        for (const auto& attr : feed.book.distributor_policy().leaf_attributes()) {
          attrs.insert(attr);
        }
      }
    }
    for (const auto& [name, rec] : owned_) {
      if ((rec.kind == OwnedRecord::Kind::Index ||
           rec.kind == OwnedRecord::Kind::Fragment) &&
          is_prefix_of(folder, folder_of(name))) {
        for (const auto& attr : rec.dp.leaf_attributes()) {
          attrs.insert(attr);
        }
      }
    }
    return {attrs.begin(), attrs.end()};
  }

  // ---- serving (root source) ----

  void handle_request(NodeId from, const RequestMsg& req, SimTime at) {
    auto it = owned_.find(req.name);
    if (it == owned_.end()) {
      metrics().serves_notfound++;
      send(from, DataMsg{req.request_id, req.name, DataStatus::NotFound, std::nullopt, 0});
      return;
    }
    OwnedRecord& rec = it->second;
    if (rec.dirty) {
      rebuild_owned(req.name); // lazy re-encryption on the request path
    }
    while (!rec.popularity.empty() &&
           rec.popularity.front() + config_.popularity_window <= at) {
      rec.popularity.pop_front();
    }
    rec.popularity.push_back(at);
    metrics().serves_ok++;
    send(from, DataMsg{req.request_id, req.name, DataStatus::Ok, rec.object, 0});
  }

  // ---- resolve service ----

  void handle_resolve(NodeId from, const ResolveMsg& res, SimTime at) {
    if (res.folder.producer() != identity_.qualified()) {
      send(from, ResolveReplyMsg{res.resolve_id, ResolveStatus::Rejected, res.folder, {}, 0});
      return;
    }
    const FolderName* best = nullptr;
    for (const auto& [granted_folder, grants] : granted_) {
      if (!is_prefix_of(granted_folder, res.folder)) {
        continue;
      }
      bool alive = false;
      for (const auto& g : grants) {
        alive = alive || g.expiry > at;
      }
      if (alive && (!best || granted_folder.folders.size() > best->folders.size())) {
        best = &granted_folder;
      }
    }
    std::vector<NodeId> servers;
    FolderName covered = FolderName{res.folder.ia, res.folder.user, res.folder.application, {}};
    if (best) {
      covered = *best;
      for (const auto& g : granted_.at(*best)) {
        if (g.expiry <= at) {
          continue;
        }
        if (const auto* entry = net().find_identity(g.distributor)) {
          if (std::find(servers.begin(), servers.end(), entry->node) == servers.end()) {
            servers.push_back(entry->node);
          }
        }
      }
    }
    if (servers.empty()) {
      servers.push_back(id()); // the butler is always the root source
    }
    send(from, ResolveReplyMsg{res.resolve_id, ResolveStatus::Ok, covered, std::move(servers),
                               config_.route_ttl});
  }

  // ---- key service ----

  void handle_key_request(NodeId from, const KeyRequestMsg& req, SimTime at) {
    const std::string* requester = net().identity_of(from);
    if (!requester || !authority_.knows(*requester)) {
      send(from, KeyReplyMsg{req.request_id, false, identity_.qualified(), {}});
      return;
    }
    std::set<std::string> wanted(req.attributes.begin(), req.attributes.end());
    std::vector<AttributeKey> keys = authority_.issue_attribute_keys(*requester, wanted, at);
    send(from, KeyReplyMsg{req.request_id, true, identity_.qualified(), std::move(keys)});
  }

  // ---- notify handling ----

  static Bytes notify_signable(const ContentName& name, const Bytes& checksum) {
    Bytes msg = to_bytes(format_name(name));
    msg.push_back(0);
    msg.insert(msg.end(), checksum.begin(), checksum.end());
    return msg;
  }

  void handle_notify(const NotifyMsg& notify, SimTime) {
    const auto* entry = net().find_identity(notify.sender);
    if (!entry || !crypto::verify(entry->public_key,
                                  notify_signable(notify.content_name, notify.checksum),
                                  notify.signature)) {
      return; // bad signature: drop
    }
    auto app_it = apps_.find(notify.application);
    if (app_it == apps_.end() || !app_it->second.subscribed) {
      return;
    }
    AppState& state = app_it->second;
    bool accept = state.predicate ? state.predicate(notify.sender, notify.content_name)
                                  : authority_.knows(notify.sender);
    if (!accept || state.default_feed.empty()) {
      return;
    }
    // Two-way agreement: link the announced content under our own folder.
    ContentName link = publish(notify.application, state.default_feed, Bytes{},
                               std::nullopt, notify.content_name);
    state.links.push_back(link);
    if (state.index_entries.contains("latest")) {
      state.index_entries["latest"] = link;
      compile_index(notify.application, state.index_entries);
    }
  }

  // ---- consumer engine internals ----

  std::uint64_t next_wire_id() {
    return (static_cast<std::uint64_t>(id()) << 40) | ++wire_sequence_;
  }

  void finish_local_fetch(const ContentName& name, FetchContinuation done) {
    FetchResult result;
    result.completed_at = now();
    auto it = owned_.find(name);
    if (it == owned_.end()) {
      result.outcome = FetchResult::Outcome::NotFound;
    } else {
      if (it->second.dirty) {
        rebuild_owned(name);
      }
      result.outcome = FetchResult::Outcome::Ok;
      result.object = it->second.object;
      KeyRing ring = authority_.ring_for_attributes(
          result.object->follower_ct.policy.leaf_attributes(),
          result.object->follower_ct.epoch, now() + config_.key_lifetime);
      result.fields = open_follower(*result.object, ring);
      result.payload = open_payload(*result.object, *result.fields);
      result.decrypt = FetchResult::Decrypt::Ok;
    }
    fetch_log_[name] = result;
    if (done) {
      done(name, fetch_log_[name]);
    }
  }

  void route_fetch(std::uint64_t op) {
    PendingFetch& pending = fetches_.at(op);
    if (auto target = routes_.lookup(pending.name, now())) {
      send_content_request(op, *target);
      return;
    }
    start_resolve(op);
  }

  void send_content_request(std::uint64_t op, NodeId target) {
    PendingFetch& pending = fetches_.at(op);
    std::uint64_t rid = next_wire_id();
    pending.wire_id = rid;
    wire_to_fetch_[rid] = op;
    send(target, RequestMsg{rid, pending.name});
    set_timer(now() + config_.request_timeout, rid);
  }

  void start_resolve(std::uint64_t op) {
    PendingFetch& pending = fetches_.at(op);
    FolderName folder = folder_of(pending.name);
    std::string key = format_folder(folder);
    auto it = resolves_.find(key);
    if (it != resolves_.end()) {
      it->second.waiting.push_back(op);
      return;
    }
    const auto* producer = net().find_identity(pending.name.producer());
    if (!producer) {
      FetchResult result;
      result.outcome = FetchResult::Outcome::Unresolvable;
      result.completed_at = now();
      finalize_fetch(op, std::move(result));
      return;
    }
    metrics().resolves++;
    metrics().resolve_roundtrips++;
    metrics().resolve_roundtrips_max = std::max<std::uint64_t>(
        metrics().resolve_roundtrips_max, 1);
    std::uint64_t rid = next_wire_id();
    PendingResolve resolve;
    resolve.folder = folder;
    resolve.wire_id = rid;
    resolve.waiting.push_back(op);
    resolves_.emplace(key, std::move(resolve));
    wire_to_resolve_[rid] = key;
    send(producer->node, ResolveMsg{rid, folder});
    set_timer(now() + config_.request_timeout, rid);
  }

  void handle_resolve_reply(const ResolveReplyMsg& reply, SimTime at) {
    auto key_it = wire_to_resolve_.find(reply.resolve_id);
    if (key_it == wire_to_resolve_.end()) {
      return;
    }
    std::string key = key_it->second;
    wire_to_resolve_.erase(key_it);
    cancel_timer(reply.resolve_id);
    auto it = resolves_.find(key);
    if (it == resolves_.end()) {
      return;
    }
    PendingResolve resolve = std::move(it->second);
    resolves_.erase(it);
    if (reply.status != ResolveStatus::Ok || reply.servers.empty()) {
      for (std::uint64_t op : resolve.waiting) {
        if (fetches_.contains(op)) {
          FetchResult result;
          result.outcome = FetchResult::Outcome::Unresolvable;
          result.completed_at = at;
          finalize_fetch(op, std::move(result));
        }
      }
      return;
    }
    for (NodeId server : reply.servers) {
      routes_.insert(reply.covered, server, at + reply.ttl);
    }
    for (std::uint64_t op : resolve.waiting) {
      if (fetches_.contains(op)) {
        route_fetch(op);
      }
    }
  }

  void fail_resolve(const std::string& key, SimTime at) {
    auto it = resolves_.find(key);
    if (it == resolves_.end()) {
      return;
    }
    PendingResolve resolve = std::move(it->second);
    resolves_.erase(it);
    for (std::uint64_t op : resolve.waiting) {
      if (fetches_.contains(op)) {
        FetchResult result;
        result.outcome = FetchResult::Outcome::Unresolvable;
        result.completed_at = at;
        finalize_fetch(op, std::move(result));
      }
    }
  }

  void handle_data(const DataMsg& data, SimTime at) {
    auto wire_it = wire_to_fetch_.find(data.request_id);
    if (wire_it == wire_to_fetch_.end()) {
      return;
    }
    std::uint64_t op = wire_it->second;
    wire_to_fetch_.erase(wire_it);
    cancel_timer(data.request_id);
    auto it = fetches_.find(op);
    if (it == fetches_.end()) {
      return;
    }
    PendingFetch& pending = it->second;

    FetchResult result;
    result.completed_at = at;
    result.next_allowed_hint = data.next_allowed;
    switch (data.status) {
    case DataStatus::NotFound:
      result.outcome = FetchResult::Outcome::NotFound;
      finalize_fetch(op, std::move(result));
      return;
    case DataStatus::Banned:
      result.outcome = FetchResult::Outcome::Banned;
      finalize_fetch(op, std::move(result));
      return;
    case DataStatus::Ok:
      break;
    }
    const auto* producer = net().find_identity(pending.name.producer());
    if (!data.object || !producer || !verify_object(*data.object, producer->public_key)) {
      result.outcome = FetchResult::Outcome::NotFound; // unverifiable data is no data
      finalize_fetch(op, std::move(result));
      return;
    }
    pending.held = data.object;
    attempt_decrypt(op, at);
  }

  void attempt_decrypt(std::uint64_t op, SimTime at) {
    PendingFetch& pending = fetches_.at(op);
    const NetworkObject& obj = *pending.held;
    const std::string producer = pending.name.producer();
    KeyRing& ring = ring_for(producer);

    FetchResult result;
    result.completed_at = at;
    result.outcome = FetchResult::Outcome::Ok;
    result.object = obj;

    DecryptFailure why;
    auto fields = try_open_follower(obj, ring, &why);
    if (fields) {
      result.fields = *fields;
      auto payload = crypto::open(fields->secret_key, obj.payload_ct);
      if (payload) {
        result.decrypt = FetchResult::Decrypt::Ok;
        result.payload = *payload;
      } else {
        result.decrypt = FetchResult::Decrypt::IntegrityFail;
      }
      finalize_fetch(op, std::move(result));
      return;
    }
    if (why == DecryptFailure::IntegrityFailure) {
      result.decrypt = FetchResult::Decrypt::IntegrityFail;
      finalize_fetch(op, std::move(result));
      return;
    }
    if (!pending.keys_requested) {
      // Keys flow on demand, only once content has to be decrypted.
      pending.keys_requested = true;
      const auto* entry = net().find_identity(producer);
      if (entry) {
        std::vector<std::string> attrs = obj.follower_ct.policy.leaf_attributes();
        std::sort(attrs.begin(), attrs.end());
        attrs.erase(std::unique(attrs.begin(), attrs.end()), attrs.end());
        std::uint64_t rid = next_wire_id();
        pending.wire_id = rid;
        wire_to_fetch_[rid] = op;
        send(entry->node, KeyRequestMsg{rid, producer, std::move(attrs)});
        set_timer(now() + config_.request_timeout, rid);
        return;
      }
    }
    result.decrypt = FetchResult::Decrypt::Denied;
    finalize_fetch(op, std::move(result));
  }

  void handle_key_reply(const KeyReplyMsg& reply, SimTime at) {
    auto wire_it = wire_to_fetch_.find(reply.request_id);
    if (wire_it == wire_to_fetch_.end()) {
      return;
    }
    std::uint64_t op = wire_it->second;
    wire_to_fetch_.erase(wire_it);
    cancel_timer(reply.request_id);
    if (!fetches_.contains(op)) {
      return;
    }
    if (reply.granted) {
      KeyRing& ring = ring_for(reply.issuer);
      for (const auto& key : reply.keys) {
        ring.insert(key);
      }
    }
    attempt_decrypt(op, at); // keys_requested stops a second round
  }

  KeyRing& ring_for(const std::string& issuer) {
    auto it = rings_.find(issuer);
    if (it == rings_.end()) {
      it = rings_.emplace(issuer, KeyRing(issuer, config_.retention_epochs)).first;
    }
    return it->second;
  }

  void finalize_fetch(std::uint64_t op, FetchResult result) {
    auto it = fetches_.find(op);
    if (it == fetches_.end()) {
      return;
    }
    ContentName name = it->second.name;
    FetchContinuation done = std::move(it->second.done);
    fetches_.erase(it);
    fetch_log_[name] = std::move(result);
    if (done) {
      done(name, fetch_log_[name]);
    }
  }

  // ---- feed walks ----

  void on_feed_index(const std::string& key, const FetchResult& result) {
    FeedReadResult& walk = feed_reads_[key];
    if (result.outcome != FetchResult::Outcome::Ok ||
        result.decrypt != FetchResult::Decrypt::Ok) {
      walk.done = true;
      walk.stopped_because = "index unavailable or undecryptable";
      return;
    }
    std::map<std::string, ContentName> entries;
    try {
      entries = decode_index_entries(result.payload);
    } catch (const MalformedEncoding&) {
      walk.done = true;
      walk.stopped_because = "malformed index";
      return;
    }
    auto latest = entries.find("latest");
    if (latest == entries.end()) {
      walk.done = true;
      walk.reached_head = true; // empty feed
      return;
    }
    fetch(latest->second, [this, key](const ContentName& name, const FetchResult& r) {
      on_feed_entry(key, name, r);
    });
  }

  void on_feed_entry(const std::string& key, const ContentName& name,
                     const FetchResult& result) {
    FeedReadResult& walk = feed_reads_[key];
    if (result.outcome != FetchResult::Outcome::Ok) {
      walk.done = true;
      walk.stopped_because = "entry unavailable";
      return;
    }
    if (result.decrypt != FetchResult::Decrypt::Ok) {
      // Without the follower fields the previous link is sealed; the walk
      // cannot continue past this entry.
      walk.done = true;
      walk.stopped_because = "entry undecryptable";
      return;
    }
    walk.names.push_back(name);
    walk.payloads.push_back(result.payload);
    if (result.fields && result.fields->previous) {
      fetch(*result.fields->previous,
            [this, key](const ContentName& n, const FetchResult& r) {
              on_feed_entry(key, n, r);
            });
      return;
    }
    walk.reached_head = true;
    walk.done = true;
  }

  // ---- file reads ----

  void on_file_first(const ContentName& first, const FetchResult& result) {
    FileReadResult& read = file_reads_[first];
    if (result.outcome != FetchResult::Outcome::Ok ||
        result.decrypt != FetchResult::Decrypt::Ok || !result.fields ||
        !result.fields->segment_seed || !result.fields->number_of_segments) {
      read.done = true;
      return;
    }
    read.expected = *result.fields->number_of_segments;
    read.chunks[1] = result.payload;
    if (read.expected == 1) {
      read.done = true;
      read.ok = true;
      read.data = result.payload;
      return;
    }
    FragmentSet set{folder_of(first), *result.fields->segment_seed, read.expected};
    for (std::uint32_t i = 2; i <= read.expected; ++i) {
      // Fragments download in parallel; names derive from the segment seed.
      fetch(set.name_of(i), [this, first, i](const ContentName&, const FetchResult& r) {
        on_file_chunk(first, i, r);
      });
    }
  }

  void on_file_chunk(const ContentName& first, std::uint32_t i, const FetchResult& result) {
    auto it = file_reads_.find(first);
    if (it == file_reads_.end() || it->second.done) {
      return;
    }
    FileReadResult& read = it->second;
    if (result.outcome != FetchResult::Outcome::Ok ||
        result.decrypt != FetchResult::Decrypt::Ok) {
      read.done = true;
      return;
    }
    read.chunks[i] = result.payload;
    if (read.chunks.size() == read.expected) {
      read.data = reassemble_fragments(read.chunks);
      read.ok = true;
      read.done = true;
    }
  }

  ButlerConfig config_;
  crypto::Identity identity_;
  AttributeAuthority authority_;
  ObjectBuilder builder_;

  std::map<ContentName, OwnedRecord> owned_;
  std::map<std::string, FeedState> feeds_;
  std::map<FolderName, TuChannel> tu_channels_;
  std::map<ContentName, Expansion> expanded_;
  std::map<FolderName, std::vector<Grant>> granted_;

  std::map<std::string, AppState> apps_;
  std::map<std::uint64_t, AppRecord> records_;
  std::uint64_t next_record_id_ = 1;

  RoutingTable routes_;
  std::map<std::string, KeyRing> rings_;
  std::map<std::uint64_t, PendingFetch> fetches_;
  std::map<std::uint64_t, std::uint64_t> wire_to_fetch_;
  std::map<std::string, PendingResolve> resolves_;
  std::map<std::uint64_t, std::string> wire_to_resolve_;
  std::map<ContentName, FetchResult> fetch_log_;
  std::map<std::string, FeedReadResult> feed_reads_;
  std::map<ContentName, FileReadResult> file_reads_;
  std::uint64_t fetch_sequence_ = 0;
  std::uint64_t wire_sequence_ = 0;
};

} // namespace warp
