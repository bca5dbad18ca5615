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
#include <limits>

#include "warp/certificate.hpp"
#include "warp/netsim.hpp"

namespace warp {

struct DistributorConfig {
  SimTime tau_freshness = 30 * kMinute; // serve only if the TU was checked this recently
  SimTime delta_rbw = 10 * kSecond;     // request-ban window length
  int p_min = 3;                        // popularity threshold for caching
  bool prefetch = false;                // fetch ADDed / UPDATEd content eagerly
  std::size_t cache_capacity = 4096;    // LRU bound
  SimTime popularity_window = kHour;
  SimTime request_timeout = 30 * kSecond;
};

// Cache node. Serving follows the thread-update discipline: a cached object
// is only handed out while its governing TU has been read within the
// freshness window; otherwise the TU feed is consumed first and invalidations
// applied. Cache misses are satisfied with a single upstream fetch from the
// producer butler (the root source), never more.
class Distributor : public Node {
public:
  Distributor(SimNetwork& net, NodeId id, std::string label, DistributorConfig config = {})
      : Node(net, id, std::move(label)), config_(config),
        identity_(net.make_identity("ia", this->label())) {
    net.register_identity(identity_.qualified(), this->id(), identity_.keys.public_key,
                          identity_.ia_certificate);
  }

  const DistributorConfig& config() const { return config_; }
  const crypto::Identity& identity() const { return identity_; }

  // --- certificates ---------------------------------------------------------

  void accept_certificate(const DistributionCertificate& cert) {
    const auto* entry = net().find_identity(cert.identity);
    if (!entry) {
      throw BadCertificate("unknown producer identity " + cert.identity);
    }
    if (!verify_certificate(cert, entry->public_key)) {
      throw BadCertificate("certificate signature does not verify");
    }
    if (now() >= cert.expiry) {
      throw Expired("certificate expired at " + std::to_string(cert.expiry));
    }
    certs_[cert.folder] = cert;
    for (const auto& key : cert.distributor_keys) {
      dist_ring_.insert(key);
    }
  }

  const DistributionCertificate* covering_cert(const FolderName& folder, SimTime at) const {
    const DistributionCertificate* best = nullptr;
    for (const auto& [f, cert] : certs_) {
      if (cert.expiry > at && is_prefix_of(f, folder)) {
        if (!best || f.folders.size() > best->folder.folders.size()) {
          best = &cert;
        }
      }
    }
    return best;
  }

  bool covers(const ContentName& name, SimTime at) const {
    return covering_cert(folder_of(name), at) != nullptr;
  }

  const KeyRing& distributor_ring() const { return dist_ring_; }

  // --- request-ban window ---------------------------------------------------

  // Extra delay the window imposes given the trailing fail/success counts.
  static SimTime rbw_delay(std::uint64_t failed, std::uint64_t succeeded, SimTime delta) {
    return static_cast<SimTime>(failed) * delta / (1 + static_cast<SimTime>(succeeded));
  }

  SimTime rbw_on_request(const std::string& peer, bool success, SimTime at) {
    RbwPeer& p = rbw_[peer];
    while (!p.log.empty() && p.log.front().first + config_.delta_rbw <= at) {
      p.log.pop_front();
    }
    p.log.emplace_back(at, success);
    std::uint64_t failed = 0;
    std::uint64_t succeeded = 0;
    for (const auto& [_, ok] : p.log) {
      (ok ? succeeded : failed)++;
    }
    p.next_allowed = std::max(p.next_allowed, at + rbw_delay(failed, succeeded, config_.delta_rbw));
    return p.next_allowed;
  }

  SimTime rbw_next_allowed(const std::string& peer) const {
    auto it = rbw_.find(peer);
    return it == rbw_.end() ? 0 : it->second.next_allowed;
  }

  bool rbw_allows(const std::string& peer, SimTime at) const {
    return at >= rbw_next_allowed(peer);
  }

  // --- popularity -----------------------------------------------------------

  void note_request(const ContentName& name, SimTime at) {
    auto& log = popularity_[name];
    while (!log.empty() && log.front() + config_.popularity_window <= at) {
      log.pop_front();
    }
    log.push_back(at);
  }

  bool should_cache(const ContentName& name, SimTime at) const {
    auto it = popularity_.find(name);
    if (it == popularity_.end()) {
      return false;
    }
    int live = 0;
    for (SimTime t : it->second) {
      if (t + config_.popularity_window > at) {
        ++live;
      }
    }
    return live >= config_.p_min;
  }

  // --- content store --------------------------------------------------------

  bool has_cached(const ContentName& name) const { return store_.contains(name); }
  std::size_t cache_size() const { return store_.size(); }
  bool is_blocklisted(const ContentName& name) const { return blocklist_.contains(name); }

  bool is_following(const FolderName& governed) const {
    auto it = tu_state_.find(governed);
    return it != tu_state_.end() && it->second.following;
  }

  SimTime tu_last_checked(const FolderName& governed) const {
    auto it = tu_state_.find(governed);
    return it == tu_state_.end() ? kNever : it->second.last_checked;
  }

  // A cached object is fresh if it was validated against the root source, or
  // its governing TU channel was read, within the freshness window. Freshness
  // is strictly per channel: a parent channel's read still applies child
  // invalidations (bubbled entries are consumed during the walk) but never
  // vouches for a child channel's completeness.
  bool fresh(const ContentName& name, SimTime at) const {
    auto it = store_.find(name);
    if (it == store_.end()) {
      return false;
    }
    SimTime best = it->second.validated_at;
    auto tu = tu_state_.find(folder_of(name));
    if (tu != tu_state_.end()) {
      best = std::max(best, tu->second.last_checked);
    }
    return best != kNever && best + config_.tau_freshness > at;
  }

  // --- thread-update commands -----------------------------------------------

  void process_tu_command(const ThreadUpdateCommand& cmd) {
    metrics().tu_commands_applied++;
    switch (cmd.kind) {
    case ThreadUpdateCommand::Kind::Add:
      feed_order_[cmd.x] = ++add_sequence_;
      if (config_.prefetch && !is_tu_folder(folder_of(cmd.x))) {
        start_prefetch(cmd.x);
      }
      return;
    case ThreadUpdateCommand::Kind::Delete:
      purge(cmd.x);
      blocklist_.insert(cmd.x); // never distributed again
      return;
    case ThreadUpdateCommand::Kind::Update:
      purge(cmd.x);
      if (config_.prefetch && cmd.y) {
        start_prefetch(*cmd.y);
      }
      return;
    case ThreadUpdateCommand::Kind::Cut:
      apply_cut(cmd);
      return;
    }
  }

  // --- simulator entry points ------------------------------------------------

  void on_message(NodeId from, const Message& msg, SimTime at) override {
    if (const auto* req = std::get_if<RequestMsg>(&msg)) {
      handle_request(from, *req, at);
    } else if (const auto* data = std::get_if<DataMsg>(&msg)) {
      handle_data(*data, at);
    } else if (const auto* res = std::get_if<ResolveMsg>(&msg)) {
      handle_resolve(from, *res, at);
    }
    // Distributors ignore NOTIFY and key traffic.
  }

  void on_timer(std::uint64_t token, SimTime at) override {
    auto it = pending_upstream_.find(token);
    if (it == pending_upstream_.end()) {
      return; // answered in time
    }
    PendingUpstream pending = it->second;
    pending_upstream_.erase(it);
    upstream_failed(pending, at);
  }

private:
  static constexpr SimTime kNever = std::numeric_limits<SimTime>::min();

  struct CachedObject {
    NetworkObject object;
    SimTime cached_at = 0;
    SimTime validated_at = 0; // last confirmation against the root source
  };

  struct TuState {
    bool following = false;
    std::optional<ContentName> cursor; // last consumed entry
    SimTime last_checked = kNever;
  };

  struct RbwPeer {
    SimTime next_allowed = 0;
    std::deque<std::pair<SimTime, bool>> log;
  };

  struct PendingServe {
    NodeId requester = 0;
    std::uint64_t request_id = 0;
    ContentName name;
    SimTime arrived = 0;
    int upstream_fetches = 0;
    bool tallied = false; // cache hit/miss counted
  };

  struct PendingUpstream {
    enum class Purpose { Content, TuEntry, Prefetch };
    Purpose purpose = Purpose::Content;
    std::uint64_t serve_key = 0; // Content
    FolderName refresh_target;   // TuEntry
    ContentName name;
  };

  struct TuRefresh {
    FolderName target;                // channel that triggered the refresh
    std::deque<ContentName> to_fetch; // walk frontier, feed order
    std::vector<std::uint64_t> waiting_serves;
  };

  // ---- request path ----

  void handle_request(NodeId from, const RequestMsg& req, SimTime at) {
    const std::string& peer = net().node(from)->label();
    if (!rbw_allows(peer, at)) {
      metrics().rbw_bans++;
      SimTime next = rbw_on_request(peer, false, at);
      send(from, DataMsg{req.request_id, req.name, DataStatus::Banned, std::nullopt, next});
      return;
    }
    note_request(req.name, at);
    std::uint64_t key = ++serve_sequence_;
    pending_serves_[key] = PendingServe{from, req.request_id, req.name, at};
    continue_serve(key, at);
  }

  void continue_serve(std::uint64_t key, SimTime at) {
    PendingServe& serve = pending_serves_.at(key);
    const ContentName& name = serve.name;
    if (blocklist_.contains(name) || !covers(name, at)) {
      finish(key, DataStatus::NotFound, nullptr, at);
      return;
    }
    auto it = store_.find(name);
    if (it == store_.end()) {
      if (!serve.tallied) {
        serve.tallied = true;
        metrics().cache_misses++;
      }
      start_upstream_fetch(key, at);
      return;
    }
    if (!serve.tallied) {
      serve.tallied = true;
      metrics().cache_hits++;
    }
    if (fresh(name, at)) {
      touch_lru(name);
      finish(key, DataStatus::Ok, &it->second.object, at);
      return;
    }
    start_tu_refresh(key, at);
  }

  void finish(std::uint64_t key, DataStatus status, const NetworkObject* obj, SimTime at) {
    PendingServe serve = pending_serves_.at(key);
    pending_serves_.erase(key);
    const std::string& peer = net().node(serve.requester)->label();
    if (status == DataStatus::Ok) {
      // Serve-time staleness self-check (the acceptance suite pins this at 0):
      // either this serve was backed by a root fetch just now, or the cache
      // entry is fresh under tau.
      if (serve.upstream_fetches == 0 && !fresh(serve.name, at)) {
        metrics().stale_serves++;
      }
      metrics().serves_ok++;
      metrics().upstream_per_serve_max = std::max(
          metrics().upstream_per_serve_max, static_cast<std::uint64_t>(serve.upstream_fetches));
      SimTime next = rbw_on_request(peer, true, at);
      send(serve.requester,
           DataMsg{serve.request_id, serve.name, DataStatus::Ok, *obj, next});
    } else {
      metrics().serves_notfound++;
      SimTime next = rbw_on_request(peer, false, at);
      send(serve.requester, DataMsg{serve.request_id, serve.name, status, std::nullopt, next});
    }
  }

  // ---- upstream fetch (single, to the producer butler) ----

  std::optional<NodeId> producer_node(const ContentName& name) const {
    const auto* entry = net().find_identity(name.producer());
    return entry ? std::optional(entry->node) : std::nullopt;
  }

  void start_upstream_fetch(std::uint64_t key, SimTime at) {
    PendingServe& serve = pending_serves_.at(key);
    auto upstream = producer_node(serve.name);
    if (!upstream) {
      finish(key, DataStatus::NotFound, nullptr, at);
      return;
    }
    serve.upstream_fetches++;
    metrics().upstream_fetches++;
    std::uint64_t rid = next_wire_id();
    PendingUpstream pending;
    pending.purpose = PendingUpstream::Purpose::Content;
    pending.serve_key = key;
    pending.name = serve.name;
    pending_upstream_[rid] = pending;
    send(*upstream, RequestMsg{rid, serve.name});
    set_timer(at + config_.request_timeout, rid);
  }

  void handle_data(const DataMsg& data, SimTime at) {
    auto it = pending_upstream_.find(data.request_id);
    if (it == pending_upstream_.end()) {
      return; // late reply after timeout
    }
    PendingUpstream pending = it->second;
    pending_upstream_.erase(it);
    cancel_timer(data.request_id);

    if (data.status != DataStatus::Ok || !data.object ||
        !verify_producer_signature(*data.object)) {
      upstream_failed(pending, at);
      return;
    }
    const NetworkObject& obj = *data.object;

    switch (pending.purpose) {
    case PendingUpstream::Purpose::Content: {
      std::uint64_t key = pending.serve_key;
      if (!pending_serves_.contains(key)) {
        return;
      }
      finish(key, DataStatus::Ok, &obj, at);
      // Steps 7..10: keep popular content and make sure its TU is followed.
      if (should_cache(obj.content_name, at)) {
        ensure_following(obj, at);
        cache_insert(obj, at);
      }
      return;
    }
    case PendingUpstream::Purpose::TuEntry:
      consume_tu_entry(pending.refresh_target, obj, at);
      return;
    case PendingUpstream::Purpose::Prefetch:
      if (covers(obj.content_name, at) && !blocklist_.contains(obj.content_name)) {
        cache_insert(obj, at);
      }
      return;
    }
  }

  void upstream_failed(const PendingUpstream& pending, SimTime at) {
    switch (pending.purpose) {
    case PendingUpstream::Purpose::Content:
      if (pending_serves_.contains(pending.serve_key)) {
        finish(pending.serve_key, DataStatus::NotFound, nullptr, at);
      }
      return;
    case PendingUpstream::Purpose::TuEntry:
      // Fail closed: the channel stays unrefreshed, waiting serves miss to
      // the root source rather than risking a stale copy.
      fail_refresh(pending.refresh_target, at);
      return;
    case PendingUpstream::Purpose::Prefetch:
      return;
    }
  }

  bool verify_producer_signature(const NetworkObject& obj) const {
    const auto* entry = net().find_identity(obj.content_name.producer());
    return entry && verify_object(obj, entry->public_key);
  }

  // ---- cache ----

  void cache_insert(const NetworkObject& obj, SimTime at) {
    const ContentName& name = obj.content_name;
    auto existing = store_.find(name);
    if (existing == store_.end() && store_.size() >= config_.cache_capacity && !lru_.empty()) {
      store_.erase(lru_.front());
      lru_.erase(lru_.begin());
    }
    store_[name] = CachedObject{obj, at, at};
    touch_lru(name);
  }

  void touch_lru(const ContentName& name) {
    auto it = std::find(lru_.begin(), lru_.end(), name);
    if (it != lru_.end()) {
      lru_.erase(it);
    }
    lru_.push_back(name);
  }

  void purge(const ContentName& name) {
    store_.erase(name);
    auto it = std::find(lru_.begin(), lru_.end(), name);
    if (it != lru_.end()) {
      lru_.erase(it);
    }
  }

  void apply_cut(const ThreadUpdateCommand& cmd) {
    purge(cmd.x);
    if (cmd.y) {
      purge(*cmd.y);
    }
    auto ox = feed_order_.find(cmd.x);
    auto oy = cmd.y ? feed_order_.find(*cmd.y) : feed_order_.end();
    FolderName folder = folder_of(cmd.x);
    std::vector<ContentName> doomed;
    for (const auto& [name, cached] : store_) {
      if (folder_of(name) != folder) {
        continue;
      }
      auto on = feed_order_.find(name);
      if (ox != feed_order_.end() && oy != feed_order_.end() && on != feed_order_.end()) {
        if (on->second >= ox->second && on->second <= oy->second) {
          doomed.push_back(name);
        }
      } else {
        // Interval membership undecidable (cached before we followed the
        // channel): fail closed and purge the folder-mate.
        doomed.push_back(name);
      }
    }
    for (const auto& name : doomed) {
      purge(name);
    }
    if (config_.prefetch) {
      if (cmd.x_prime) {
        start_prefetch(*cmd.x_prime);
      }
      if (cmd.y_prime) {
        start_prefetch(*cmd.y_prime);
      }
    }
  }

  void start_prefetch(const ContentName& name) {
    auto upstream = producer_node(name);
    if (!upstream) {
      return;
    }
    std::uint64_t rid = next_wire_id();
    PendingUpstream pending;
    pending.purpose = PendingUpstream::Purpose::Prefetch;
    pending.name = name;
    pending_upstream_[rid] = pending;
    send(*upstream, RequestMsg{rid, name});
    set_timer(now() + config_.request_timeout, rid);
  }

  // ---- thread-update refresh ----

  // Nearest channel at-or-above `folder` we already track; otherwise nullopt.
  std::optional<FolderName> nearest_channel(FolderName folder) const {
    while (true) {
      if (tu_state_.contains(folder)) {
        return folder;
      }
      if (folder.folders.empty()) {
        return std::nullopt;
      }
      folder = parent_folder(folder);
    }
  }

  void ensure_following(const NetworkObject& obj, SimTime at) {
    FolderName governed = folder_of(obj.content_name);
    auto channel = nearest_channel(governed);
    if (channel && tu_state_.at(*channel).following) {
      return; // the TU or a parent TU is already on the follow list
    }
    auto fields = try_open_distributor(obj, dist_ring_);
    if (!fields) {
      return; // no usable D_K for this folder's policy
    }
    TuState& state = tu_state_[governed];
    state.following = true;
    if (!state.cursor) {
      state.cursor = fields->thread_update_pointer;
      state.last_checked = at; // the root source just handed us this object
    }
  }

  void start_tu_refresh(std::uint64_t serve_key, SimTime at) {
    PendingServe& serve = pending_serves_.at(serve_key);
    FolderName governed = folder_of(serve.name);
    std::optional<ContentName> start;
    auto state_it = tu_state_.find(governed);
    if (state_it != tu_state_.end() && state_it->second.cursor) {
      start = state_it->second.cursor;
    } else {
      // Derive the channel from the cached object's own distributor fields.
      auto cached = store_.find(serve.name);
      if (cached != store_.end()) {
        if (auto fields = try_open_distributor(cached->second.object, dist_ring_)) {
          TuState& state = tu_state_[governed];
          if (!state.cursor) {
            state.cursor = fields->thread_update_pointer;
          }
          start = state.cursor;
        }
      }
    }
    if (!start) {
      // No way to read the channel: treat the cached copy as stale and go to
      // the root source instead.
      purge(serve.name);
      start_upstream_fetch(serve_key, at);
      return;
    }
    auto active = refreshes_.find(governed);
    if (active != refreshes_.end()) {
      active->second.waiting_serves.push_back(serve_key);
      return;
    }
    TuRefresh refresh;
    refresh.target = governed;
    refresh.waiting_serves.push_back(serve_key);
    refresh.to_fetch.push_back(*start);
    refreshes_[governed] = std::move(refresh);
    fetch_next_tu_entry(governed, at);
  }

  void fetch_next_tu_entry(const FolderName& target, SimTime at) {
    TuRefresh& refresh = refreshes_.at(target);
    if (refresh.to_fetch.empty()) {
      complete_refresh(target, at);
      return;
    }
    ContentName entry = refresh.to_fetch.front();
    refresh.to_fetch.pop_front();
    auto upstream = producer_node(entry);
    if (!upstream) {
      fail_refresh(target, at);
      return;
    }
    std::uint64_t rid = next_wire_id();
    PendingUpstream pending;
    pending.purpose = PendingUpstream::Purpose::TuEntry;
    pending.refresh_target = target;
    pending.name = entry;
    pending_upstream_[rid] = pending;
    send(*upstream, RequestMsg{rid, entry});
    set_timer(at + config_.request_timeout, rid);
  }

  void consume_tu_entry(const FolderName& target, const NetworkObject& entry, SimTime at) {
    auto refresh_it = refreshes_.find(target);
    if (refresh_it == refreshes_.end()) {
      return;
    }
    TuRefresh& refresh = refresh_it->second;

    auto fields = try_open_follower(entry, dist_ring_);
    if (!fields) {
      fail_refresh(target, at);
      return;
    }
    FolderName governed;
    try {
      governed = tu_governed_folder(folder_of(entry.content_name));
    } catch (const MalformedName&) {
      fail_refresh(target, at);
      return;
    }
    TuState& state = tu_state_[governed];

    if (!consumed_tu_.contains(entry.content_name)) {
      Bytes payload;
      try {
        payload = open_payload(entry, *fields);
        ThreadUpdateCommand cmd = ThreadUpdateCommand::decode(payload);
        process_tu_command(cmd);
        // A bubbled ADD of a child channel's entry: consume it as part of the
        // same walk so invalidations below the target are applied too.
        if (cmd.kind == ThreadUpdateCommand::Kind::Add && is_tu_folder(folder_of(cmd.x))) {
          refresh.to_fetch.push_back(cmd.x);
        }
      } catch (const Error&) {
        fail_refresh(target, at);
        return;
      }
      consumed_tu_.insert(entry.content_name);
      state.cursor = entry.content_name;
    }
    if (fields->next) {
      // Chain continuation takes priority over queued bubbles so commands of
      // one channel apply in feed order.
      refresh.to_fetch.push_front(*fields->next);
    }
    fetch_next_tu_entry(target, at);
  }

  void complete_refresh(const FolderName& target, SimTime at) {
    TuRefresh refresh = std::move(refreshes_.at(target));
    refreshes_.erase(target);
    tu_state_[target].last_checked = at;
    for (std::uint64_t key : refresh.waiting_serves) {
      if (pending_serves_.contains(key)) {
        continue_serve(key, at);
      }
    }
  }

  void fail_refresh(const FolderName& target, SimTime at) {
    auto it = refreshes_.find(target);
    if (it == refreshes_.end()) {
      return;
    }
    TuRefresh refresh = std::move(it->second);
    refreshes_.erase(it);
    for (std::uint64_t key : refresh.waiting_serves) {
      if (!pending_serves_.contains(key)) {
        continue;
      }
      // The cached copy cannot be proven current; drop it and go to the root.
      purge(pending_serves_.at(key).name);
      continue_serve(key, at);
    }
  }

  // ---- resolve service (distributor for a parent folder) ----

  void handle_resolve(NodeId from, const ResolveMsg& res, SimTime at) {
    const DistributionCertificate* cert = covering_cert(res.folder, at);
    if (!cert) {
      send(from, ResolveReplyMsg{res.resolve_id, ResolveStatus::Rejected, res.folder, {}, 0});
      return;
    }
    std::vector<NodeId> servers;
    for (const auto& identity : cert->distributors) {
      if (const auto* entry = net().find_identity(identity)) {
        if (std::find(servers.begin(), servers.end(), entry->node) == servers.end()) {
          servers.push_back(entry->node);
        }
      }
    }
    SimTime ttl = std::min(cert->expiry - at, kHour);
    send(from, ResolveReplyMsg{res.resolve_id, ResolveStatus::Ok, cert->folder,
                               std::move(servers), ttl});
  }

  std::uint64_t next_wire_id() {
    return (static_cast<std::uint64_t>(id()) << 40) | ++wire_sequence_;
  }

  DistributorConfig config_;
  crypto::Identity identity_;

  std::map<ContentName, CachedObject> store_;
  std::vector<ContentName> lru_; // front = oldest
  std::set<ContentName> blocklist_;
  std::map<ContentName, std::uint64_t> feed_order_; // ADD sequence per name
  std::uint64_t add_sequence_ = 0;

  std::map<FolderName, TuState> tu_state_;
  std::map<FolderName, TuRefresh> refreshes_;
  std::set<ContentName> consumed_tu_;

  std::map<std::string, RbwPeer> rbw_;
  std::map<ContentName, std::deque<SimTime>> popularity_;

  std::map<FolderName, DistributionCertificate> certs_;
  KeyRing dist_ring_;

  std::map<std::uint64_t, PendingServe> pending_serves_;
  std::map<std::uint64_t, PendingUpstream> pending_upstream_;
  std::uint64_t serve_sequence_ = 0;
  std::uint64_t wire_sequence_ = 0;
};

} // namespace warp
