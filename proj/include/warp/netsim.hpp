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

#include <algorithm>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "warp/objects.hpp"

// Deterministic discrete-event network. The simulator owns the virtual clock
// and delivers messages serially; nodes are single-threaded event processors
// that interact only by sending messages. Identical (scenario, seed) pairs
// replay to byte-identical transcripts: per-pair latencies and per-node rngs
// are derived from the master seed order-independently, and queue ties break
// on the global send sequence number.

namespace warp {

using NodeId = std::uint32_t;

enum class DataStatus : std::uint8_t { Ok, NotFound, Banned };

struct RequestMsg {
  std::uint64_t request_id = 0;
  ContentName name;
};

struct DataMsg {
  std::uint64_t request_id = 0;
  ContentName name;
  DataStatus status = DataStatus::Ok;
  std::optional<NetworkObject> object;
  SimTime next_allowed = 0; // suggested earliest next request (RBW hint)
};

struct ResolveMsg {
  std::uint64_t resolve_id = 0;
  FolderName folder;
};

enum class ResolveStatus : std::uint8_t { Ok, Rejected };

struct ResolveReplyMsg {
  std::uint64_t resolve_id = 0;
  ResolveStatus status = ResolveStatus::Ok;
  FolderName covered;          // folder the server list is valid for
  std::vector<NodeId> servers; // distributors, or the butler itself
  SimTime ttl = 0;
};

struct NotifyMsg {
  std::string sender; // qualified identity
  ContentName content_name;
  Bytes checksum;
  Bytes signature; // by sender over (name, checksum)
  std::string application;
};

struct KeyRequestMsg {
  std::uint64_t request_id = 0;
  std::string issuer; // whose attribute keys are wanted
  std::vector<std::string> attributes;
};

struct KeyReplyMsg {
  std::uint64_t request_id = 0;
  bool granted = false;
  std::string issuer;
  std::vector<AttributeKey> keys;
};

using Message = std::variant<RequestMsg, DataMsg, ResolveMsg, ResolveReplyMsg, NotifyMsg,
                             KeyRequestMsg, KeyReplyMsg>;

inline const char* message_type_name(const Message& msg) {
  switch (msg.index()) {
  case 0: return "REQUEST";
  case 1: return "DATA";
  case 2: return "RESOLVE";
  case 3: return "RESOLVE_REPLY";
  case 4: return "NOTIFY";
  case 5: return "KEY_REQUEST";
  case 6: return "KEY_REPLY";
  }
  return "?";
}

inline std::string message_subject(const Message& msg) {
  if (const auto* m = std::get_if<RequestMsg>(&msg)) {
    return format_name(m->name);
  }
  if (const auto* m = std::get_if<DataMsg>(&msg)) {
    return format_name(m->name);
  }
  if (const auto* m = std::get_if<ResolveMsg>(&msg)) {
    return format_folder(m->folder);
  }
  if (const auto* m = std::get_if<ResolveReplyMsg>(&msg)) {
    return format_folder(m->covered);
  }
  if (const auto* m = std::get_if<NotifyMsg>(&msg)) {
    return format_name(m->content_name);
  }
  if (const auto* m = std::get_if<KeyRequestMsg>(&msg)) {
    return m->issuer;
  }
  if (const auto* m = std::get_if<KeyReplyMsg>(&msg)) {
    return m->issuer;
  }
  return "-";
}

struct Metrics {
  std::uint64_t messages_total = 0;
  std::uint64_t msg_request = 0;
  std::uint64_t msg_data = 0;
  std::uint64_t msg_resolve = 0;
  std::uint64_t msg_resolve_reply = 0;
  std::uint64_t msg_notify = 0;
  std::uint64_t msg_key_request = 0;
  std::uint64_t msg_key_reply = 0;
  std::uint64_t resolves = 0;
  std::uint64_t resolve_roundtrips = 0;
  std::uint64_t resolve_roundtrips_max = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  std::uint64_t stale_serves = 0;
  std::uint64_t rbw_bans = 0;
  std::uint64_t tu_commands_applied = 0;
  std::uint64_t serves_ok = 0;
  std::uint64_t serves_notfound = 0;
  std::uint64_t upstream_fetches = 0;
  std::uint64_t upstream_per_serve_max = 0;

  Metrics& operator+=(const Metrics& o) {
    messages_total += o.messages_total;
    msg_request += o.msg_request;
    msg_data += o.msg_data;
    msg_resolve += o.msg_resolve;
    msg_resolve_reply += o.msg_resolve_reply;
    msg_notify += o.msg_notify;
    msg_key_request += o.msg_key_request;
    msg_key_reply += o.msg_key_reply;
    resolves += o.resolves;
    resolve_roundtrips += o.resolve_roundtrips;
    resolve_roundtrips_max = std::max(resolve_roundtrips_max, o.resolve_roundtrips_max);
    cache_hits += o.cache_hits;
    cache_misses += o.cache_misses;
    stale_serves += o.stale_serves;
    rbw_bans += o.rbw_bans;
    tu_commands_applied += o.tu_commands_applied;
    serves_ok += o.serves_ok;
    serves_notfound += o.serves_notfound;
    upstream_fetches += o.upstream_fetches;
    upstream_per_serve_max = std::max(upstream_per_serve_max, o.upstream_per_serve_max);
    return *this;
  }

  // Stable key order for reports and the machine-readable file format.
  std::vector<std::pair<std::string, std::uint64_t>> entries() const {
    return {
        {"messages_total", messages_total},
        {"msg_request", msg_request},
        {"msg_data", msg_data},
        {"msg_resolve", msg_resolve},
        {"msg_resolve_reply", msg_resolve_reply},
        {"msg_notify", msg_notify},
        {"msg_key_request", msg_key_request},
        {"msg_key_reply", msg_key_reply},
        {"resolves", resolves},
        {"resolve_roundtrips", resolve_roundtrips},
        {"resolve_roundtrips_max", resolve_roundtrips_max},
        {"cache_hits", cache_hits},
        {"cache_misses", cache_misses},
        {"stale_serves", stale_serves},
        {"rbw_bans", rbw_bans},
        {"tu_commands_applied", tu_commands_applied},
        {"serves_ok", serves_ok},
        {"serves_notfound", serves_notfound},
        {"upstream_fetches", upstream_fetches},
        {"upstream_per_serve_max", upstream_per_serve_max},
    };
  }

  bool set(const std::string& key, std::uint64_t value) {
    std::uint64_t* fields[] = {
        &messages_total, &msg_request, &msg_data, &msg_resolve, &msg_resolve_reply,
        &msg_notify, &msg_key_request, &msg_key_reply, &resolves, &resolve_roundtrips,
        &resolve_roundtrips_max, &cache_hits, &cache_misses, &stale_serves, &rbw_bans,
        &tu_commands_applied, &serves_ok, &serves_notfound, &upstream_fetches,
        &upstream_per_serve_max};
    auto names = entries();
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i].first == key) {
        *fields[i] = value;
        return true;
      }
    }
    return false;
  }

  std::optional<std::uint64_t> get(const std::string& key) const {
    for (const auto& [k, v] : entries()) {
      if (k == key) {
        return v;
      }
    }
    return std::nullopt;
  }
};

// Routing table: folder -> distributor entries with expiry; lookup returns
// the longest-prefix unexpired match. Several servers for the same folder are
// spread deterministically by name hash.
class RoutingTable {
public:
  void insert(const FolderName& folder, NodeId node, SimTime expiry) {
    for (auto& e : entries_) {
      if (e.folder == folder && e.node == node) {
        e.expiry = std::max(e.expiry, expiry);
        return;
      }
    }
    entries_.push_back(Entry{folder, node, expiry});
  }

  std::optional<NodeId> lookup(const ContentName& name, SimTime now) const {
    std::size_t best_depth = 0;
    bool found = false;
    for (const auto& e : entries_) {
      if (e.expiry > now && is_prefix_of(e.folder, name)) {
        best_depth = found ? std::max(best_depth, e.folder.folders.size())
                           : e.folder.folders.size();
        found = true;
      }
    }
    if (!found) {
      return std::nullopt;
    }
    std::vector<NodeId> candidates;
    for (const auto& e : entries_) {
      if (e.expiry > now && e.folder.folders.size() == best_depth &&
          is_prefix_of(e.folder, name)) {
        if (std::find(candidates.begin(), candidates.end(), e.node) == candidates.end()) {
          candidates.push_back(e.node);
        }
      }
    }
    return candidates[hash_str(format_name(name)) % candidates.size()];
  }

  void purge_expired(SimTime now) {
    std::erase_if(entries_, [now](const Entry& e) { return e.expiry <= now; });
  }

  std::size_t size() const { return entries_.size(); }

private:
  struct Entry {
    FolderName folder;
    NodeId node;
    SimTime expiry;
  };
  std::vector<Entry> entries_;
};

class SimNetwork;

class Node {
public:
  Node(SimNetwork& net, NodeId id, std::string label);
  virtual ~Node() = default;

  NodeId id() const { return id_; }
  const std::string& label() const { return label_; }
  Metrics& metrics() { return metrics_; }
  const Metrics& metrics() const { return metrics_; }

  virtual void on_message(NodeId from, const Message& msg, SimTime now) = 0;
  virtual void on_timer(std::uint64_t /*token*/, SimTime /*now*/) {}

protected:
  SimTime now() const;
  void send(NodeId to, Message msg);
  void set_timer(SimTime fire_at, std::uint64_t token);
  void cancel_timer(std::uint64_t token);
  Rng& rng() { return rng_; }
  SimNetwork& net() { return *net_; }
  const SimNetwork& net() const { return *net_; }

private:
  SimNetwork* net_;
  NodeId id_;
  std::string label_;
  Rng rng_;
  Metrics metrics_;
};

struct NetworkConfig {
  SimTime latency_lo = 5 * kMillisecond;
  SimTime latency_hi = 50 * kMillisecond;
};

class SimNetwork {
public:
  explicit SimNetwork(std::uint64_t seed, NetworkConfig config = {})
      : seed_(seed), config_(config) {
    crypto::Key256 root{};
    for (int i = 0; i < 8; ++i) {
      root[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(seed >> (8 * i));
    }
    root_key_ = root;
    ia_ = std::make_unique<crypto::IdentityAuthority>(crypto::derive_key(root_key_, "ia-root"));
  }

  SimNetwork(const SimNetwork&) = delete;
  SimNetwork& operator=(const SimNetwork&) = delete;

  std::uint64_t seed() const { return seed_; }
  SimTime now() const { return clock_; }
  const NetworkConfig& config() const { return config_; }

  template <class T, class... Args>
  T& spawn(const std::string& label, Args&&... args) {
    NodeId id = static_cast<NodeId>(nodes_.size());
    auto node = std::make_unique<T>(*this, id, label, std::forward<Args>(args)...);
    T& ref = *node;
    nodes_.push_back(std::move(node));
    return ref;
  }

  Node* node(NodeId id) {
    return id < nodes_.size() ? nodes_[id].get() : nullptr;
  }
  const Node* node(NodeId id) const {
    return id < nodes_.size() ? nodes_[id].get() : nullptr;
  }
  std::size_t node_count() const { return nodes_.size(); }

  const crypto::IdentityAuthority& ia() const { return *ia_; }

  crypto::Identity make_identity(const std::string& ia_name, const std::string& user) const {
    return ia_->issue(ia_name, user,
                      crypto::derive_key(root_key_, "id:" + ia_name + "." + user));
  }

  struct AddressEntry {
    NodeId node;
    Bytes public_key;
    Bytes ia_cert;
  };

  void register_identity(const std::string& qualified, NodeId node, Bytes public_key,
                         Bytes ia_cert) {
    address_book_[qualified] = AddressEntry{node, std::move(public_key), std::move(ia_cert)};
    identity_by_node_[node] = qualified;
  }

  const AddressEntry* find_identity(const std::string& qualified) const {
    auto it = address_book_.find(qualified);
    return it == address_book_.end() ? nullptr : &it->second;
  }

  const std::string* identity_of(NodeId node) const {
    auto it = identity_by_node_.find(node);
    return it == identity_by_node_.end() ? nullptr : &it->second;
  }

  SimTime latency(NodeId from, NodeId to) const {
    if (from == to) {
      return 1 * kMillisecond;
    }
    std::uint64_t span = static_cast<std::uint64_t>(config_.latency_hi - config_.latency_lo) + 1;
    return config_.latency_lo +
           static_cast<SimTime>(mix64(seed_, mix64(from + 1, to + 1)) % span);
  }

  void send(NodeId from, NodeId to, Message msg) {
    if (to >= nodes_.size()) {
      throw UnknownNode("message to unknown node " + std::to_string(to));
    }
    if (down_.contains(from)) {
      return;
    }
    count_send(msg);
    Event ev;
    ev.time = clock_ + latency(from, to);
    ev.seq = ++sequence_;
    ev.kind = Event::Kind::Message;
    ev.from = from;
    ev.to = to;
    ev.msg = std::move(msg);
    queue_.push(std::move(ev));
  }

  void set_timer(NodeId node, SimTime fire_at, std::uint64_t token) {
    Event ev;
    ev.time = std::max(fire_at, clock_);
    ev.seq = ++sequence_;
    ev.kind = Event::Kind::Timer;
    ev.from = node;
    ev.to = node;
    ev.token = token;
    queue_.push(std::move(ev));
  }

  // Cancelled timers are discarded on pop without advancing the clock, so
  // answered-request timeouts do not stretch idle runs.
  void cancel_timer(NodeId node, std::uint64_t token) {
    cancelled_timers_.insert({node, token});
  }

  void set_down(NodeId node, bool down) {
    if (down) {
      down_.insert(node);
    } else {
      down_.erase(node);
    }
  }
  bool is_down(NodeId node) const { return down_.contains(node); }

  bool step() {
    while (!queue_.empty() && queue_.top().kind == Event::Kind::Timer &&
           cancelled_timers_.contains({queue_.top().to, queue_.top().token})) {
      cancelled_timers_.erase({queue_.top().to, queue_.top().token});
      queue_.pop();
    }
    if (queue_.empty()) {
      return false;
    }
    Event ev = queue_.top();
    queue_.pop();
    // Causality: the clock never runs backwards past a scheduled delivery.
    if (ev.time < clock_) {
      throw Error("event scheduled in the past");
    }
    clock_ = ev.time;
    Node* target = nodes_[ev.to].get();
    if (ev.kind == Event::Kind::Timer) {
      target->on_timer(ev.token, clock_);
      return true;
    }
    if (down_.contains(ev.to)) {
      return true; // dropped; never observed, never logged
    }
    log_delivery(ev);
    target->on_message(ev.from, ev.msg, clock_);
    return true;
  }

  void run_until(SimTime t) {
    while (!queue_.empty() && queue_.top().time <= t) {
      step();
    }
    clock_ = std::max(clock_, t);
  }

  void run_idle() {
    while (step()) {
    }
  }

  bool idle() const { return queue_.empty(); }

  Metrics& network_metrics() { return network_metrics_; }

  Metrics collect_metrics() const {
    Metrics total = network_metrics_;
    for (const auto& n : nodes_) {
      total += n->metrics();
    }
    return total;
  }

  const std::vector<std::string>& transcript() const { return transcript_; }

private:
  struct Event {
    SimTime time = 0;
    std::uint64_t seq = 0;
    enum class Kind { Message, Timer } kind = Kind::Message;
    NodeId from = 0;
    NodeId to = 0;
    Message msg;
    std::uint64_t token = 0;
  };

  struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  void count_send(const Message& msg) {
    network_metrics_.messages_total++;
    switch (msg.index()) {
    case 0: network_metrics_.msg_request++; break;
    case 1: network_metrics_.msg_data++; break;
    case 2: network_metrics_.msg_resolve++; break;
    case 3: network_metrics_.msg_resolve_reply++; break;
    case 4: network_metrics_.msg_notify++; break;
    case 5: network_metrics_.msg_key_request++; break;
    case 6: network_metrics_.msg_key_reply++; break;
    }
  }

  void log_delivery(const Event& ev) {
    std::ostringstream line;
    line << ev.time << " | " << nodes_[ev.from]->label() << " | " << nodes_[ev.to]->label()
         << " | " << message_type_name(ev.msg) << " | " << message_subject(ev.msg);
    transcript_.push_back(line.str());
  }

  std::uint64_t seed_;
  NetworkConfig config_;
  crypto::Key256 root_key_{};
  std::unique_ptr<crypto::IdentityAuthority> ia_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::map<std::string, AddressEntry> address_book_;
  std::map<NodeId, std::string> identity_by_node_;
  std::set<NodeId> down_;
  std::set<std::pair<NodeId, std::uint64_t>> cancelled_timers_;
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  SimTime clock_ = 0;
  std::uint64_t sequence_ = 0;
  Metrics network_metrics_;
  std::vector<std::string> transcript_;
};

inline Node::Node(SimNetwork& net, NodeId id, std::string label)
    : net_(&net), id_(id), label_(std::move(label)),
      rng_(mix64(net.seed(), hash_str(label_))) {}

inline SimTime Node::now() const { return net_->now(); }

inline void Node::send(NodeId to, Message msg) { net_->send(id_, to, std::move(msg)); }

inline void Node::set_timer(SimTime fire_at, std::uint64_t token) {
  net_->set_timer(id_, fire_at, token);
}

inline void Node::cancel_timer(std::uint64_t token) { net_->cancel_timer(id_, token); }

} // namespace warp
