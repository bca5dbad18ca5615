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

#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>

#include "warp/butler.hpp"
#include "warp/distributor.hpp"

// Scenario runner: replays line-oriented scripts of timestamped directives on
// the simulator and checks `expect` assertions. The format is diff-friendly:
//
//   t=<seconds> <directive> <args...> [key=value ...] [payload="..."]
//
// Labels bind published content names so later directives can refer to them.

namespace warp {

struct Directive {
  int line = 0;
  SimTime at = 0;
  std::string verb;
  std::vector<std::string> args;
  std::map<std::string, std::string> opts;

  const std::string& arg(std::size_t i) const {
    if (i >= args.size()) {
      throw ParseError("line " + std::to_string(line) + ": missing argument " +
                       std::to_string(i + 1) + " for '" + verb + "'");
    }
    return args[i];
  }

  std::optional<std::string> opt(const std::string& key) const {
    auto it = opts.find(key);
    return it == opts.end() ? std::nullopt : std::optional(it->second);
  }

  std::string opt_or_fail(const std::string& key) const {
    auto v = opt(key);
    if (!v) {
      throw ParseError("line " + std::to_string(line) + ": '" + verb +
                       "' needs " + key + "=...");
    }
    return *v;
  }
};

struct Scenario {
  std::vector<Directive> directives;

  static Scenario parse(std::istream& in) {
    Scenario scenario;
    std::string raw;
    int line_no = 0;
    SimTime previous = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string_view line = raw;
      while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) {
        line.remove_prefix(1);
      }
      if (line.empty() || line.front() == '#') {
        continue;
      }
      Directive d = parse_directive(line, line_no);
      if (d.at < previous) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": timestamps must be non-decreasing");
      }
      previous = d.at;
      scenario.directives.push_back(std::move(d));
    }
    return scenario;
  }

  static Scenario parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
      throw ParseError("cannot open scenario file: " + path);
    }
    return parse(in);
  }

private:
  static Directive parse_directive(std::string_view line, int line_no) {
    std::vector<std::string> tokens = tokenize(line, line_no);
    if (tokens.size() < 2 || !tokens[0].starts_with("t=")) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 't=<seconds> <directive> ...'");
    }
    Directive d;
    d.line = line_no;
    d.at = parse_seconds(tokens[0].substr(2), line_no);
    d.verb = tokens[1];
    for (std::size_t i = 2; i < tokens.size(); ++i) {
      // key=value options have a short lowercase key left of '='; anything
      // else (labels, operators, policy text) is a positional argument.
      std::size_t eq = tokens[i].find('=');
      bool keyed = eq != std::string::npos && eq > 0;
      for (std::size_t c = 0; keyed && c < eq; ++c) {
        char ch = tokens[i][c];
        keyed = (ch >= 'a' && ch <= 'z') || ch == '_';
      }
      if (keyed) {
        d.opts[tokens[i].substr(0, eq)] = tokens[i].substr(eq + 1);
      } else {
        d.args.push_back(tokens[i]);
      }
    }
    return d;
  }

  static SimTime parse_seconds(const std::string& text, int line_no) {
    try {
      std::size_t used = 0;
      double seconds = std::stod(text, &used);
      if (used != text.size() || seconds < 0) {
        throw std::invalid_argument(text);
      }
      return static_cast<SimTime>(seconds * static_cast<double>(kSecond));
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(line_no) + ": bad timestamp '" + text + "'");
    }
  }

  static std::vector<std::string> tokenize(std::string_view line, int line_no) {
    std::vector<std::string> tokens;
    std::string current;
    bool in_quotes = false;
    bool any = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (in_quotes) {
        if (c == '\\' && i + 1 < line.size()) {
          char next = line[++i];
          current += next == 'n' ? '\n' : next;
        } else if (c == '"') {
          in_quotes = false;
        } else {
          current += c;
        }
        continue;
      }
      if (c == '"') {
        in_quotes = true;
        any = true;
      } else if (c == ' ' || c == '\t') {
        if (any || !current.empty()) {
          tokens.push_back(std::move(current));
          current.clear();
          any = false;
        }
      } else {
        current += c;
        any = true;
      }
    }
    if (in_quotes) {
      throw ParseError("line " + std::to_string(line_no) + ": unterminated quote");
    }
    if (any || !current.empty()) {
      tokens.push_back(std::move(current));
    }
    return tokens;
  }
};

struct RunOutcome {
  bool ok = true;
  std::vector<std::pair<int, std::string>> failures; // (line, message)
  Metrics metrics;
  std::vector<std::string> transcript;
};

class ScenarioRunner {
public:
  explicit ScenarioRunner(std::uint64_t seed, NetworkConfig net_config = {})
      : net_(seed, net_config) {}

  SimNetwork& network() { return net_; }

  RunOutcome run(const Scenario& scenario, std::optional<SimTime> until = std::nullopt) {
    RunOutcome outcome;
    for (const Directive& d : scenario.directives) {
      if (until && d.at > *until) {
        break;
      }
      net_.run_until(d.at);
      try {
        execute(d);
      } catch (const ExpectationFailed& e) {
        outcome.failures.emplace_back(d.line, e.what());
      } catch (const Error& e) {
        outcome.failures.emplace_back(d.line,
                                      std::string("directive failed: ") + e.what());
        break;
      }
    }
    if (until) {
      net_.run_until(*until);
    } else {
      net_.run_idle();
    }
    outcome.metrics = net_.collect_metrics();
    outcome.transcript = net_.transcript();
    outcome.ok = outcome.failures.empty() && outcome.metrics.stale_serves == 0;
    return outcome;
  }

private:
  Butler& butler(const std::string& label) {
    auto it = butlers_.find(label);
    if (it == butlers_.end()) {
      throw Error("no such butler: " + label);
    }
    return *it->second;
  }

  Distributor& distributor(const std::string& label) {
    auto it = distributors_.find(label);
    if (it == distributors_.end()) {
      throw Error("no such distributor: " + label);
    }
    return *it->second;
  }

  Node& any_node(const std::string& label) {
    if (auto it = butlers_.find(label); it != butlers_.end()) {
      return *it->second;
    }
    return distributor(label);
  }

  const ContentName& labeled(const std::string& label) const {
    auto it = labels_.find(label);
    if (it == labels_.end()) {
      throw Error("no such content label: " + label);
    }
    return it->second;
  }

  static std::string identity_of_label(const std::string& label) {
    return "ia." + label;
  }

  Policy parse_policy_value(Butler& owner, const std::string& text) {
    // EXCLUDE(category;peer,peer,...) expands to the alias-OR of everybody in
    // the category minus the named peers.
    if (text.starts_with("EXCLUDE(") && text.ends_with(")")) {
      std::string inner = text.substr(8, text.size() - 9);
      std::size_t semi = inner.find(';');
      if (semi == std::string::npos) {
        throw ParseError("EXCLUDE wants 'EXCLUDE(category;peer,...)'");
      }
      std::string category = inner.substr(0, semi);
      std::set<std::string> excluded;
      std::stringstream rest(inner.substr(semi + 1));
      std::string peer;
      while (std::getline(rest, peer, ',')) {
        if (!peer.empty()) {
          excluded.insert(identity_of_label(peer));
        }
      }
      return owner.exclusion_policy(category, excluded);
    }
    return Policy::parse(text);
  }

  FolderName folder_for(Butler& owner, const std::string& spec) {
    // "<app>" is the application prefix, "<app>/<feed>" a feed's folder.
    std::size_t slash = spec.find('/');
    if (slash == std::string::npos) {
      return owner.app_prefix(spec);
    }
    return owner.feed_folder(spec.substr(0, slash), spec.substr(slash + 1));
  }

  void execute(const Directive& d) {
    if (d.verb == "create_butler") {
      ButlerConfig cfg;
      if (auto k = d.opt("k")) {
        cfg.bucket_count = std::stoi(*k);
      }
      if (auto eager = d.opt("eager")) {
        cfg.eager_reencrypt = *eager == "1";
      }
      const std::string& label = d.arg(0);
      butlers_[label] = &net_.spawn<Butler>(label, "ia", label, cfg);
    } else if (d.verb == "create_distributor") {
      DistributorConfig cfg;
      if (auto tau = d.opt("tau")) {
        cfg.tau_freshness = std::stoll(*tau) * kSecond;
      }
      if (auto delta = d.opt("delta")) {
        cfg.delta_rbw = std::stoll(*delta) * kSecond;
      }
      if (auto p_min = d.opt("p_min")) {
        cfg.p_min = std::stoi(*p_min);
      }
      if (auto prefetch = d.opt("prefetch")) {
        cfg.prefetch = *prefetch == "1";
      }
      const std::string& label = d.arg(0);
      distributors_[label] = &net_.spawn<Distributor>(label, cfg);
    } else if (d.verb == "create_app") {
      Butler& b = butler(d.arg(0));
      b.register_app(d.arg(1), parse_policy_value(b, d.opt_or_fail("fp")));
    } else if (d.verb == "new_feed") {
      Butler& b = butler(d.arg(0));
      std::optional<Policy> dp;
      if (auto text = d.opt("dp")) {
        dp = parse_policy_value(b, *text);
      }
      b.create_feed(d.arg(1), d.arg(2), parse_policy_value(b, d.opt_or_fail("fp")), dp);
    } else if (d.verb == "categorize") {
      std::set<std::string> categories;
      std::stringstream cats(d.arg(2));
      std::string cat;
      while (std::getline(cats, cat, ',')) {
        categories.insert(cat);
      }
      butler(d.arg(0)).categorize_user(identity_of_label(d.arg(1)), categories);
    } else if (d.verb == "subscribe_notify") {
      butler(d.arg(0)).subscribe_notify(d.arg(1));
    } else if (d.verb == "publish") {
      Butler& b = butler(d.arg(0));
      std::optional<Policy> fp;
      if (auto text = d.opt("fp")) {
        fp = parse_policy_value(b, *text);
      }
      ContentName name = b.publish(d.arg(1), d.arg(2), to_bytes(d.opt_or_fail("payload")),
                                   std::move(fp));
      labels_[d.arg(3)] = name;
      b.compile_index(d.arg(1), {{"latest", name}});
    } else if (d.verb == "publish_file") {
      Butler& b = butler(d.arg(0));
      Policy fp = parse_policy_value(b, d.opt_or_fail("fp"));
      std::size_t chunk = static_cast<std::size_t>(std::stoull(d.opt_or_fail("chunk")));
      ContentName first =
          b.publish_file(d.arg(1), to_bytes(d.opt_or_fail("payload")), chunk, fp);
      labels_[d.arg(2)] = first;
    } else if (d.verb == "grant_cert") {
      Butler& b = butler(d.arg(0));
      SimTime expiry = net_.now() + std::stoll(d.opt_or_fail("expiry")) * kSecond;
      auto cert =
          b.issue_certificate(identity_of_label(d.arg(2)), folder_for(b, d.arg(1)), expiry);
      distributor(d.arg(2)).accept_certificate(cert);
    } else if (d.verb == "fetch") {
      butler(d.arg(0)).fetch(labeled(d.arg(1)));
    } else if (d.verb == "fetch_feed") {
      butler(d.arg(0)).fetch_feed(identity_of_label(d.arg(1)), d.arg(2));
    } else if (d.verb == "fetch_file") {
      butler(d.arg(0)).fetch_file(labeled(d.arg(1)));
    } else if (d.verb == "comment") {
      // <commenter> <app> <feed> on=<label> as=<label> payload="..."
      Butler& b = butler(d.arg(0));
      ContentName target = labeled(d.opt_or_fail("on"));
      ContentName comment = b.publish(d.arg(1), d.arg(2),
                                      to_bytes(d.opt_or_fail("payload")), std::nullopt,
                                      target);
      b.compile_index(d.arg(1), {{"latest", comment}});
      labels_[d.opt_or_fail("as")] = comment;
      b.notify_peer(target.producer(), comment, d.arg(1));
    } else if (d.verb == "revoke") {
      butler(d.arg(0)).revoke_access(labeled(d.arg(1)), identity_of_label(d.arg(2)));
    } else if (d.verb == "mutate_update") {
      ContentName renamed =
          butler(d.arg(0)).mutate_update(labeled(d.arg(1)), to_bytes(d.opt_or_fail("payload")));
      labels_[d.arg(1)] = renamed;
    } else if (d.verb == "mutate_delete") {
      butler(d.arg(0)).mutate_delete(labeled(d.arg(1)));
    } else if (d.verb == "cut") {
      butler(d.arg(0)).cut_feed(d.arg(1), d.arg(2), labeled(d.arg(3)), labeled(d.arg(4)));
    } else if (d.verb == "rotate_epoch") {
      butler(d.arg(0)).rotate_epoch();
    } else if (d.verb == "set_down") {
      net_.set_down(any_node(d.arg(0)).id(), true);
    } else if (d.verb == "set_up") {
      net_.set_down(any_node(d.arg(0)).id(), false);
    } else if (d.verb == "expect") {
      check_expectation(d);
    } else {
      throw ParseError("line " + std::to_string(d.line) + ": unknown directive '" +
                       d.verb + "'");
    }
  }

  // ---- expectations ----

  const Butler::FetchResult& fetched(const std::string& node, const std::string& label) {
    const auto* result = butler(node).fetch_result(labeled(label));
    if (!result) {
      throw ExpectationFailed(node + " never fetched " + label);
    }
    return *result;
  }

  void check_expectation(const Directive& d) {
    const std::string& kind = d.arg(0);
    using Outcome = Butler::FetchResult::Outcome;
    using Decrypt = Butler::FetchResult::Decrypt;

    if (kind == "fetch_ok" || kind == "fetch_notfound" || kind == "fetch_banned" ||
        kind == "fetch_unresolvable") {
      const auto& result = fetched(d.arg(1), d.arg(2));
      Outcome want = kind == "fetch_ok"         ? Outcome::Ok
                     : kind == "fetch_notfound" ? Outcome::NotFound
                     : kind == "fetch_banned"   ? Outcome::Banned
                                                : Outcome::Unresolvable;
      if (result.outcome != want) {
        throw ExpectationFailed(kind + " " + d.arg(1) + " " + d.arg(2) +
                                ": outcome differs");
      }
    } else if (kind == "decrypt_ok") {
      const auto& result = fetched(d.arg(1), d.arg(2));
      if (result.outcome != Outcome::Ok || result.decrypt != Decrypt::Ok) {
        throw ExpectationFailed("decrypt_ok " + d.arg(1) + " " + d.arg(2) + ": denied");
      }
      if (auto payload = d.opt("payload"); payload && result.payload != to_bytes(*payload)) {
        throw ExpectationFailed("decrypt_ok " + d.arg(1) + " " + d.arg(2) +
                                ": payload differs");
      }
    } else if (kind == "decrypt_fails") {
      const auto& result = fetched(d.arg(1), d.arg(2));
      if (result.outcome != Outcome::Ok || result.decrypt == Decrypt::Ok) {
        throw ExpectationFailed("decrypt_fails " + d.arg(1) + " " + d.arg(2) +
                                ": content was readable or missing");
      }
    } else if (kind == "version") {
      const auto& result = fetched(d.arg(1), d.arg(2));
      if (!result.object || result.object->version != std::stoull(d.arg(3))) {
        throw ExpectationFailed("version " + d.arg(2) + " != " + d.arg(3));
      }
    } else if (kind == "file_ok") {
      const auto* read = butler(d.arg(1)).file_read_result(labeled(d.arg(2)));
      if (!read || !read->done || !read->ok) {
        throw ExpectationFailed("file_ok " + d.arg(2) + ": not reassembled");
      }
      if (auto payload = d.opt("payload"); payload && read->data != to_bytes(*payload)) {
        throw ExpectationFailed("file_ok " + d.arg(2) + ": payload differs");
      }
    } else if (kind == "feed_len") {
      const auto* walk =
          butler(d.arg(1)).feed_read_result(identity_of_label(d.arg(2)), d.arg(3));
      std::size_t want = std::stoull(d.arg(4));
      if (!walk || !walk->done || walk->names.size() != want) {
        throw ExpectationFailed("feed_len " + d.arg(1) + ": got " +
                                (walk ? std::to_string(walk->names.size()) : "nothing") +
                                ", want " + d.arg(4));
      }
    } else if (kind == "feed_payload") {
      const auto* walk =
          butler(d.arg(1)).feed_read_result(identity_of_label(d.arg(2)), d.arg(3));
      std::size_t i = std::stoull(d.arg(4));
      if (!walk || i >= walk->payloads.size() ||
          walk->payloads[i] != to_bytes(d.opt_or_fail("payload"))) {
        throw ExpectationFailed("feed_payload " + d.arg(1) + "[" + d.arg(4) +
                                "] differs");
      }
    } else if (kind == "link_count") {
      std::size_t got = butler(d.arg(1)).links_created(d.arg(2)).size();
      if (got != std::stoull(d.arg(3))) {
        throw ExpectationFailed("link_count: got " + std::to_string(got) + ", want " +
                                d.arg(3));
      }
    } else if (kind == "distinct") {
      for (std::size_t i = 1; i < d.args.size(); ++i) {
        for (std::size_t j = i + 1; j < d.args.size(); ++j) {
          if (labeled(d.args[i]) == labeled(d.args[j])) {
            throw ExpectationFailed("labels " + d.args[i] + " and " + d.args[j] +
                                    " name the same object");
          }
        }
      }
    } else if (kind == "epoch") {
      if (butler(d.arg(1)).epoch() != std::stoull(d.arg(2))) {
        throw ExpectationFailed("epoch differs for " + d.arg(1));
      }
    } else if (kind == "metric") {
      Metrics m = net_.collect_metrics();
      auto value = m.get(d.arg(1));
      if (!value) {
        throw ExpectationFailed("unknown metric " + d.arg(1));
      }
      std::uint64_t want = std::stoull(d.arg(3));
      const std::string& op = d.arg(2);
      bool pass = op == "==" ? *value == want
                  : op == "!=" ? *value != want
                  : op == "<=" ? *value <= want
                  : op == ">=" ? *value >= want
                  : op == "<"  ? *value < want
                  : op == ">"  ? *value > want
                               : throw ParseError("bad metric operator " + op);
      if (!pass) {
        throw ExpectationFailed("metric " + d.arg(1) + " is " + std::to_string(*value) +
                                ", wanted " + op + " " + d.arg(3));
      }
    } else {
      throw ParseError("line " + std::to_string(d.line) + ": unknown expectation '" +
                       kind + "'");
    }
  }

  SimNetwork net_;
  std::map<std::string, Butler*> butlers_;
  std::map<std::string, Distributor*> distributors_;
  std::map<std::string, ContentName> labels_;
};

// ---------------------------------------------------------------------------
// Metrics reports

inline std::string render_metrics_kv(const Metrics& metrics) {
  std::ostringstream out;
  for (const auto& [key, value] : metrics.entries()) {
    out << key << " = " << value << "\n";
  }
  return out.str();
}

inline std::string render_metrics_table(const Metrics& metrics) {
  std::ostringstream out;
  out << "counter                      value\n";
  out << "---------------------------  -----\n";
  for (const auto& [key, value] : metrics.entries()) {
    out << std::left << std::setw(29) << key << value << "\n";
  }
  return out.str();
}

inline Metrics parse_metrics_kv(std::istream& in) {
  Metrics metrics;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') {
      continue;
    }
    std::size_t eq = line.find(" = ");
    if (eq == std::string::npos) {
      throw ParseError("metrics line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = line.substr(0, eq);
    std::uint64_t value = std::stoull(line.substr(eq + 3));
    if (!metrics.set(key, value)) {
      throw ParseError("metrics line " + std::to_string(line_no) + ": unknown key " + key);
    }
  }
  return metrics;
}

inline Metrics parse_metrics_kv(const std::string& text) {
  std::istringstream in(text);
  return parse_metrics_kv(in);
}

} // namespace warp
