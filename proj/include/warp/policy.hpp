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
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "warp/common.hpp"

// Boolean attribute policies: leaves are attribute strings, inner nodes are
// AND, OR and k-of-n. Canonical text form, e.g.
//   OR(friend,AND(acquaintance,school),teammate)
//   KOFN(2;a,b,c)
// Attributes include plain categories ("friend"), bucket attributes
// ("bucket:3") and alias attributes ("alias:<hex>").

namespace warp {

inline constexpr std::string_view kBucketAttrPrefix = "bucket:";
inline constexpr std::string_view kAliasAttrPrefix = "alias:";

inline std::string bucket_attribute(int bucket) {
  return std::string(kBucketAttrPrefix) + std::to_string(bucket);
}

inline std::string alias_attribute(std::string_view alias) {
  return std::string(kAliasAttrPrefix) + std::string(alias);
}

inline bool is_valid_attribute(std::string_view s) {
  if (s.empty()) {
    return false;
  }
  for (char c : s) {
    if (c <= ' ' || c > '~' || c == '(' || c == ')' || c == ',' || c == ';') {
      return false;
    }
  }
  return true;
}

class Policy {
public:
  enum class Kind { Leaf, And, Or, KofN };

  Policy() : kind_(Kind::Leaf), attribute_("invalid") {}

  static Policy leaf(std::string attribute) {
    if (!is_valid_attribute(attribute)) {
      throw InvalidPolicy("bad attribute: '" + attribute + "'");
    }
    Policy p;
    p.kind_ = Kind::Leaf;
    p.attribute_ = std::move(attribute);
    return p;
  }

  static Policy all_of(std::vector<Policy> children) {
    return combine(Kind::And, 0, std::move(children));
  }

  static Policy any_of(std::vector<Policy> children) {
    return combine(Kind::Or, 0, std::move(children));
  }

  static Policy k_of_n(int k, std::vector<Policy> children) {
    if (k < 1 || static_cast<std::size_t>(k) > children.size()) {
      throw InvalidPolicy("k-of-n threshold out of range");
    }
    return combine(Kind::KofN, k, std::move(children));
  }

  Kind kind() const { return kind_; }
  const std::string& attribute() const { return attribute_; }
  const std::vector<Policy>& children() const { return children_; }
  int threshold() const { return k_; }

  bool evaluate(const std::set<std::string>& attributes) const {
    switch (kind_) {
    case Kind::Leaf:
      return attributes.contains(attribute_);
    case Kind::And:
      for (const Policy& c : children_) {
        if (!c.evaluate(attributes)) {
          return false;
        }
      }
      return true;
    case Kind::Or:
      for (const Policy& c : children_) {
        if (c.evaluate(attributes)) {
          return true;
        }
      }
      return false;
    case Kind::KofN: {
      int hits = 0;
      for (const Policy& c : children_) {
        if (c.evaluate(attributes)) {
          ++hits;
        }
      }
      return hits >= k_;
    }
    }
    return false;
  }

  std::string to_string() const {
    switch (kind_) {
    case Kind::Leaf:
      return attribute_;
    case Kind::And:
      return "AND(" + join_children() + ")";
    case Kind::Or:
      return "OR(" + join_children() + ")";
    case Kind::KofN:
      return "KOFN(" + std::to_string(k_) + ";" + join_children() + ")";
    }
    return {};
  }

  static Policy parse(std::string_view text) {
    std::size_t pos = 0;
    Policy p = parse_node(text, pos);
    if (pos != text.size()) {
      throw InvalidPolicy("trailing characters in policy text");
    }
    return p;
  }

  // Leaf attributes in depth-first order (with duplicates).
  void collect_leaf_attributes(std::vector<std::string>& out) const {
    if (kind_ == Kind::Leaf) {
      out.push_back(attribute_);
      return;
    }
    for (const Policy& c : children_) {
      c.collect_leaf_attributes(out);
    }
  }

  std::vector<std::string> leaf_attributes() const {
    std::vector<std::string> out;
    collect_leaf_attributes(out);
    return out;
  }

  std::size_t leaf_count() const {
    if (kind_ == Kind::Leaf) {
      return 1;
    }
    std::size_t n = 0;
    for (const Policy& c : children_) {
      n += c.leaf_count();
    }
    return n;
  }

  friend bool operator==(const Policy& a, const Policy& b) {
    return a.kind_ == b.kind_ && a.attribute_ == b.attribute_ && a.k_ == b.k_ &&
           a.children_ == b.children_;
  }

private:
  static Policy combine(Kind kind, int k, std::vector<Policy> children) {
    if (children.size() < 2) {
      throw InvalidPolicy("AND/OR/k-of-n need at least two children");
    }
    Policy p;
    p.kind_ = kind;
    p.k_ = k;
    p.children_ = std::move(children);
    return p;
  }

  std::string join_children() const {
    std::string out;
    for (std::size_t i = 0; i < children_.size(); ++i) {
      if (i > 0) {
        out += ",";
      }
      out += children_[i].to_string();
    }
    return out;
  }

  static Policy parse_node(std::string_view text, std::size_t& pos) {
    std::size_t token_start = pos;
    while (pos < text.size() && text[pos] != '(' && text[pos] != ')' &&
           text[pos] != ',' && text[pos] != ';') {
      ++pos;
    }
    std::string_view token = text.substr(token_start, pos - token_start);
    if (pos < text.size() && text[pos] == '(') {
      ++pos; // consume '('
      if (token == "AND" || token == "OR") {
        std::vector<Policy> children = parse_children(text, pos);
        return token == "AND" ? all_of(std::move(children)) : any_of(std::move(children));
      }
      if (token == "KOFN") {
        std::size_t k_start = pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
          ++pos;
        }
        if (pos == k_start || pos >= text.size() || text[pos] != ';') {
          throw InvalidPolicy("KOFN expects 'KOFN(<k>;...)'");
        }
        int k = std::stoi(std::string(text.substr(k_start, pos - k_start)));
        ++pos; // consume ';'
        std::vector<Policy> children = parse_children(text, pos);
        return k_of_n(k, std::move(children));
      }
      throw InvalidPolicy("unknown operator: '" + std::string(token) + "'");
    }
    return leaf(std::string(token));
  }

  static std::vector<Policy> parse_children(std::string_view text, std::size_t& pos) {
    std::vector<Policy> children;
    while (true) {
      children.push_back(parse_node(text, pos));
      if (pos >= text.size()) {
        throw InvalidPolicy("unterminated operator");
      }
      if (text[pos] == ',') {
        ++pos;
        continue;
      }
      if (text[pos] == ')') {
        ++pos;
        return children;
      }
      throw InvalidPolicy("expected ',' or ')' in policy text");
    }
  }

  Kind kind_;
  std::string attribute_;
  int k_ = 0;
  std::vector<Policy> children_;
};

inline bool evaluate_policy(const Policy& policy, const std::set<std::string>& attributes) {
  return policy.evaluate(attributes);
}

namespace detail {

// Disjunction a revoked member's bucket assignment induces: every bucket
// except the revoked one, plus the aliases of the revoked bucket's other
// members. Buckets ascending, aliases lexicographic, so rewritten policies
// are canonical.
inline Policy revocation_guard(const std::string& revoked_alias,
                               const std::map<std::string, int>& buckets, int bucket_count) {
  auto it = buckets.find(revoked_alias);
  if (it == buckets.end()) {
    throw UnknownAlias("alias not in bucket map: " + revoked_alias);
  }
  int revoked_bucket = it->second;
  std::vector<Policy> disjuncts;
  for (int b = 0; b < bucket_count; ++b) {
    if (b != revoked_bucket) {
      disjuncts.push_back(Policy::leaf(bucket_attribute(b)));
    }
  }
  for (const auto& [alias, bucket] : buckets) {
    if (bucket == revoked_bucket && alias != revoked_alias) {
      disjuncts.push_back(Policy::leaf(alias_attribute(alias)));
    }
  }
  if (disjuncts.empty()) {
    throw InvalidPolicy("revocation guard would be unsatisfiable (K < 2, lone bucket member)");
  }
  if (disjuncts.size() == 1) {
    return disjuncts.front();
  }
  return Policy::any_of(std::move(disjuncts));
}

} // namespace detail

// Replaces every Leaf(attribute) with AND(attribute, <revocation guard>),
// leaving the rest of the tree untouched. The guard admits everybody except
// the revoked alias, so policy growth is bounded by the bucket count rather
// than by the audience size.
inline Policy rewrite_policy_for_revocation(const Policy& policy, const std::string& attribute,
                                            const std::string& revoked_alias,
                                            const std::map<std::string, int>& buckets,
                                            int bucket_count) {
  switch (policy.kind()) {
  case Policy::Kind::Leaf:
    if (policy.attribute() == attribute) {
      Policy guard = detail::revocation_guard(revoked_alias, buckets, bucket_count);
      return Policy::all_of({policy, std::move(guard)});
    }
    return policy;
  case Policy::Kind::And:
  case Policy::Kind::Or:
  case Policy::Kind::KofN: {
    std::vector<Policy> rewritten;
    rewritten.reserve(policy.children().size());
    for (const Policy& c : policy.children()) {
      rewritten.push_back(
          rewrite_policy_for_revocation(c, attribute, revoked_alias, buckets, bucket_count));
    }
    if (policy.kind() == Policy::Kind::And) {
      return Policy::all_of(std::move(rewritten));
    }
    if (policy.kind() == Policy::Kind::Or) {
      return Policy::any_of(std::move(rewritten));
    }
    return Policy::k_of_n(policy.threshold(), std::move(rewritten));
  }
  }
  return policy;
}

} // namespace warp
