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

#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include "warp/common.hpp"

// Hierarchical content names: `x.y/<application>/<folder>/.../<appendix>`.
// The first segment is the producer identity (identity authority `x`, user
// `y`), the second the application, the rest anonymized 128-bit hex segments.
// Folder names are the same minus the appendix; `x.y/<application>` is the
// minimal folder.

namespace warp {

inline constexpr std::size_t kSegmentChars = 32;

// Reserved segments. The index object of an application prefix always has
// this appendix; the thread-update feed of a folder lives in the subfolder
// with this segment. Collision with randomly drawn segments is negligible.
inline constexpr std::string_view kIndexAppendix = "00000000000000000000000000000000";
inline constexpr std::string_view kTuSegment = "ffffffffffffffffffffffffffffffff";

inline bool is_valid_segment(std::string_view s) {
  return s.size() == kSegmentChars && is_hex_lower(s);
}

inline bool is_valid_application(std::string_view s) {
  if (s.empty() || s.size() > 64) {
    return false;
  }
  for (char c : s) {
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-')) {
      return false;
    }
  }
  return true;
}

inline bool is_valid_identifier(std::string_view s) {
  if (s.empty()) {
    return false;
  }
  for (char c : s) {
    if (c == '/' || c == '.') {
      return false;
    }
  }
  return true;
}

struct FolderName {
  std::string ia;
  std::string user;
  std::string application;
  std::vector<std::string> folders;

  std::string producer() const { return ia + "." + user; }
  std::size_t depth() const { return folders.size(); }

  friend auto operator<=>(const FolderName&, const FolderName&) = default;
};

struct ContentName {
  std::string ia;
  std::string user;
  std::string application;
  std::vector<std::string> folders;
  std::string appendix;

  std::string producer() const { return ia + "." + user; }

  friend auto operator<=>(const ContentName&, const ContentName&) = default;
};

namespace detail {

inline std::vector<std::string> split_segments(std::string_view text) {
  std::vector<std::string> segs;
  std::size_t start = 0;
  while (true) {
    std::size_t slash = text.find('/', start);
    if (slash == std::string_view::npos) {
      segs.emplace_back(text.substr(start));
      break;
    }
    segs.emplace_back(text.substr(start, slash - start));
    start = slash + 1;
  }
  return segs;
}

inline void parse_head(const std::vector<std::string>& segs, std::string& ia,
                       std::string& user, std::string& application) {
  for (const auto& s : segs) {
    if (s.empty()) {
      throw MalformedName("empty segment");
    }
  }
  const std::string& head = segs[0];
  std::size_t dot = head.find('.');
  if (dot == std::string::npos || head.find('.', dot + 1) != std::string::npos) {
    throw MalformedName("first segment must be of the form x.y");
  }
  ia = head.substr(0, dot);
  user = head.substr(dot + 1);
  if (!is_valid_identifier(ia) || !is_valid_identifier(user)) {
    throw MalformedName("bad identity in first segment");
  }
  application = segs[1];
  if (!is_valid_application(application)) {
    throw MalformedName("bad application identifier");
  }
}

} // namespace detail

inline ContentName parse_name(std::string_view text) {
  auto segs = detail::split_segments(text);
  if (segs.size() < 3) {
    throw MalformedName("a content name needs at least three segments");
  }
  ContentName name;
  detail::parse_head(segs, name.ia, name.user, name.application);
  for (std::size_t i = 2; i + 1 < segs.size(); ++i) {
    if (!is_valid_segment(segs[i])) {
      throw MalformedName("folder segment is not 32 lowercase hex chars");
    }
    name.folders.push_back(segs[i]);
  }
  if (!is_valid_segment(segs.back())) {
    throw MalformedName("appendix is not 32 lowercase hex chars");
  }
  name.appendix = segs.back();
  return name;
}

inline FolderName parse_folder(std::string_view text) {
  auto segs = detail::split_segments(text);
  if (segs.size() < 2) {
    throw MalformedName("a folder name needs at least two segments");
  }
  FolderName folder;
  detail::parse_head(segs, folder.ia, folder.user, folder.application);
  for (std::size_t i = 2; i < segs.size(); ++i) {
    if (!is_valid_segment(segs[i])) {
      throw MalformedName("folder segment is not 32 lowercase hex chars");
    }
    folder.folders.push_back(segs[i]);
  }
  return folder;
}

inline std::string format_folder(const FolderName& folder) {
  std::string out = folder.ia + "." + folder.user + "/" + folder.application;
  for (const auto& seg : folder.folders) {
    out += "/";
    out += seg;
  }
  return out;
}

inline std::string format_name(const ContentName& name) {
  std::string out = name.ia + "." + name.user + "/" + name.application;
  for (const auto& seg : name.folders) {
    out += "/";
    out += seg;
  }
  out += "/";
  out += name.appendix;
  return out;
}

// 128 random bits as 32 lowercase hex chars.
inline std::string generate_segment(Rng& rng) {
  return to_hex(rng.array<16>());
}

inline FolderName folder_of(const ContentName& name) {
  return FolderName{name.ia, name.user, name.application, name.folders};
}

inline FolderName application_prefix(const FolderName& folder) {
  return FolderName{folder.ia, folder.user, folder.application, {}};
}

inline FolderName parent_folder(const FolderName& folder) {
  if (folder.folders.empty()) {
    throw NoParent("application prefix has no parent folder");
  }
  FolderName parent = folder;
  parent.folders.pop_back();
  return parent;
}

inline FolderName parent_folder(const ContentName& name) {
  return folder_of(name);
}

inline bool is_prefix_of(const FolderName& folder, const FolderName& other) {
  if (folder.ia != other.ia || folder.user != other.user ||
      folder.application != other.application ||
      folder.folders.size() > other.folders.size()) {
    return false;
  }
  for (std::size_t i = 0; i < folder.folders.size(); ++i) {
    if (folder.folders[i] != other.folders[i]) {
      return false;
    }
  }
  return true;
}

inline bool is_prefix_of(const FolderName& folder, const ContentName& name) {
  // A name's segment sequence is its folders followed by the appendix.
  if (folder.ia != name.ia || folder.user != name.user ||
      folder.application != name.application ||
      folder.folders.size() > name.folders.size() + 1) {
    return false;
  }
  for (std::size_t i = 0; i < folder.folders.size(); ++i) {
    const std::string& seg = i < name.folders.size() ? name.folders[i] : name.appendix;
    if (folder.folders[i] != seg) {
      return false;
    }
  }
  return true;
}

inline ContentName make_name(const FolderName& folder, std::string appendix) {
  return ContentName{folder.ia, folder.user, folder.application, folder.folders,
                     std::move(appendix)};
}

inline FolderName subfolder(const FolderName& folder, std::string segment) {
  FolderName sub = folder;
  sub.folders.push_back(std::move(segment));
  return sub;
}

// The thread-update feed of `folder` lives in this reserved subfolder.
inline FolderName tu_folder_of(const FolderName& folder) {
  return subfolder(folder, std::string(kTuSegment));
}

inline bool is_tu_folder(const FolderName& folder) {
  return !folder.folders.empty() && folder.folders.back() == kTuSegment;
}

// Folder a TU feed governs, i.e. the one whose content its commands concern.
inline FolderName tu_governed_folder(const FolderName& tu_folder) {
  if (!is_tu_folder(tu_folder)) {
    throw MalformedName("not a thread-update folder");
  }
  return parent_folder(tu_folder);
}

inline ContentName index_name(const FolderName& application_prefix_folder) {
  return make_name(FolderName{application_prefix_folder.ia, application_prefix_folder.user,
                              application_prefix_folder.application, {}},
                   std::string(kIndexAppendix));
}

} // namespace warp
