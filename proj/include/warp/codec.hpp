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

#include <optional>
#include <string>
#include <string_view>

#include "warp/common.hpp"

// Canonical TLV wire format: field id (1 byte), length (4 bytes big-endian),
// value. Field order is fixed per structure so encodings are byte-stable and
// signatures have canonical input.

namespace warp {

class TlvWriter {
public:
  void put(std::uint8_t id, std::span<const std::uint8_t> value) {
    if (value.size() > 0xffffffffULL) {
      throw MalformedEncoding("TLV value too large");
    }
    buf_.push_back(id);
    put_be32(static_cast<std::uint32_t>(value.size()));
    buf_.insert(buf_.end(), value.begin(), value.end());
  }

  void put_string(std::uint8_t id, std::string_view s) {
    put(id, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  }

  void put_u32(std::uint8_t id, std::uint32_t v) {
    std::array<std::uint8_t, 4> b{static_cast<std::uint8_t>(v >> 24),
                                  static_cast<std::uint8_t>(v >> 16),
                                  static_cast<std::uint8_t>(v >> 8),
                                  static_cast<std::uint8_t>(v)};
    put(id, b);
  }

  void put_u64(std::uint8_t id, std::uint64_t v) {
    std::array<std::uint8_t, 8> b{};
    for (int i = 0; i < 8; ++i) {
      b[i] = static_cast<std::uint8_t>(v >> (56 - 8 * i));
    }
    put(id, b);
  }

  void put_i64(std::uint8_t id, std::int64_t v) {
    put_u64(id, static_cast<std::uint64_t>(v));
  }

  const Bytes& bytes() const { return buf_; }
  Bytes take() { return std::move(buf_); }

private:
  void put_be32(std::uint32_t v) {
    buf_.push_back(static_cast<std::uint8_t>(v >> 24));
    buf_.push_back(static_cast<std::uint8_t>(v >> 16));
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
    buf_.push_back(static_cast<std::uint8_t>(v));
  }

  Bytes buf_;
};

class TlvReader {
public:
  explicit TlvReader(std::span<const std::uint8_t> data) : data_(data) {}

  struct Field {
    std::uint8_t id;
    std::span<const std::uint8_t> value;
  };

  bool done() const { return pos_ == data_.size(); }

  std::optional<std::uint8_t> peek_id() const {
    return done() ? std::nullopt : std::optional(data_[pos_]);
  }

  Field next() {
    if (pos_ + 5 > data_.size()) {
      throw MalformedEncoding("truncated TLV header");
    }
    std::uint8_t id = data_[pos_];
    std::uint32_t len = (static_cast<std::uint32_t>(data_[pos_ + 1]) << 24) |
                        (static_cast<std::uint32_t>(data_[pos_ + 2]) << 16) |
                        (static_cast<std::uint32_t>(data_[pos_ + 3]) << 8) |
                        static_cast<std::uint32_t>(data_[pos_ + 4]);
    pos_ += 5;
    if (pos_ + len > data_.size()) {
      throw MalformedEncoding("truncated TLV value");
    }
    Field f{id, data_.subspan(pos_, len)};
    pos_ += len;
    return f;
  }

  // Next field must carry exactly this id (fixed field order).
  std::span<const std::uint8_t> expect(std::uint8_t id) {
    Field f = next();
    if (f.id != id) {
      throw MalformedEncoding("unexpected TLV field id " + std::to_string(f.id) +
                              ", wanted " + std::to_string(id));
    }
    return f.value;
  }

  // Consumes the next field iff it carries this id (optional fields).
  std::optional<std::span<const std::uint8_t>> maybe(std::uint8_t id) {
    if (peek_id() == id) {
      return next().value;
    }
    return std::nullopt;
  }

  void expect_done() const {
    if (!done()) {
      throw MalformedEncoding("trailing bytes after final TLV field");
    }
  }

  static std::uint32_t as_u32(std::span<const std::uint8_t> v) {
    if (v.size() != 4) {
      throw MalformedEncoding("bad u32 field length");
    }
    return (static_cast<std::uint32_t>(v[0]) << 24) | (static_cast<std::uint32_t>(v[1]) << 16) |
           (static_cast<std::uint32_t>(v[2]) << 8) | static_cast<std::uint32_t>(v[3]);
  }

  static std::uint64_t as_u64(std::span<const std::uint8_t> v) {
    if (v.size() != 8) {
      throw MalformedEncoding("bad u64 field length");
    }
    std::uint64_t out = 0;
    for (std::uint8_t b : v) {
      out = (out << 8) | b;
    }
    return out;
  }

  static std::int64_t as_i64(std::span<const std::uint8_t> v) {
    return static_cast<std::int64_t>(as_u64(v));
  }

  static std::string as_string(std::span<const std::uint8_t> v) {
    return std::string(v.begin(), v.end());
  }

private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

} // namespace warp
