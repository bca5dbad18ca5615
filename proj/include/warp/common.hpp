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

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace warp {

using Bytes = std::vector<std::uint8_t>;

// Virtual time in milliseconds. The simulator owns the clock; nothing in the
// library reads wall-clock time.
using SimTime = std::int64_t;

inline constexpr SimTime kMillisecond = 1;
inline constexpr SimTime kSecond = 1000 * kMillisecond;
inline constexpr SimTime kMinute = 60 * kSecond;
inline constexpr SimTime kHour = 60 * kMinute;
inline constexpr SimTime kDay = 24 * kHour;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define WARP_DEFINE_ERROR(Name)                                                \
  class Name : public Error {                                                  \
  public:                                                                      \
    using Error::Error;                                                        \
  }

WARP_DEFINE_ERROR(MalformedName);
WARP_DEFINE_ERROR(NoParent);
WARP_DEFINE_ERROR(InvalidPolicy);
WARP_DEFINE_ERROR(UnknownAlias);
WARP_DEFINE_ERROR(UnknownPeer);
WARP_DEFINE_ERROR(AccessDenied);
WARP_DEFINE_ERROR(IntegrityFailure);
WARP_DEFINE_ERROR(MalformedEncoding);
WARP_DEFINE_ERROR(NameNotOwned);
WARP_DEFINE_ERROR(NotTail);
WARP_DEFINE_ERROR(NotInFeed);
WARP_DEFINE_ERROR(OrderViolation);
WARP_DEFINE_ERROR(EmptyData);
WARP_DEFINE_ERROR(BadCertificate);
WARP_DEFINE_ERROR(BadSignature);
WARP_DEFINE_ERROR(Expired);
WARP_DEFINE_ERROR(NotOwned);
WARP_DEFINE_ERROR(NotFound);
WARP_DEFINE_ERROR(Unauthorized);
WARP_DEFINE_ERROR(NoSuchApplication);
WARP_DEFINE_ERROR(OutOfOrderCommand);
WARP_DEFINE_ERROR(TuUnreachable);
WARP_DEFINE_ERROR(UnknownNode);
WARP_DEFINE_ERROR(Unresolvable);
WARP_DEFINE_ERROR(ParseError);
WARP_DEFINE_ERROR(ExpectationFailed);

#undef WARP_DEFINE_ERROR

// Deterministic random source. Wraps std::mt19937_64, whose output sequence
// is fully specified by the standard; reductions below are explicit so that
// values never depend on the standard library's distribution implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  std::uint32_t next_u32() {
    return static_cast<std::uint32_t>(engine_() >> 32);
  }

  // Uniform-ish value in [0, n). Modulo bias is irrelevant at desk scale;
  // determinism is what matters here.
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }

  void fill(std::span<std::uint8_t> out) {
    std::size_t i = 0;
    while (i < out.size()) {
      std::uint64_t word = engine_();
      for (int b = 0; b < 8 && i < out.size(); ++b, ++i) {
        out[i] = static_cast<std::uint8_t>(word >> (8 * b));
      }
    }
  }

  Bytes bytes(std::size_t n) {
    Bytes out(n);
    fill(out);
    return out;
  }

  template <std::size_t N>
  std::array<std::uint8_t, N> array() {
    std::array<std::uint8_t, N> out{};
    fill(out);
    return out;
  }

private:
  std::mt19937_64 engine_;
};

inline std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

inline bool is_hex_lower(std::string_view s) {
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
      return false;
    }
  }
  return !s.empty();
}

inline Bytes from_hex(std::string_view s) {
  if (s.size() % 2 != 0 || !is_hex_lower(s)) {
    throw MalformedEncoding("bad hex string");
  }
  auto nibble = [](char c) -> std::uint8_t {
    return c <= '9' ? static_cast<std::uint8_t>(c - '0')
                    : static_cast<std::uint8_t>(c - 'a' + 10);
  };
  Bytes out(s.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(s[2 * i]) << 4 | nibble(s[2 * i + 1]));
  }
  return out;
}

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline std::string to_string(std::span<const std::uint8_t> b) {
  return std::string(b.begin(), b.end());
}

// Order-independent 64-bit mix, used to derive per-pair link latencies and
// per-node seeds from the master seed without caring about creation order.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(a) ^ (b * 0xd6e8feb86659fd93ULL));
}

inline std::uint64_t hash_str(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

} // namespace warp
