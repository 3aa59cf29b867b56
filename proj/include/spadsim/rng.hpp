/*
 * Copyright 2026 The spadsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace spadsim {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A pure
/// function of (counter, key): any draw can be regenerated independently
/// of every other draw.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }
};

/// Reserved values of the `pulse` coordinate for per-frame and per-image
/// draws, so they never collide with per-pulse streams.
inline constexpr std::uint32_t kSkewStream = 0xFFFFFFFFu;
inline constexpr std::uint32_t kCrbNoiseStream = 0xFFFFFFFEu;

/// Uniform and normal variates addressed by (seed, pixel, frame, pulse,
/// substream). Each address yields an independent sequence.
class KeyedStream {
 public:
  KeyedStream(std::uint64_t seed, std::uint32_t pixel, std::uint32_t frame, std::uint32_t pulse,
              std::uint32_t substream = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        base_{pixel, frame, pulse, substream << 24} {}

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() {
    if (cursor_ == 2) refill();
    const std::uint64_t bits = buffer_[cursor_++];
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes one block per pair.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint32_t blocks_used() const { return block_; }

 private:
  void refill() {
    Philox4x32::Counter c = base_;
    c[3] |= block_++;
    const auto w = Philox4x32::generate(c, key_);
    buffer_[0] = (std::uint64_t{w[0]} << 32) | w[1];
    buffer_[1] = (std::uint64_t{w[2]} << 32) | w[3];
    cursor_ = 0;
  }

  Philox4x32::Key key_;
  Philox4x32::Counter base_;
  std::uint32_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int cursor_ = 2;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace spadsim
