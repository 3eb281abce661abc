// Copyright 2026 The VCAE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>

namespace vcae {

/// Counter-based random stream.
///
/// The n-th draw is a pure function of (seed, n), so a stream can be copied,
/// checkpointed, or split without any shared mutable generator. Every scalar
/// draw advances the counter by exactly one.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t counter = 0) noexcept
      : seed_(seed), counter_(counter) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;

  /// Uniform on (eps, 1 - eps) with eps = 1e-12.
  double uniform01() noexcept;

  /// Standard normal (Box-Muller on two lanes of the same counter tick).
  double std_normal() noexcept;

  /// Standard logistic: log u - log(1 - u) of a uniform01 draw.
  double std_logistic() noexcept;

  /// Independent child stream keyed by `key`; the parent is not advanced.
  RngStream split(std::uint64_t key) const noexcept;

  friend bool operator==(const RngStream&, const RngStream&) = default;

  static constexpr double kUniformEps = 1e-12;

 private:
  std::uint64_t bits(std::uint64_t lane) const noexcept;

  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace vcae
