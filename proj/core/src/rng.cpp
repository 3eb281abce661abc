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

#include "vcae/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace vcae {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double to_unit(std::uint64_t b) noexcept {
  const double u = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::clamp(u, RngStream::kUniformEps, 1.0 - RngStream::kUniformEps);
}

}  // namespace

std::uint64_t RngStream::bits(std::uint64_t lane) const noexcept {
  const std::uint64_t key = mix64(seed_ ^ mix64(lane * kGolden + 0x632be59bd9b4e019ULL));
  return mix64(key + (counter_ + 1) * kGolden);
}

std::uint64_t RngStream::next_u64() noexcept {
  const std::uint64_t b = bits(0);
  ++counter_;
  return b;
}

double RngStream::uniform01() noexcept { return to_unit(next_u64()); }

double RngStream::std_normal() noexcept {
  const double u1 = to_unit(bits(1));
  const double u2 = to_unit(bits(2));
  ++counter_;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::std_logistic() noexcept {
  const double u = uniform01();
  return std::log(u) - std::log1p(-u);
}

RngStream RngStream::split(std::uint64_t key) const noexcept {
  return RngStream(mix64(seed_ ^ mix64(key + 0xd1b54a32d192ed03ULL)) ^ counter_, 0);
}

}  // namespace vcae
