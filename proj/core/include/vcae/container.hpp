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
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "vcae/numerics.hpp"
#include "vcae/tensor.hpp"

// Versioned, self-describing binary container shared by checkpoints and the
// dataset cache. Layout, all integers and floats little-endian:
//
//   "VCAEPAK\0"                     8-byte magic
//   u32 version                     currently 1
//   u32 kind                        1 = checkpoint, 2 = dataset cache
//   u64 n, n bytes                  metadata (UTF-8, JSON by convention)
//   u64 entry count
//   per entry:
//     u32 n, n bytes                name
//     u32 rank, u64 dims[rank]
//     u8  flags                     bit 0: optimizer state follows
//     f64 payload[prod(dims)]
//     [u64 t, f64 beta1, beta2, eps, lr, f64 m[..], f64 v[..]]
//   u32 crc32                       over every preceding byte

namespace vcae::pack {

enum class ContainerKind : std::uint32_t { Checkpoint = 1, DatasetCache = 2 };

inline constexpr std::uint32_t kFormatVersion = 1;

class FormatError : public std::runtime_error {
 public:
  enum class Kind { Io, BadMagic, VersionMismatch, Truncated, ChecksumMismatch, Malformed,
                    NameSetMismatch, WrongKind };

  FormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct Entry {
  std::string name;
  Tensor value;
  std::optional<AdamState> adam;
};

struct Container {
  ContainerKind kind = ContainerKind::Checkpoint;
  std::string metadata;
  std::vector<Entry> entries;
};

std::vector<std::uint8_t> encode(const Container& c);
Container decode(std::span<const std::uint8_t> bytes);

void write_file(const Container& c, const std::filesystem::path& path);
Container read_file(const std::filesystem::path& path);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);

}  // namespace vcae::pack
